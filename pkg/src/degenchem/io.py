"""On-disk formats: profile CSVs, run manifests, diagnostics tables.

All floats are written with repr() so values round-trip exactly and output
is deterministic byte for byte.  Headers carry the physical parameters so a
profile file is self-describing.
"""

from __future__ import annotations

import os

import numpy as np

from .domain import Params, SGrid, make_params
from .transform import RadialProfile, WProfile

__all__ = [
    "write_w_profile",
    "read_w_profile",
    "write_radial_profile",
    "read_radial_profile",
    "write_manifest",
    "read_manifest",
    "append_manifest",
    "write_diagnostics",
    "read_diagnostics",
    "write_moment_series",
    "snapshot_filename",
]

_W_KIND = "w-profile"
_RADIAL_KIND = "radial-profile"
RADIAL_KINDS = ("u", "v_r", "v")


def _format_params(params: Params) -> str:
    return (f"n={params.n!r}, R={params.R!r}, "
            f"beta={params.beta!r}, m={params.m!r}")


def _parse_header(line: str, path, expected_kind: str) -> dict:
    prefix = f"# degenchem {expected_kind} v1, "
    if not line.startswith(prefix):
        raise ValueError(
            f"{path}:1: expected header starting with {prefix!r}, "
            f"got {line.rstrip()!r}")
    fields = {}
    for part in line[len(prefix):].strip().split(", "):
        if "=" not in part:
            raise ValueError(f"{path}:1: malformed header field {part!r}")
        key, _, val = part.partition("=")
        fields[key.strip()] = val.strip()
    return fields


def _params_from_fields(fields: dict, path) -> Params:
    try:
        n = int(fields["n"])
        R = float(fields["R"])
        beta = float(fields["beta"])
        m = float(fields["m"])
    except (KeyError, ValueError) as exc:
        raise ValueError(f"{path}:1: header missing or malformed "
                         f"parameter field ({exc})") from None
    return make_params(n=n, R=R, beta=beta, m=m)


def _read_rows(lines, path, start_lineno: int):
    xs = []
    ys = []
    for lineno, line in enumerate(lines, start=start_lineno):
        stripped = line.strip()
        if not stripped:
            continue
        parts = stripped.split(",")
        if len(parts) != 2:
            raise ValueError(
                f"{path}:{lineno}: expected two comma-separated values, "
                f"got {stripped!r}")
        try:
            xs.append(float(parts[0]))
            ys.append(float(parts[1]))
        except ValueError:
            raise ValueError(
                f"{path}:{lineno}: could not parse floats from "
                f"{stripped!r}") from None
    return np.array(xs), np.array(ys)


def write_w_profile(path, w: WProfile) -> None:
    if w.params is None:
        raise ValueError("profile carries no params; cannot write header")
    header = f"# degenchem {_W_KIND} v1, {_format_params(w.params)}"
    if w.time != 0.0:
        header += f", t={float(w.time)!r}"
    with open(path, "w", newline="\n") as fh:
        fh.write(header + "\n")
        for s, v in zip(w.grid.nodes, w.values):
            fh.write(f"{float(s)!r},{float(v)!r}\n")


def read_w_profile(path) -> WProfile:
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise ValueError(f"{path}:1: empty file")
    fields = _parse_header(lines[0], path, _W_KIND)
    params = _params_from_fields(fields, path)
    t = float(fields.get("t", 0.0))
    s, vals = _read_rows(lines[1:], path, start_lineno=2)
    if len(s) < 3:
        raise ValueError(f"{path}: profile needs at least 3 rows, got {len(s)}")
    grid = SGrid(nodes=s, grading="file")
    return WProfile(grid=grid, values=vals, time=t, params=params)


def write_radial_profile(path, kind: str, r, values, params: Params) -> None:
    if kind not in RADIAL_KINDS:
        raise ValueError(f"kind must be one of {RADIAL_KINDS}, got {kind!r}")
    with open(path, "w", newline="\n") as fh:
        fh.write(f"# degenchem {_RADIAL_KIND} v1, kind={kind}, "
                 f"{_format_params(params)}\n")
        for ri, vi in zip(np.asarray(r), np.asarray(values)):
            fh.write(f"{float(ri)!r},{float(vi)!r}\n")


def read_radial_profile(path):
    """Returns (kind, r, values, params)."""
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise ValueError(f"{path}:1: empty file")
    fields = _parse_header(lines[0], path, _RADIAL_KIND)
    kind = fields.get("kind")
    if kind not in RADIAL_KINDS:
        raise ValueError(f"{path}:1: kind must be one of {RADIAL_KINDS}, "
                         f"got {kind!r}")
    params = _params_from_fields(fields, path)
    r, vals = _read_rows(lines[1:], path, start_lineno=2)
    return kind, r, vals, params


def read_radial_as_profile(path) -> RadialProfile:
    """Read a kind=u radial file into a density profile."""
    kind, r, vals, params = read_radial_profile(path)
    if kind != "u":
        raise ValueError(f"{path}: expected kind=u, got kind={kind}")
    return RadialProfile(r_nodes=r, values=vals, params=params)


def write_manifest(path, entries: dict) -> None:
    with open(path, "w", newline="\n") as fh:
        for key, val in entries.items():
            fh.write(f"{key}={val}\n")


def append_manifest(path, entries: dict) -> None:
    with open(path, "a", newline="\n") as fh:
        for key, val in entries.items():
            fh.write(f"{key}={val}\n")


def read_manifest(path) -> dict:
    out = {}
    with open(path, "r") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            if "=" not in stripped:
                raise ValueError(
                    f"{path}:{lineno}: expected key=value, got {stripped!r}")
            key, _, val = stripped.partition("=")
            out[key.strip()] = val.strip()
    return out


def write_diagnostics(path, diagnostics: dict) -> None:
    keys = list(diagnostics.keys())
    cols = [np.asarray(diagnostics[k]) for k in keys]
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(keys) + "\n")
        for i in range(len(cols[0])):
            fh.write(",".join(repr(float(c[i])) for c in cols) + "\n")


def read_diagnostics(path) -> dict:
    with open(path, "r") as fh:
        lines = fh.readlines()
    if not lines:
        raise ValueError(f"{path}:1: empty file")
    keys = [k.strip() for k in lines[0].strip().split(",")]
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        stripped = line.strip()
        if not stripped:
            continue
        parts = stripped.split(",")
        if len(parts) != len(keys):
            raise ValueError(
                f"{path}:{lineno}: expected {len(keys)} columns, "
                f"got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ValueError(
                f"{path}:{lineno}: could not parse floats from "
                f"{stripped!r}") from None
    data = np.array(rows) if rows else np.empty((0, len(keys)))
    return {k: data[:, i] for i, k in enumerate(keys)}


def write_moment_series(path, times, values, lower_values=None) -> None:
    times = np.asarray(times)
    values = np.asarray(values)
    with open(path, "w", newline="\n") as fh:
        if lower_values is None:
            fh.write("t,y\n")
            for t, y in zip(times, values):
                fh.write(f"{float(t)!r},{float(y)!r}\n")
        else:
            fh.write("t,y,lower_ode_y\n")
            for t, y, z in zip(times, values, np.asarray(lower_values)):
                fh.write(f"{float(t)!r},{float(y)!r},{float(z)!r}\n")


def snapshot_filename(index: int) -> str:
    return f"snap_{index:06d}.csv"


def snapshot_dir(run_dir) -> str:
    return os.path.join(run_dir, "snapshots")
