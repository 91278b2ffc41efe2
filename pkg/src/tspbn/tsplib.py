"""TSPLIB interop for external ATSP solvers such as LKH.

The depot is TSPLIB node 1 and variable ``i`` is node ``i + 2``. Costs are
shifted so the smallest finite entry becomes 0, scaled so the largest is at
most ``max_value`` and rounded to the nearest integer (half to even). The
diagonal is written as ``DIAGONAL`` and never used by a tour.
"""

from __future__ import annotations

import os
import subprocess
from pathlib import Path

import numpy as np

DIAGONAL = 10**8
MAX_VALUE = 10**7


class TourFormatError(ValueError):
    pass


class SolverError(RuntimeError):
    pass


def rescale_matrix(matrix: np.ndarray, max_value: int = MAX_VALUE):
    """Integer version of a cost matrix; returns ``(ints, shift, scale)``.

    ``ints = rint((matrix - shift) * scale)`` off the diagonal.
    """
    c = np.asarray(matrix, dtype=float)
    off = ~np.eye(c.shape[0], dtype=bool)
    vals = c[off]
    if not np.all(np.isfinite(vals)):
        raise ValueError("off-diagonal costs must be finite")
    shift = float(vals.min()) if vals.size else 0.0
    span = float(vals.max()) - shift if vals.size else 0.0
    scale = max_value / span if span > 0 else 1.0
    ints = np.full(c.shape, DIAGONAL, dtype=np.int64)
    ints[off] = np.rint((vals - shift) * scale).astype(np.int64)
    return ints, shift, scale


def export_tsplib(matrix: np.ndarray, path, name: str = "hdtsp", max_value: int = MAX_VALUE):
    ints, shift, scale = rescale_matrix(matrix, max_value)
    dim = ints.shape[0]
    lines = [
        f"NAME: {name}",
        "TYPE: ATSP",
        f"COMMENT: depot is node 1; cost = (c - {shift!r}) * {scale!r}",
        f"DIMENSION: {dim}",
        "EDGE_WEIGHT_TYPE: EXPLICIT",
        "EDGE_WEIGHT_FORMAT: FULL_MATRIX",
        "EDGE_WEIGHT_SECTION",
    ]
    lines += [" ".join(str(v) for v in row) for row in ints.tolist()]
    lines.append("EOF")
    Path(path).write_text("\n".join(lines) + "\n")
    return ints


def read_tsplib_matrix(path) -> np.ndarray:
    """Parse an explicit FULL_MATRIX problem file (the subset we write)."""
    header, weights, in_section = {}, [], False
    for line in Path(path).read_text().splitlines():
        s = line.strip()
        if not s:
            continue
        if s == "EOF":
            break
        if s == "EDGE_WEIGHT_SECTION":
            in_section = True
        elif in_section:
            weights.extend(int(t) for t in s.split())
        else:
            key, _, value = s.partition(":")
            header[key.strip()] = value.strip()
    if header.get("EDGE_WEIGHT_FORMAT") != "FULL_MATRIX":
        raise TourFormatError(f"{path}: only FULL_MATRIX weights are supported")
    dim = int(header["DIMENSION"])
    if len(weights) != dim * dim:
        raise TourFormatError(f"{path}: expected {dim * dim} weights, found {len(weights)}")
    return np.array(weights, dtype=np.int64).reshape(dim, dim)


def write_tour(ordering, path, name: str = "hdtsp"):
    nodes = [1] + [v + 2 for v in ordering]
    lines = [f"NAME: {name}", "TYPE: TOUR", f"DIMENSION: {len(nodes)}", "TOUR_SECTION"]
    lines += [str(v) for v in nodes] + ["-1", "EOF"]
    Path(path).write_text("\n".join(lines) + "\n")


def import_tour(path, n: int) -> tuple[int, ...]:
    """Read a TSPLIB TOUR file over ``n`` variables plus the depot."""
    nodes, dim, in_section = [], None, False
    for line in Path(path).read_text().splitlines():
        s = line.strip()
        if s == "EOF":
            break
        if not s:
            continue
        if in_section:
            for tok in s.split():
                v = int(tok)
                if v == -1:
                    in_section = False
                    break
                nodes.append(v)
        elif s == "TOUR_SECTION":
            in_section = True
        elif ":" in s:
            key, _, value = s.partition(":")
            if key.strip() == "DIMENSION":
                dim = int(value)
    if not nodes:
        raise TourFormatError(f"{path}: no TOUR_SECTION entries")
    if dim is not None and dim != n + 1:
        raise TourFormatError(f"{path}: dimension {dim} does not match {n} variables plus depot")
    if sorted(nodes) != list(range(1, n + 2)):
        raise TourFormatError(f"{path}: tour is not a permutation of nodes 1..{n + 1}")
    at = nodes.index(1)
    rotated = nodes[at + 1:] + nodes[:at]
    return tuple(v - 2 for v in rotated)


def run_lkh(matrix: np.ndarray, lkh_path, workdir, seed: int = 1, runs: int = 1, timeout: float | None = None):
    """Solve the static ATSP with an external LKH binary and return the ordering."""
    workdir = Path(workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    problem, tour, par = workdir / "static.atsp", workdir / "static.tour", workdir / "static.par"
    export_tsplib(matrix, problem)
    par.write_text(f"PROBLEM_FILE = {problem}\nTOUR_FILE = {tour}\nRUNS = {runs}\nSEED = {seed}\n")
    if tour.exists():
        tour.unlink()
    try:
        proc = subprocess.run([os.fspath(lkh_path), os.fspath(par)], capture_output=True, text=True,
                              timeout=timeout)
    except OSError as exc:
        raise SolverError(f"cannot run LKH at {lkh_path}: {exc}") from exc
    if proc.returncode != 0:
        raise SolverError(f"LKH exited with status {proc.returncode}: {proc.stderr.strip()[-500:]}")
    if not tour.exists():
        raise SolverError("LKH finished without writing a tour file")
    return import_tour(tour, matrix.shape[0] - 1)
