"""CSV and manifest serialization.

All numeric output uses ``repr`` (shortest round-trip) so reruns with the
same seed are byte-identical.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .core import DataMatrix, symmetrize
from .exceptions import DataFormatError


def _fmt(x) -> str:
    return repr(float(x))


def read_data_csv(path) -> DataMatrix:
    """Header row of variable names, one observation per row, no missing values."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            names = next(reader)
        except StopIteration:
            raise DataFormatError(f"{path}: empty file") from None
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(names):
                raise DataFormatError(
                    f"{path}: row {lineno} has {len(row)} fields, expected {len(names)}"
                )
            try:
                rows.append([float(v) for v in row])
            except ValueError as exc:
                raise DataFormatError(f"{path}: row {lineno}: {exc}") from None
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return DataMatrix(np.array(rows), tuple(names))


def write_data_csv(path, data: DataMatrix) -> None:
    _write_matrix(path, data.values, data.names)


def _write_matrix(path, m, header) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in np.asarray(m):
            writer.writerow([_fmt(v) for v in row])


def write_matrix_csv(path, m: np.ndarray, names=None) -> None:
    p = m.shape[1]
    names = names or [f"x{j + 1}" for j in range(p)]
    _write_matrix(path, m, names)


def read_matrix_csv(path, symmetric: bool = False) -> tuple[np.ndarray, tuple[str, ...]]:
    data = read_data_csv(path)
    m = np.array(data.values)
    if symmetric:
        if m.shape[0] != m.shape[1]:
            raise DataFormatError(f"{path}: expected a square matrix, got {m.shape}")
        m = symmetrize(m)  # file round-trips introduce last-digit asymmetry
    return m, data.names


def write_edges_csv(path, edges, names=None, pcor=None, omega=None) -> None:
    """Edge list with 1-based node indices, sorted for determinism."""
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        header = ["i", "j"]
        if names is not None:
            header += ["name_i", "name_j"]
        if pcor is not None:
            header += ["pcor", "omega"]
        writer.writerow(header)
        for i, j in sorted(edges):
            row = [i + 1, j + 1]
            if names is not None:
                row += [names[i], names[j]]
            if pcor is not None:
                row += [_fmt(pcor[i, j]), _fmt(omega[i, j])]
            writer.writerow(row)


def read_edges_csv(path) -> frozenset:
    path = Path(path)
    edges = set()
    with path.open(newline="") as fh:
        reader = csv.DictReader(fh)
        for lineno, row in enumerate(reader, start=2):
            try:
                i, j = int(row["i"]) - 1, int(row["j"]) - 1
            except (KeyError, ValueError, TypeError) as exc:
                raise DataFormatError(f"{path}: row {lineno}: {exc}") from None
            edges.add((min(i, j), max(i, j)))
    return frozenset(edges)


def write_manifest(path, manifest: dict) -> None:
    with Path(path).open("w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
        fh.write("\n")


def read_manifest(path) -> dict:
    with Path(path).open() as fh:
        return json.load(fh)


def write_selection_path_csv(path, selection) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["size", "variable", "loss", "u_hat", "se", "chosen"])
        for k in range(len(selection.loss_by_size)):
            var = "" if k == 0 else selection.order[k - 1] + 1
            writer.writerow(
                [
                    k,
                    var,
                    _fmt(selection.loss_by_size[k]),
                    _fmt(selection.u_hat[k]),
                    _fmt(selection.se[k]),
                    int(k == selection.chosen_size),
                ]
            )


def write_khat_csv(path, paths) -> None:
    with Path(path).open("w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node", "observation", "khat"])
        for sel in paths:
            for i, k in enumerate(sel.psis_khat):
                writer.writerow([sel.node + 1, i + 1, _fmt(k)])


def parse_grid_file(path) -> dict:
    """Flat ``key = value`` lines; repeated keys accumulate into lists."""
    out: dict[str, list[str]] = {}
    path = Path(path)
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{path}: line {lineno}: expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        out.setdefault(key, []).append(value)
    return out
