"""Labeled training matrices and their precomputed ridge projectors.

A dictionary holds training columns grouped into contiguous class blocks,
each column scaled to unit norm (optionally centered by the per-row mean
first). Classification codes an observation over the whole matrix with the
ridge projector (G + lambda I)^-1 A^T, which is computed once per dictionary
with a symmetric positive-definite solve and reused for every observation.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.linalg import cho_factor, cho_solve, eigh

from .errors import (
    DimensionMismatch,
    EmptyClass,
    ModelFormatError,
    RaggedColumns,
    SingularGram,
    ZeroColumn,
)

FORMAT_VERSION = 1


def default_lambda(m: int, n: int) -> float:
    """Regularization weight used when none is given: 1e-3 * n / m."""
    return 1e-3 * n / m


@dataclass
class Dictionary:
    """Unit-norm training columns with contiguous class blocks.

    ``blocks`` maps class label -> (start, stop) column range; ``column_norms``
    are the norms divided out at build time; ``center`` is the per-row mean
    subtracted before normalization (None when centering is off).
    """

    A: np.ndarray
    labels: list[str]
    blocks: dict[str, tuple[int, int]]
    column_norms: np.ndarray
    center: np.ndarray | None
    lam: float
    _gram_spectral_norm: float | None = field(default=None, repr=False)

    @property
    def shape(self) -> tuple[int, int]:
        return self.A.shape

    @property
    def classes(self) -> list[str]:
        return list(self.blocks.keys())

    def block_columns(self, label: str) -> np.ndarray:
        start, stop = self.blocks[label]
        return self.A[:, start:stop]

    def gram_spectral_norm(self) -> float:
        """Largest eigenvalue of A^T A (cached); step size bound for solvers."""
        if self._gram_spectral_norm is None:
            s = np.linalg.svd(self.A, compute_uv=False)
            self._gram_spectral_norm = float(s[0] ** 2)
        return self._gram_spectral_norm


@dataclass(frozen=True)
class Projector:
    """Precomputed ridge operator (A^T A + lambda I)^-1 A^T."""

    P: np.ndarray
    lam: float

    @property
    def shape(self) -> tuple[int, int]:
        return self.P.shape


def build_dictionary(
    columns: Sequence[np.ndarray] | np.ndarray,
    labels: Sequence[str],
    lam: float | None = None,
    center: bool = False,
    classes: Sequence[str] | None = None,
) -> Dictionary:
    """Assemble a dictionary from training columns.

    Columns are grouped stably by label (first-occurrence class order, input
    order within a class), optionally centered by the per-row mean, then
    scaled to unit norm. The original norms are retained for diagnostics.
    """
    if isinstance(columns, np.ndarray) and columns.ndim == 2:
        cols = [columns[:, j] for j in range(columns.shape[1])]
    else:
        cols = [np.asarray(c, dtype=float).reshape(-1) for c in columns]
    if len(cols) == 0:
        raise EmptyClass("no training columns")
    if len(cols) != len(labels):
        raise RaggedColumns(f"{len(cols)} columns vs {len(labels)} labels")
    m = cols[0].size
    if any(c.size != m for c in cols):
        raise RaggedColumns("columns have differing lengths")

    label_list = [str(lab) for lab in labels]
    order: list[str] = []
    for lab in label_list:
        if lab not in order:
            order.append(lab)
    if classes is not None:
        declared = [str(c) for c in classes]
        missing = [c for c in declared if c not in order]
        if missing:
            raise EmptyClass(f"declared class(es) with no columns: {missing}")
        order = declared + [c for c in order if c not in declared]

    A = np.empty((m, len(cols)))
    out_labels: list[str] = []
    blocks: dict[str, tuple[int, int]] = {}
    j = 0
    for lab in order:
        start = j
        for c, l in zip(cols, label_list):
            if l == lab:
                A[:, j] = c
                out_labels.append(lab)
                j += 1
        blocks[lab] = (start, j)

    center_vec = None
    if center:
        center_vec = A.mean(axis=1)
        A = A - center_vec[:, None]

    norms = np.linalg.norm(A, axis=0)
    if np.any(norms < 1e-12):
        bad = int(np.argmin(norms))
        raise ZeroColumn(
            f"column {bad} (class {out_labels[bad]}) has norm {norms[bad]:.3e}"
        )
    A = A / norms[None, :]

    if lam is None:
        lam = default_lambda(m, len(cols))
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    return Dictionary(
        A=A,
        labels=out_labels,
        blocks=blocks,
        column_norms=norms,
        center=center_vec,
        lam=float(lam),
    )


def precompute_projection(d: Dictionary) -> Projector:
    """The ridge operator, via a Cholesky solve of the regularized Gram.

    Requires the smallest eigenvalue of A^T A + lambda I to exceed 1e-12;
    a rank-deficient dictionary at lambda = 0 raises SingularGram.
    """
    gram = d.A.T @ d.A
    n = gram.shape[0]
    shifted = gram + d.lam * np.eye(n)
    smallest = eigh(shifted, eigvals_only=True, subset_by_index=[0, 0])[0]
    if smallest <= 1e-12:
        raise SingularGram(
            f"smallest Gram eigenvalue {smallest:.3e} at lambda={d.lam:g}"
        )
    factor = cho_factor(shifted, lower=True)
    P = cho_solve(factor, d.A.T)
    return Projector(P=P, lam=d.lam)


def apply_center(d: Dictionary, y: np.ndarray) -> np.ndarray:
    """Subtract the stored center from an observation (identity if disabled)."""
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.size != d.A.shape[0]:
        raise DimensionMismatch(f"observation length {y.size} != rows {d.A.shape[0]}")
    if d.center is None:
        return y
    return y - d.center


# --- persistence --------------------------------------------------------------
#
# A dictionary directory holds a JSON manifest plus raw matrices as
# little-endian float64 in column-major order, one file per matrix.


def _write_matrix(path: Path, mat: np.ndarray) -> None:
    path.write_bytes(np.asfortranarray(mat, dtype="<f8").tobytes(order="F"))


def _read_matrix(path: Path, shape: tuple[int, int]) -> np.ndarray:
    data = np.frombuffer(path.read_bytes(), dtype="<f8")
    if data.size != shape[0] * shape[1]:
        raise ModelFormatError(
            f"{path}: expected {shape[0] * shape[1]} values, got {data.size}"
        )
    return data.reshape(shape, order="F").copy()


def save_dictionary(dirpath: str | Path, d: Dictionary, p: Projector) -> None:
    dirpath = Path(dirpath)
    dirpath.mkdir(parents=True, exist_ok=True)
    m, n = d.A.shape
    manifest = {
        "format_version": FORMAT_VERSION,
        "rows": m,
        "cols": n,
        "lambda": d.lam,
        "centered": d.center is not None,
        "labels": d.labels,
        "blocks": {k: list(v) for k, v in d.blocks.items()},
    }
    (dirpath / "manifest.json").write_text(json.dumps(manifest, indent=1))
    _write_matrix(dirpath / "A.mat", d.A)
    _write_matrix(dirpath / "P.mat", p.P)
    _write_matrix(dirpath / "norms.mat", d.column_norms.reshape(1, -1))
    if d.center is not None:
        _write_matrix(dirpath / "center.mat", d.center.reshape(-1, 1))


def load_dictionary(dirpath: str | Path, rng: np.random.Generator | None = None):
    """Load a dictionary directory, validating dims and one projector row.

    The checksum recomputes a randomly chosen row of the projector from A and
    lambda and compares against the stored row; corruption of either matrix
    fails the load.

    Returns ``(Dictionary, Projector)``.
    """
    dirpath = Path(dirpath)
    manifest = json.loads((dirpath / "manifest.json").read_text())
    if manifest.get("format_version") != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version in {dirpath}")
    m, n = int(manifest["rows"]), int(manifest["cols"])
    lam = float(manifest["lambda"])
    A = _read_matrix(dirpath / "A.mat", (m, n))
    P = _read_matrix(dirpath / "P.mat", (n, m))
    norms = _read_matrix(dirpath / "norms.mat", (1, n)).reshape(-1)
    center = None
    if manifest.get("centered"):
        center = _read_matrix(dirpath / "center.mat", (m, 1)).reshape(-1)
    labels = [str(x) for x in manifest["labels"]]
    if len(labels) != n:
        raise ModelFormatError(f"{dirpath}: label count {len(labels)} != cols {n}")
    blocks = {str(k): (int(v[0]), int(v[1])) for k, v in manifest["blocks"].items()}

    rng = rng or np.random.default_rng()
    row = int(rng.integers(n))
    # row i of P solves (A^T A + lam I) z = e_i, then the row is (A z)^T
    gram = A.T @ A + lam * np.eye(n)
    e = np.zeros(n)
    e[row] = 1.0
    z = np.linalg.solve(gram, e)
    expected = A @ z
    if not np.allclose(expected, P[row], rtol=1e-6, atol=1e-8):
        raise ModelFormatError(
            f"{dirpath}: projector row {row} failed checksum validation"
        )

    d = Dictionary(
        A=A, labels=labels, blocks=blocks, column_norms=norms, center=center, lam=lam
    )
    return d, Projector(P=P, lam=lam)
