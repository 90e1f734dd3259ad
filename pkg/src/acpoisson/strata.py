"""Rank stratification and deterministic chart sampling.

Halton sampling uses the radical-inverse sequences in bases 2, 3, 5, 7, 11
(one base per chart variable) with an index offset acting as the seed, so a
given (box, n, seed) always reproduces the same points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import triple as tr
from .errors import EmptyBox

HALTON_BASES = (2, 3, 5, 7, 11)
LABELS = ("rank0", "rank2_vertical", "rank2_horizontal", "rank4", "near_boundary")


def _radical_inverse(indices, base):
    out = np.zeros(indices.shape, dtype=float)
    f = 1.0 / base
    i = indices.astype(np.int64).copy()
    while np.any(i > 0):
        out += f * (i % base)
        i //= base
        f /= base
    return out


def halton_points(n, box, seed=0):
    """n Halton points in the box (list of 5 (lo, hi) pairs)."""
    _validate_box(box)
    if n <= 0:
        raise EmptyBox("sample count must be positive")
    idx = np.arange(seed + 1, seed + n + 1)
    pts = np.zeros((5, n))
    for k, base in enumerate(HALTON_BASES):
        lo, hi = box[k]
        pts[k] = lo + (hi - lo) * _radical_inverse(idx, base)
    return pts


def grid_points(resolution, box):
    """Tensor grid with `resolution` points per axis."""
    _validate_box(box)
    if resolution <= 0:
        raise EmptyBox("grid resolution must be positive")
    axes = [np.linspace(lo, hi, resolution) for lo, hi in box]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh])


def _validate_box(box):
    if len(box) != 5:
        raise EmptyBox("a sampling box needs 5 intervals")
    for lo, hi in box:
        if not (np.isfinite(lo) and np.isfinite(hi)) or hi < lo:
            raise EmptyBox(f"invalid interval [{lo}, {hi}]")


@dataclass
class SampleSet:
    points: np.ndarray  # (5, n)
    generator: str
    box: list
    seed: int = 0
    resolution: int | None = None

    @property
    def n(self):
        return self.points.shape[1]


def sample_box(box, generator="halton", n=None, resolution=None, seed=0) -> SampleSet:
    if generator == "halton":
        pts = halton_points(n or 200, box, seed)
        return SampleSet(pts, "halton", list(box), seed=seed)
    if generator == "grid":
        pts = grid_points(resolution or 3, box)
        return SampleSet(pts, "grid", list(box), resolution=resolution or 3)
    raise ValueError(f"unknown generator '{generator}'")


def matrix_rank(mats, threshold=1e-9):
    """Even rank of antisymmetric 5x5 matrices via singular values.

    ``mats`` has shape (..., 5, 5); the cut is relative to the largest
    singular value of each matrix (a zero matrix has rank 0).
    """
    svals = np.linalg.svd(mats, compute_uv=False)
    top = svals[..., :1]
    cut = threshold * np.where(top > 0, top, 1.0)
    return np.sum(svals > cut, axis=-1)


def pi_matrix_values(triple: tr.PoissonTriple, pts):
    """Assembled bivector as stacked antisymmetric matrices, shape (n, 5, 5)."""
    from .calculus import matrix_values

    vals = matrix_values(triple.pi_matrix(), pts, order=0)
    return np.moveaxis(vals, (0, 1), (-2, -1))


@dataclass
class Stratum:
    label: str
    kappa: float
    beta_norm: float
    rank: int


def classify_point(triple: tr.PoissonTriple, p, kappa_tol=None, beta_tol=1e-9) -> Stratum:
    """Classify one point by the zero sets of kappa and beta."""
    label, kv, bn, rank = _classify(triple, np.asarray(p, float).reshape(5, 1), kappa_tol, beta_tol)
    return Stratum(label[0], float(kv[0]), float(bn[0]), int(rank[0]))


def _classify(triple, pts, kappa_tol=None, beta_tol=1e-9):
    kv = np.atleast_1d(triple.kappa_values(pts))
    bn = np.atleast_1d(triple.beta.norm_values(pts))
    if kappa_tol is None:
        kappa_tol = triple.kappa_tol(pts)
    rank = matrix_rank(pi_matrix_values(triple, pts))
    labels = np.where(
        np.abs(kv) > kappa_tol,
        np.where(bn > beta_tol, "rank4", "rank2_horizontal"),
        np.where(bn > beta_tol, "rank2_vertical", "rank0"),
    ).astype(object)
    near = (np.abs(kv) > kappa_tol) & (np.abs(kv) <= 10 * kappa_tol)
    labels[near] = "near_boundary"
    return labels, kv, bn, rank


_EXPECTED_RANK = {"rank0": 0, "rank2_vertical": 2, "rank2_horizontal": 2, "rank4": 4}


def strata_report(triple: tr.PoissonTriple, samples: SampleSet, kappa_tol=None, beta_tol=1e-9):
    """Rows (point, kappa, |beta|, rank, label, ic residuals) plus summary counts.

    Points whose formula label disagrees with the SVD rank are flagged; away
    from the tolerance bands the flag list must stay empty.
    """
    pts = samples.points
    labels, kv, bn, rank = _classify(triple, pts, kappa_tol, beta_tol)
    ic = tr.ic_residuals(triple, pts)
    ic1 = np.atleast_1d(ic["ic1"])
    ic2 = np.atleast_1d(ic["ic2"].max(axis=(0, 1)))
    ic3 = np.atleast_1d(ic["ic3"].max(axis=0))
    rows = []
    flags = []
    counts = {}
    for k in range(samples.n):
        label = labels[k]
        counts[label] = counts.get(label, 0) + 1
        rows.append(
            {
                "point": pts[:, k].tolist(),
                "kappa": float(kv[k]),
                "beta_norm": float(bn[k]),
                "rank": int(rank[k]),
                "label": label,
                "ic1": float(ic1[k]),
                "ic2": float(ic2[k]),
                "ic3": float(ic3[k]),
            }
        )
        if label != "near_boundary" and _EXPECTED_RANK[label] != int(rank[k]):
            flags.append(rows[-1])
    return {"rows": rows, "counts": counts, "rank_disagreements": flags}


def rows_to_csv(rows, path):
    import csv

    fieldnames = ["x1", "x2", "y1", "y2", "y3", "kappa", "beta_norm", "rank", "label", "ic1", "ic2", "ic3"]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow(
                [repr(v) for v in row["point"]]
                + [repr(row["kappa"]), repr(row["beta_norm"]), row["rank"], row["label"]]
                + [repr(row["ic1"]), repr(row["ic2"]), repr(row["ic3"])]
            )
