"""Verification report containers, JSON-friendly and deterministic."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class CheckBlock:
    check_id: str
    max_residual: float
    mean_residual: float
    tol: float
    passed: bool
    worst_point: list | None = None
    n_samples: int = 0
    note: str = ""

    def to_dict(self):
        return {
            "check": self.check_id,
            "max_residual": self.max_residual,
            "mean_residual": self.mean_residual,
            "tol": self.tol,
            "verdict": "pass" if self.passed else "fail",
            "worst_point": self.worst_point,
            "n_samples": self.n_samples,
            "note": self.note,
        }


@dataclass
class VerificationReport:
    name: str
    blocks: list = field(default_factory=list)
    disagreements: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def add(self, block: CheckBlock):
        self.blocks.append(block)
        return block

    @property
    def passed(self):
        return all(b.passed for b in self.blocks) and not self.disagreements

    def block(self, check_id):
        for b in self.blocks:
            if b.check_id == check_id:
                return b
        raise KeyError(check_id)

    def to_dict(self):
        return {
            "name": self.name,
            "verdict": "pass" if self.passed else "fail",
            "checks": [b.to_dict() for b in self.blocks],
            "disagreements": self.disagreements,
            **({"meta": self.meta} if self.meta else {}),
        }


def residual_block(check_id, residuals, points, tol, note="") -> CheckBlock:
    """Summarize a per-point residual array into a check block."""
    residuals = np.atleast_1d(np.asarray(residuals, dtype=float))
    worst = int(np.argmax(residuals))
    pts = np.asarray(points)
    worst_point = pts[:, worst].tolist() if pts.ndim == 2 and pts.shape[1] == residuals.size else None
    return CheckBlock(
        check_id=check_id,
        max_residual=float(residuals.max()) if residuals.size else 0.0,
        mean_residual=float(residuals.mean()) if residuals.size else 0.0,
        tol=float(tol),
        passed=bool(residuals.size == 0 or residuals.max() <= tol),
        worst_point=worst_point,
        n_samples=int(residuals.size),
        note=note,
    )
