"""Spectral constants of X'X that drive the convergence guarantees."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data import StandardizedProblem
from .errors import DegenerateMatrixError, EpsilonOutOfRangeError


@dataclass(frozen=True)
class SpectralSummary:
    """Eigen-summary of X'X.

    ``eigvals``/``eigvecs`` hold the decomposition of the smaller Gram
    matrix (``side`` is "p" for X'X and "n" for XX'), kept so the least
    squares oracle can reuse the factorization.
    """

    lambda_pmin: float
    lambda_max: float
    lambda_min: float
    kappa: float
    kappa_bar: float
    rank: int
    zero_threshold: float
    n: int
    p: int
    side: str = "p"
    eigvals: np.ndarray = field(default=None, repr=False)
    eigvecs: np.ndarray = field(default=None, repr=False)

    def nonzero(self):
        """Indices (into eigvals) of the eigenvalues declared nonzero."""
        return np.flatnonzero(self.eigvals > self.zero_threshold)


def analyze(problem):
    if not isinstance(problem, StandardizedProblem):
        raise TypeError("analyze expects a StandardizedProblem")
    X = problem.X
    n, p = X.shape
    side = "p" if p <= n else "n"
    gram = X.T @ X if side == "p" else X @ X.T
    gram = 0.5 * (gram + gram.T)
    vals, vecs = np.linalg.eigh(gram)
    lam_max = float(vals[-1])
    threshold = max(n, p) * np.finfo(float).eps * max(lam_max, 0.0)
    above = vals > threshold
    rank = int(np.count_nonzero(above))
    if rank == 0:
        raise DegenerateMatrixError("every eigenvalue of X'X is numerically zero")
    lam_pmin = float(vals[above][0])
    # X'X is p x p; when p > n or rank < p it has a zero eigenvalue
    lam_min = float(vals[0]) if rank == p else 0.0
    kappa_bar = lam_max / lam_min if lam_min > 0 else math.inf
    vals.setflags(write=False)
    vecs.setflags(write=False)
    return SpectralSummary(
        lambda_pmin=lam_pmin,
        lambda_max=lam_max,
        lambda_min=lam_min,
        kappa=p / lam_pmin,
        kappa_bar=kappa_bar,
        rank=rank,
        zero_threshold=float(threshold),
        n=n,
        p=p,
        side=side,
        eigvals=vals,
        eigvecs=vecs,
    )


def check_epsilon(epsilon):
    if not (0.0 < epsilon <= 1.0):
        raise EpsilonOutOfRangeError(f"learning rate must lie in (0, 1], got {epsilon!r}")


def gamma(summary, epsilon):
    """Linear rate coefficient 1 - eps(2 - eps) lambda_pmin / (4p)."""
    check_epsilon(epsilon)
    return 1.0 - epsilon * (2.0 - epsilon) * summary.lambda_pmin / (4.0 * summary.p)


def random_matrix_floor(n, p, t):
    """High-probability lower bound (sqrt(p) - sqrt(n) - t)^2 / n on lambda_pmin."""
    gap = math.sqrt(p) - math.sqrt(n) - t
    return gap * gap / n if gap > 0 else 0.0
