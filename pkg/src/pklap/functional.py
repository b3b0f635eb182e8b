"""The action functional whose critical points solve the difference system.

For an m-periodic sequence u the action splits as

    action(u) = mu(u) + lam * potential(u)

where mu is the anisotropic Dirichlet part sum_k (1/p(k)) |Delta u(k)|^p(k)
and potential(u) = -sum_k F(k, u(k+1), u(k)).  The Euclidean gradient of the
action is the negated residual of the difference system, so solving the
system and finding critical points are the same task.
"""

from __future__ import annotations

import dataclasses
import math
import warnings

import numpy as np

from .core import EvaluationError, PeriodicSequence, Problem, euclidean_norm
from .operators import residual_values

HESSIAN_STEP_SCALE = 1e-5
MORSE_ZERO_TOL_SCALE = 1e-7

CLASS_MINIMUM = "minimum"
CLASS_MAXIMUM = "maximum"
CLASS_SADDLE = "saddle"
CLASS_DEGENERATE = "degenerate"


class NonsmoothExponentError(ValueError):
    """Raised when a derivative is requested but some p(k) <= 1 makes it undefined."""


def mu(u: PeriodicSequence, prob: Problem) -> float:
    """Anisotropic Dirichlet energy sum_k (1/p(k)) |Delta u(k)|^p(k)."""
    vals = u.values
    d = np.roll(vals, -1, axis=0) - vals
    norms = np.linalg.norm(d, axis=1)
    p = prob.exponent.values
    total = float(np.sum(norms**p / p))
    if not math.isfinite(total):
        raise EvaluationError("mu evaluated to a non-finite value")
    return total


def potential(u: PeriodicSequence, prob: Problem) -> float:
    """Potential part -sum_k F(k, u(k+1), u(k))."""
    vals = u.values
    up = np.roll(vals, -1, axis=0)
    total = 0.0
    for k in range(1, prob.m + 1):
        total -= prob.nonlinearity.F_at(k, up[k - 1], vals[k - 1])
    if not math.isfinite(total):
        raise EvaluationError("potential evaluated to a non-finite value")
    return total


def action(u: PeriodicSequence, prob: Problem) -> float:
    """Value of the action functional mu(u) + lam * potential(u)."""
    return mu(u, prob) + prob.lam * potential(u, prob)


def gradient(u: PeriodicSequence, prob: Problem) -> PeriodicSequence:
    """Euclidean gradient of the action; equals the negated residual.

    Defined for exponents p(k) > 1.  At p(k) = 1 the Dirichlet term is not
    differentiable where the forward difference vanishes.
    """
    if prob.exponent.p_minus <= 1.0:
        raise NonsmoothExponentError(
            "gradient requires every p(k) > 1; got p_minus = "
            f"{prob.exponent.p_minus}"
        )
    return PeriodicSequence(-residual_values(u, prob))


def gradient_fd(u: PeriodicSequence, prob: Problem, step: float | None = None) -> PeriodicSequence:
    """Central finite-difference gradient of the action (verification oracle)."""
    if step is None:
        # smaller than the usual cbrt(eps) scale: oscillatory potentials
        # (sin of a quartic) have third derivatives far above |J| and the
        # truncation term dominates long before roundoff matters
        step = 1e-7 * max(1.0, euclidean_norm(u))
    x = u.flat()
    g = np.zeros_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        g[i] = (
            action(PeriodicSequence.from_flat(xp, prob.m, prob.n), prob)
            - action(PeriodicSequence.from_flat(xm, prob.m, prob.n), prob)
        ) / (2.0 * step)
    return PeriodicSequence.from_flat(g, prob.m, prob.n)


def hessian_fd(u: PeriodicSequence, prob: Problem, step: float | None = None) -> np.ndarray:
    """Symmetrised central finite-difference Hessian of the action.

    Columns are finite differences of the analytic gradient; the result is
    symmetrised and a warning is emitted if the raw asymmetry is large
    relative to the matrix norm, or if some p(k) < 2 (where second
    derivatives may not exist at non-smooth points).
    """
    if prob.exponent.p_minus < 2.0:
        warnings.warn(
            "hessian_fd with p_minus < 2: second derivatives can be singular "
            "where forward differences vanish",
            RuntimeWarning,
            stacklevel=2,
        )
    if step is None:
        step = HESSIAN_STEP_SCALE * max(1.0, euclidean_norm(u))
    x = u.flat()
    dim = x.size
    h = np.zeros((dim, dim))
    for i in range(dim):
        xp = x.copy()
        xm = x.copy()
        xp[i] += step
        xm[i] -= step
        gp = gradient(PeriodicSequence.from_flat(xp, prob.m, prob.n), prob).values.reshape(-1)
        gm = gradient(PeriodicSequence.from_flat(xm, prob.m, prob.n), prob).values.reshape(-1)
        h[:, i] = (gp - gm) / (2.0 * step)
    asym = float(np.max(np.abs(h - h.T)))
    scale = max(1.0, float(np.max(np.abs(h))))
    if asym > 1e-4 * scale:
        warnings.warn(
            f"finite-difference Hessian asymmetry {asym:.3e} exceeds 1e-4 of its scale",
            RuntimeWarning,
            stacklevel=2,
        )
    return 0.5 * (h + h.T)


@dataclasses.dataclass(frozen=True)
class SpectralSummary:
    """Eigenvalue signature of the Hessian at a candidate critical point."""

    eigenvalues: np.ndarray
    negative_count: int
    zero_count: int
    positive_count: int
    zero_tol: float

    @property
    def morse_index(self) -> int:
        return self.negative_count

    @property
    def classification(self) -> str:
        if self.zero_count > 0:
            return CLASS_DEGENERATE
        if self.negative_count == 0:
            return CLASS_MINIMUM
        if self.positive_count == 0:
            return CLASS_MAXIMUM
        return CLASS_SADDLE


def morse_summary(
    u: PeriodicSequence, prob: Problem, zero_tol: float | None = None
) -> SpectralSummary:
    """Classify a candidate critical point by the Hessian eigenvalue signs.

    Eigenvalues within zero_tol of zero count as zero; the default tolerance
    scales with the spectral radius.
    """
    h = hessian_fd(u, prob)
    eig = np.linalg.eigvalsh(h)
    if zero_tol is None:
        radius = float(np.max(np.abs(eig))) if eig.size else 0.0
        zero_tol = MORSE_ZERO_TOL_SCALE * max(1.0, radius)
    neg = int(np.sum(eig < -zero_tol))
    zero = int(np.sum(np.abs(eig) <= zero_tol))
    pos = int(np.sum(eig > zero_tol))
    return SpectralSummary(
        eigenvalues=eig,
        negative_count=neg,
        zero_count=zero,
        positive_count=pos,
        zero_tol=float(zero_tol),
    )
