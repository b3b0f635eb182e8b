"""Domain types for m-periodic vector sequences.

The state space is the set of m-periodic sequences u with values in R^n,
identified with an (m*n)-dimensional Euclidean space.  Sequence entries are
addressed by logical indices k = 1..m; any integer index is accepted and
wrapped periodically.  The space splits orthogonally into the constant
sequences W and the zero-mean sequences Y.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Callable, Optional

import numpy as np

# Tolerances used by construction-time checks.  The zero-at-zero check is
# essentially exact for sane potentials; the assembled-derivative check
# allows for rounding in user-supplied closed forms.
ZERO_AT_ZERO_TOL = 1e-12
ASSEMBLY_TOL = 1e-9
MEAN_TOL = 1e-8


class EvaluationError(RuntimeError):
    """A user-supplied callable produced a non-finite or malformed value."""


def wrap_index(k: int, m: int) -> int:
    """Map an arbitrary integer index to its representative in 1..m."""
    if m < 2:
        raise ValueError(f"period m must be >= 2, got {m}")
    return (int(k) - 1) % m + 1


def _as_values(values) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise ValueError(f"sequence values must be (m,) or (m, n), got shape {arr.shape}")
    if arr.shape[0] < 2:
        raise ValueError(f"period m must be >= 2, got {arr.shape[0]}")
    if arr.shape[1] < 1:
        raise ValueError("component dimension n must be >= 1")
    if not np.all(np.isfinite(arr)):
        raise ValueError("sequence values must be finite")
    return arr


@dataclasses.dataclass(frozen=True)
class PeriodicSequence:
    """An m-periodic sequence of vectors in R^n, stored as an (m, n) array.

    Instances are immutable; the backing array is marked read-only.  A 1-D
    input of length m is promoted to shape (m, 1).
    """

    values: np.ndarray

    def __post_init__(self):
        arr = _as_values(self.values).copy()
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def m(self) -> int:
        return self.values.shape[0]

    @property
    def n(self) -> int:
        return self.values.shape[1]

    @classmethod
    def zeros(cls, m: int, n: int = 1) -> "PeriodicSequence":
        return cls(np.zeros((m, n)))

    @classmethod
    def constant(cls, a, m: int) -> "PeriodicSequence":
        """The constant sequence whose every entry equals the vector a."""
        row = np.atleast_1d(np.asarray(a, dtype=float)).reshape(-1)
        return cls(np.tile(row, (m, 1)))

    @classmethod
    def from_flat(cls, x, m: int, n: int = 1) -> "PeriodicSequence":
        arr = np.asarray(x, dtype=float).reshape(m, n)
        return cls(arr)

    def value(self, k: int) -> np.ndarray:
        """Entry at logical index k (any integer), as a vector of length n."""
        return self.values[wrap_index(k, self.m) - 1]

    def flat(self) -> np.ndarray:
        """A writable flat copy of the values, row-major over k."""
        return self.values.reshape(-1).copy()

    def __add__(self, other: "PeriodicSequence") -> "PeriodicSequence":
        return PeriodicSequence(self.values + other.values)

    def __sub__(self, other: "PeriodicSequence") -> "PeriodicSequence":
        return PeriodicSequence(self.values - other.values)

    def __mul__(self, scalar) -> "PeriodicSequence":
        return PeriodicSequence(self.values * float(scalar))

    __rmul__ = __mul__

    def __neg__(self) -> "PeriodicSequence":
        return PeriodicSequence(-self.values)


def euclidean_norm(u: PeriodicSequence) -> float:
    """Euclidean norm over one period, sqrt(sum_k |u(k)|^2)."""
    return float(np.linalg.norm(u.values))


def project_W(u: PeriodicSequence) -> PeriodicSequence:
    """Orthogonal projection onto the constant sequences."""
    mean = u.values.mean(axis=0)
    return PeriodicSequence(np.tile(mean, (u.m, 1)))


def project_Y(u: PeriodicSequence) -> PeriodicSequence:
    """Orthogonal projection onto the zero-mean sequences."""
    return PeriodicSequence(u.values - u.values.mean(axis=0))


def in_Y(u: PeriodicSequence, tol: float = MEAN_TOL) -> bool:
    """Whether u has (numerically) zero mean, relative to its size."""
    mean_norm = float(np.linalg.norm(u.values.mean(axis=0))) * math.sqrt(u.m)
    return mean_norm <= tol * max(1.0, euclidean_norm(u))


@dataclasses.dataclass(frozen=True)
class ExponentFunction:
    """An m-periodic variable exponent k -> p(k), with every p(k) >= 1."""

    values: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=float).reshape(-1).copy()
        if arr.size < 2:
            raise ValueError("exponent function needs at least m = 2 entries")
        if not np.all(np.isfinite(arr)):
            raise ValueError("exponents must be finite")
        if np.any(arr < 1.0):
            raise ValueError(f"exponents must be >= 1, got min {arr.min()}")
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    @property
    def m(self) -> int:
        return self.values.size

    @property
    def p_minus(self) -> float:
        return float(self.values.min())

    @property
    def p_plus(self) -> float:
        return float(self.values.max())

    @classmethod
    def constant(cls, p: float, m: int) -> "ExponentFunction":
        return cls(np.full(m, float(p)))

    def at(self, k: int) -> float:
        return float(self.values[wrap_index(k, self.m) - 1])


def _scalar(value, what: str) -> float:
    try:
        out = float(np.asarray(value, dtype=float).reshape(()))
    except (TypeError, ValueError) as exc:
        raise EvaluationError(f"{what} did not return a scalar: {value!r}") from exc
    return out


def _vector(value, n: int, what: str) -> np.ndarray:
    arr = np.atleast_1d(np.asarray(value, dtype=float)).reshape(-1)
    if arr.size != n:
        raise EvaluationError(f"{what} returned {arr.size} components, expected {n}")
    return arr


@dataclasses.dataclass(frozen=True)
class Nonlinearity:
    """A discrete potential F(k, u1, u2) together with its partial gradients.

    F maps (k, u1, u2) with u1, u2 in R^n to a real number and is m-periodic
    in k.  F2_prime and F3_prime are the gradients of F with respect to u1
    and u2.  The coupling term entering the difference equation is assembled
    from the two partials of consecutive periods:

        f(k, u1, u2, u3) = F2_prime(k-1, u2, u3) + F3_prime(k, u1, u2)

    An optional closed form f_direct can be attached; it is cross-checked
    against the assembled expression at construction time.

    Construction enforces F(k, 0, 0) = 0 for every k (the potential is
    normalised at the origin).
    """

    m: int
    F: Callable
    F2_prime: Callable
    F3_prime: Callable
    f_direct: Optional[Callable] = None
    n: int = 1
    name: str = ""
    is_zero: bool = False
    even_symmetric: bool = False

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"period m must be >= 2, got {self.m}")
        if self.n < 1:
            raise ValueError(f"component dimension n must be >= 1, got {self.n}")
        zero = np.zeros(self.n)
        for k in range(1, self.m + 1):
            val = _scalar(self.F(k, zero, zero), f"F({k}, 0, 0)")
            if abs(val) > ZERO_AT_ZERO_TOL:
                raise ValueError(
                    f"potential must vanish at the origin: |F({k},0,0)| = {abs(val):.3e}"
                )
        if self.f_direct is not None:
            self._check_assembly()

    def _check_assembly(self, points: int = 100, seed: int = 20240) -> None:
        rng = np.random.default_rng(seed)
        worst = 0.0
        for _ in range(points):
            k = int(rng.integers(-2 * self.m, 2 * self.m + 1))
            u1, u2, u3 = rng.normal(size=(3, self.n))
            direct = _vector(self.f_direct(k, u1, u2, u3), self.n, "f_direct")
            assembled = self.f(k, u1, u2, u3)
            worst = max(worst, float(np.max(np.abs(direct - assembled))))
        if worst > ASSEMBLY_TOL:
            raise ValueError(
                f"f_direct disagrees with the assembled coupling term "
                f"(max abs deviation {worst:.3e} > {ASSEMBLY_TOL})"
            )

    def F_at(self, k: int, u1, u2) -> float:
        kk = wrap_index(k, self.m)
        return _scalar(self.F(kk, np.atleast_1d(u1), np.atleast_1d(u2)), f"F({kk},.,.)")

    def f(self, k: int, u1, u2, u3) -> np.ndarray:
        """Coupling term assembled from the two partial gradients of F."""
        u1 = np.atleast_1d(np.asarray(u1, dtype=float))
        u2 = np.atleast_1d(np.asarray(u2, dtype=float))
        u3 = np.atleast_1d(np.asarray(u3, dtype=float))
        k2 = wrap_index(k, self.m)
        k1 = wrap_index(k - 1, self.m)
        a = _vector(self.F2_prime(k1, u2, u3), self.n, "F2_prime")
        b = _vector(self.F3_prime(k2, u1, u2), self.n, "F3_prime")
        return a + b


@dataclasses.dataclass(frozen=True)
class Problem:
    """One fully specified instance of the periodic difference system.

    Couples a period m, component dimension n, a variable exponent p(k),
    a nonlinearity and a positive parameter lam (the lambda multiplying
    the coupling term).
    """

    m: int
    n: int
    exponent: ExponentFunction
    nonlinearity: Nonlinearity
    lam: float

    def __post_init__(self):
        if self.m < 2:
            raise ValueError(f"period m must be >= 2, got {self.m}")
        if self.n < 1:
            raise ValueError(f"component dimension n must be >= 1, got {self.n}")
        if self.exponent.m != self.m:
            raise ValueError(
                f"exponent period {self.exponent.m} does not match problem period {self.m}"
            )
        if self.nonlinearity.m != self.m:
            raise ValueError(
                f"nonlinearity period {self.nonlinearity.m} does not match problem period {self.m}"
            )
        if self.nonlinearity.n != self.n:
            raise ValueError(
                f"nonlinearity dimension {self.nonlinearity.n} does not match problem n {self.n}"
            )
        if not (self.lam > 0.0) or not math.isfinite(self.lam):
            raise ValueError(f"lambda must be a positive real, got {self.lam}")

    @property
    def dim(self) -> int:
        return self.m * self.n

    def with_lambda(self, lam: float) -> "Problem":
        return dataclasses.replace(self, lam=float(lam))


@dataclasses.dataclass(frozen=True)
class SolutionRecord:
    """One located critical point together with its verification data.

    residual_norm is the Euclidean norm of the full difference-equation
    residual re-evaluated at u.  classification comes from the eigenvalue
    signs of the finite-difference Hessian of the action; morse_index is the
    number of negative eigenvalues.
    """

    u: PeriodicSequence
    residual_norm: float
    action_value: float
    morse_index: int
    in_Y: bool
    classification: str
    method: str = ""
    start_index: Optional[int] = None
    converged: bool = True
    flags: tuple = ()
