"""Built-in potentials: three scalar showcase families plus pure powers.

All built-ins are scalar (n = 1).  Their formulas reduce the period index
modulo m before any trigonometry, so they are exactly m-periodic in k and
weights like |sin(pi*k/m)| vanish exactly where they should.
"""

from __future__ import annotations

import dataclasses
import math
from typing import Optional

import numpy as np

from .analysis import VIOLATED, BoundProfile, GrowthProfile, check_bounds
from .core import ExponentFunction, Nonlinearity


def _sc(u) -> float:
    """Coerce a scalar-or-length-1-array argument to a float."""
    return float(np.asarray(u, dtype=float).reshape(()))


@dataclasses.dataclass(frozen=True)
class BuiltinSpec:
    """A named built-in potential with whatever profile data applies to it."""

    name: str
    params: dict
    nonlinearity: Nonlinearity
    growth: Optional[GrowthProfile] = None
    bounds: Optional[BoundProfile] = None


def make_example1(m: int) -> tuple[Nonlinearity, GrowthProfile]:
    """Quartic potential with an alternating sine perturbation (even m only).

    F(k, t1, t2) = t1^4 + t2^4 + (-1)^k sin(t1^4 + t2^4).  The alternating
    sign is only m-periodic when m is even.  Growth data: the bound
    F >= |t1|^s(k) + |t2|^r(k) - 1 holds from M = 1 on, with s = r
    alternating between 4 (even k) and 2 (odd k).
    """
    if m < 2 or m % 2 != 0:
        raise ValueError(f"this potential needs an even period, got m = {m}")

    def sign(k: int) -> float:
        return 1.0 if k % 2 == 0 else -1.0

    def F(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        x = t1**4 + t2**4
        return x + sign(k) * math.sin(x)

    def F2(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return 4.0 * t1**3 * (1.0 + sign(k) * math.cos(t1**4 + t2**4))

    def F3(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return 4.0 * t2**3 * (1.0 + sign(k) * math.cos(t1**4 + t2**4))

    def f_direct(k, u1, u2, u3):
        t1, t2, t3 = _sc(u1), _sc(u2), _sc(u3)
        return 4.0 * t2**3 * (
            2.0 + sign(k) * (math.cos(t1**4 + t2**4) - math.cos(t2**4 + t3**4))
        )

    nl = Nonlinearity(
        m=m,
        F=F,
        F2_prime=F2,
        F3_prime=F3,
        f_direct=f_direct,
        n=1,
        name="example1",
        even_symmetric=True,
    )
    exponents = ExponentFunction(
        np.array([4.0 if k % 2 == 0 else 2.0 for k in range(1, m + 1)])
    )
    growth = GrowthProfile(
        m=m,
        M=1.0,
        eta=0.5,
        alpha1=np.ones(m),
        alpha2=np.ones(m),
        alpha3=-np.ones(m),
        s=exponents,
        r=exponents,
    )
    return nl, growth


def make_example2(m: int) -> tuple[Nonlinearity, GrowthProfile]:
    """Product-quartic potential with a cosine-squared weight.

    F(k, t1, t2) = cos^2(k*pi/m) (t1*t2)^4, with growth exponents
    s = r = sin(k*pi/m) + 3.  For even m the weight vanishes at k = m/2 and
    the growth profile degenerates there (its construction warns; the
    derived lambda thresholds become infinite).
    """
    if m < 2:
        raise ValueError(f"period m must be >= 2, got {m}")

    def c2(k: int) -> float:
        # exact zero at 2k = m (floating-point cos leaves ~1e-33 there)
        if 2 * (k % m) == m:
            return 0.0
        return math.cos(math.pi * (k % m) / m) ** 2

    def F(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return c2(k) * t1**4 * t2**4

    def F2(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return 4.0 * c2(k) * t1**3 * t2**4

    def F3(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return 4.0 * c2(k) * t1**4 * t2**3

    def f_direct(k, u1, u2, u3):
        t1, t2, t3 = _sc(u1), _sc(u2), _sc(u3)
        return 4.0 * t2**3 * (c2(k - 1) * t3**4 + c2(k) * t1**4)

    nl = Nonlinearity(
        m=m,
        F=F,
        F2_prime=F2,
        F3_prime=F3,
        f_direct=f_direct,
        n=1,
        name="example2",
        even_symmetric=True,
    )
    weights = np.array([c2(k) for k in range(1, m + 1)])
    exponents = ExponentFunction(
        np.array([math.sin(math.pi * (k % m) / m) + 3.0 for k in range(1, m + 1)])
    )
    growth = GrowthProfile(
        m=m,
        M=2.0**0.25,
        eta=0.5,
        alpha1=weights,
        alpha2=weights,
        alpha3=np.zeros(m),
        s=exponents,
        r=exponents,
    )
    return nl, growth


def make_example3(
    m: int,
    C: float = 1.0,
    rho1: float = 0.5,
    rho2: float | None = None,
    rho3: float | None = None,
    guard_budget: int = 800,
) -> tuple[Nonlinearity, BoundProfile]:
    """Bounded sine-well potential with a |sin(k*pi/m)| weight.

    F(k, u1, u2) = -sin(u1^2 + u2^2) |sin(k*pi/m)|.  The default radii put
    the negative well inside |u| <= rho1 and the positive annulus at
    rho2 < |u| <= rho3.  The sign conditions are re-checked on samples at
    construction; radii that break them are rejected.
    """
    if m < 2:
        raise ValueError(f"period m must be >= 2, got {m}")
    if rho2 is None:
        rho2 = math.sqrt(math.pi / 2.0) + 0.1
    if rho3 is None:
        rho3 = math.sqrt(math.pi) - 0.1

    def w(k: int) -> float:
        return abs(math.sin(math.pi * (k % m) / m))

    def F(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return -math.sin(t1**2 + t2**2) * w(k)

    def F2(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return -2.0 * t1 * math.cos(t1**2 + t2**2) * w(k)

    def F3(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return -2.0 * t2 * math.cos(t1**2 + t2**2) * w(k)

    nl = Nonlinearity(
        m=m,
        F=F,
        F2_prime=F2,
        F3_prime=F3,
        n=1,
        name="example3",
        even_symmetric=True,
    )
    bounds = BoundProfile(C=C, rho1=rho1, rho2=rho2, rho3=rho3)
    for report in check_bounds(nl, bounds, sample_budget=guard_budget, seed=7):
        if report.verdict == VIOLATED:
            raise ValueError(
                f"bound condition {report.name} fails for the chosen radii "
                f"(margin {report.margin:.3e})"
            )
    return nl, bounds


def _exponent_arg(values, m: int, what: str) -> ExponentFunction:
    if isinstance(values, ExponentFunction):
        exp = values
    else:
        arr = np.asarray(values, dtype=float).reshape(-1)
        if arr.size == 1:
            arr = np.full(m, arr[0])
        exp = ExponentFunction(arr)
    if exp.m != m:
        raise ValueError(f"{what} must have {m} entries, got {exp.m}")
    if exp.p_minus < 2.0:
        raise ValueError(f"{what} entries must be >= 2, got min {exp.p_minus}")
    return exp


def make_power(
    m: int, a: float, b: float, s, r
) -> tuple[Nonlinearity, GrowthProfile]:
    """Decoupled power potential F = a|u1|^s(k) + b|u2|^r(k).

    The growth bound holds with equality from M = 1 on (alpha1 = a,
    alpha2 = b, alpha3 = 0).  a = b = 0 gives the zero potential, which the
    solvers treat specially (constant shifts of a solution are quotiented
    out when deduplicating).
    """
    if a < 0 or b < 0:
        raise ValueError("power coefficients must be >= 0")
    s_exp = _exponent_arg(s, m, "s")
    r_exp = _exponent_arg(r, m, "r")

    def F(k, u1, u2):
        t1, t2 = _sc(u1), _sc(u2)
        return a * abs(t1) ** s_exp.at(k) + b * abs(t2) ** r_exp.at(k)

    def F2(k, u1, u2):
        t1 = _sc(u1)
        sk = s_exp.at(k)
        return 0.0 if t1 == 0.0 else a * sk * abs(t1) ** (sk - 2.0) * t1

    def F3(k, u1, u2):
        t2 = _sc(u2)
        rk = r_exp.at(k)
        return 0.0 if t2 == 0.0 else b * rk * abs(t2) ** (rk - 2.0) * t2

    nl = Nonlinearity(
        m=m,
        F=F,
        F2_prime=F2,
        F3_prime=F3,
        n=1,
        name="power",
        is_zero=(a == 0.0 and b == 0.0),
        even_symmetric=True,
    )
    growth = GrowthProfile(
        m=m,
        M=1.0,
        eta=0.5,
        alpha1=np.full(m, float(a)),
        alpha2=np.full(m, float(b)),
        alpha3=np.zeros(m),
        s=s_exp,
        r=r_exp,
    )
    return nl, growth


BUILTIN_NAMES = ("example1", "example2", "example3", "power")


def make_builtin(name: str, m: int, params: dict | None = None) -> BuiltinSpec:
    """Instantiate a built-in by name; params are family-specific."""
    params = dict(params or {})
    if name == "example1":
        _reject_params(params, ())
        nl, growth = make_example1(m)
        return BuiltinSpec(name, {}, nl, growth=growth)
    if name == "example2":
        _reject_params(params, ())
        nl, growth = make_example2(m)
        return BuiltinSpec(name, {}, nl, growth=growth)
    if name == "example3":
        allowed = {"C", "rho1", "rho2", "rho3"}
        _reject_params(params, allowed)
        nl, bounds = make_example3(m, **params)
        return BuiltinSpec(name, params, nl, bounds=bounds)
    if name == "power":
        allowed = {"a", "b", "s", "r"}
        missing = allowed - set(params)
        if missing:
            raise ValueError(f"power potential needs parameters {sorted(missing)}")
        _reject_params(params, allowed)
        nl, growth = make_power(m, params["a"], params["b"], params["s"], params["r"])
        return BuiltinSpec(name, params, nl, growth=growth)
    raise ValueError(f"unknown built-in {name!r}; choose from {BUILTIN_NAMES}")


def _reject_params(params: dict, allowed) -> None:
    extra = set(params) - set(allowed)
    if extra:
        raise ValueError(f"unexpected parameters {sorted(extra)}")
