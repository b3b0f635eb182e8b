"""Solvers that locate and classify multiple critical points of the action.

The toolbox is deliberately plain: damped Newton on the residual with a
finite-difference Jacobian, deflation to repel already-found solutions,
subspace-restricted minimisation for the coercive routes, and a relaxed
path (string) method for saddle points between two known critical points.
All randomness is drawn from counter-keyed generators, so a fixed seed
reproduces the same solution set bit for bit.
"""

from __future__ import annotations

import dataclasses
import logging
import math
import warnings
from typing import Optional, Sequence

import numpy as np

from .analysis import rng_for
from .core import (
    EvaluationError,
    PeriodicSequence,
    Problem,
    SolutionRecord,
    euclidean_norm,
    in_Y,
)
from .functional import action, morse_summary
from .operators import residual_values

logger = logging.getLogger(__name__)

SUBSPACE_FULL = "H_m"
SUBSPACE_Y = "Y"
SUBSPACE_W = "W"

OBJECTIVE_ACTION = "J_m"
OBJECTIVE_NEG_ACTION = "neg_J_m"
OBJECTIVE_SPLIT = "mu_plus_lambda_J"  # identical values; kept as a route label

DIVERGENCE_GUARD = 1e6

# Extra damped-Newton steps allowed after the residual tolerance is first met,
# so iterates escape flat basins instead of stopping at the tolerance boundary.
_POLISH_BUDGET = 200


@dataclasses.dataclass(frozen=True)
class SolverConfig:
    """Shared knobs for every solver in this module."""

    starts: int = 16
    max_iterations: int = 100
    residual_tol: float = 1e-10
    dedupe_tol: float = 1e-6
    deflation_power: float = 2.0
    deflation_shift: float = 1.0
    regularization_eps: float = 0.0
    start_radius: float = 3.0
    path_points: int = 21
    use_mountain_pass: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.starts < 1:
            raise ValueError("starts must be >= 1")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")
        for field in ("residual_tol", "dedupe_tol", "start_radius"):
            if not getattr(self, field) > 0:
                raise ValueError(f"{field} must be positive")
        if self.deflation_power <= 0 or self.deflation_shift < 0:
            raise ValueError("deflation parameters must be positive (shift >= 0)")
        if self.regularization_eps < 0:
            raise ValueError("regularization_eps must be >= 0")
        if self.path_points < 5:
            raise ValueError("path_points must be >= 5")


def subspace_basis(m: int, n: int, subspace: str) -> np.ndarray:
    """Orthonormal basis (columns) of the requested subspace in flat coordinates."""
    if subspace == SUBSPACE_FULL:
        return np.eye(m * n)
    if subspace == SUBSPACE_W:
        return np.kron(np.full((m, 1), 1.0 / math.sqrt(m)), np.eye(n))
    if subspace == SUBSPACE_Y:
        b = np.zeros((m, m - 1))
        for j in range(1, m):
            scale = 1.0 / math.sqrt(j * (j + 1))
            b[:j, j - 1] = scale
            b[j, j - 1] = -j * scale
        return np.kron(b, np.eye(n))
    raise ValueError(f"unknown subspace {subspace!r}")


class _System:
    """Flat view of the residual system, optionally reduced to a subspace."""

    def __init__(self, prob: Problem, subspace: str = SUBSPACE_FULL, eps: float = 0.0):
        self.prob = prob
        self.eps = eps
        self.subspace = subspace
        self.q = None if subspace == SUBSPACE_FULL else subspace_basis(prob.m, prob.n, subspace)
        self.dim = prob.dim if self.q is None else self.q.shape[1]

    def to_full(self, y: np.ndarray) -> np.ndarray:
        return y if self.q is None else self.q @ y

    def to_reduced(self, x: np.ndarray) -> np.ndarray:
        return x if self.q is None else self.q.T @ x

    def g_full(self, x: np.ndarray) -> np.ndarray:
        seq = PeriodicSequence.from_flat(x, self.prob.m, self.prob.n)
        return residual_values(seq, self.prob, eps=self.eps).reshape(-1)

    def g(self, y: np.ndarray) -> np.ndarray:
        gx = self.g_full(self.to_full(y))
        return gx if self.q is None else self.q.T @ gx

    def jacobian(self, y: np.ndarray) -> np.ndarray:
        h = 1e-7 * max(1.0, float(np.linalg.norm(y)))
        jac = np.zeros((self.dim, self.dim))
        for i in range(self.dim):
            yp = y.copy()
            ym = y.copy()
            yp[i] += h
            ym[i] -= h
            jac[:, i] = (self.g(yp) - self.g(ym)) / (2.0 * h)
        return jac


def _newton_iterate(
    system: _System,
    y0: np.ndarray,
    cfg: SolverConfig,
    g_fn=None,
    jac_fn=None,
) -> tuple[np.ndarray, float, bool, int]:
    """Damped Newton iteration; returns (best iterate, its norm, converged, iters).

    g_fn/jac_fn override the system functions (used by deflation); the
    default is the plain residual.  A singular Jacobian falls back to the
    minimum-norm least-squares step.
    """
    g_fn = g_fn or system.g
    jac_fn = jac_fn or system.jacobian
    y = np.asarray(y0, dtype=float).copy()
    try:
        g = g_fn(y)
    except EvaluationError:
        return y, math.inf, False, 0
    ng = float(np.linalg.norm(g))
    best_y, best_ng = y.copy(), ng
    it = 0
    polish_left = _POLISH_BUDGET
    while True:
        below_tol = ng <= cfg.residual_tol
        if below_tol:
            # Keep stepping past the tolerance until the iteration stalls.
            # Residuals with high-order flatness (e.g. degree-7 growth around
            # the zero solution) dip below any fixed tolerance on a whole
            # neighbourhood; only the stagnation point is the actual root.
            if polish_left <= 0:
                break
        elif it >= cfg.max_iterations:
            break
        try:
            jac = jac_fn(y)
        except EvaluationError:
            break
        try:
            delta = np.linalg.solve(jac, -g)
            if not np.all(np.isfinite(delta)):
                raise np.linalg.LinAlgError
        except np.linalg.LinAlgError:
            delta, *_ = np.linalg.lstsq(jac, -g, rcond=None)
        if not np.all(np.isfinite(delta)):
            break
        alpha = 1.0
        accepted = False
        for _ in range(30):
            y_new = y + alpha * delta
            try:
                g_new = g_fn(y_new)
            except EvaluationError:
                alpha *= 0.5
                continue
            ng_new = float(np.linalg.norm(g_new))
            if ng_new < (1.0 - 1e-4 * alpha) * ng:
                y, g, ng = y_new, g_new, ng_new
                accepted = True
                break
            alpha *= 0.5
        if not accepted or float(np.linalg.norm(y)) > 1e8:
            break
        it += 1
        if below_tol:
            polish_left -= 1
        if ng < best_ng:
            best_y, best_ng = y.copy(), ng
    return best_y, best_ng, best_ng <= cfg.residual_tol, it


def _make_record(
    prob: Problem,
    x: np.ndarray,
    method: str,
    cfg: SolverConfig,
    start_index: Optional[int] = None,
    flags: tuple = (),
    classify: bool = True,
) -> SolutionRecord:
    u = PeriodicSequence.from_flat(x, prob.m, prob.n)
    res = residual_values(u, prob)
    res_norm = float(np.linalg.norm(res))
    if classify:
        summary = morse_summary(u, prob)
        morse_index = summary.morse_index
        classification = summary.classification
    else:
        morse_index = 0
        classification = "unclassified"
    return SolutionRecord(
        u=u,
        residual_norm=res_norm,
        action_value=action(u, prob),
        morse_index=morse_index,
        in_Y=in_Y(u),
        classification=classification,
        method=method,
        start_index=start_index,
        converged=res_norm <= cfg.residual_tol,
        flags=flags,
    )


def newton_solve(
    prob: Problem, u0: PeriodicSequence, cfg: SolverConfig
) -> Optional[SolutionRecord]:
    """Damped Newton on the full residual system from the given start.

    Returns a verified solution record (full residual norm <= residual_tol)
    or None.  For exponents with p_minus < 2 and regularization_eps > 0, a
    continuation over shrinking smoothing parameters runs first, with the
    unregularised polish applied only when no forward difference sits inside
    the smoothing region; otherwise the record is flagged "regularized".
    """
    x0 = u0.flat()
    flags: tuple = ()
    if prob.exponent.p_minus < 2.0 and cfg.regularization_eps > 0.0:
        x = x0
        eps = cfg.regularization_eps
        for _ in range(4):
            system = _System(prob, eps=eps)
            x, _, _, _ = _newton_iterate(system, x, cfg)
            eps *= 0.5
        seq = PeriodicSequence.from_flat(x, prob.m, prob.n)
        d = np.roll(seq.values, -1, axis=0) - seq.values
        min_diff = float(np.min(np.linalg.norm(d, axis=1)))
        if min_diff > 10.0 * eps:
            x, ng, converged, _ = _newton_iterate(_System(prob), x, cfg)
        else:
            flags = ("regularized",)
            ng = float(np.linalg.norm(_System(prob).g_full(x)))
            converged = ng <= cfg.residual_tol
    else:
        x, ng, converged, _ = _newton_iterate(_System(prob), x0, cfg)
    if not converged:
        logger.debug("newton_solve failed: best residual %.3e", ng)
        return None
    return _make_record(prob, x, "newton", cfg, flags=flags)


def _deflation_terms(
    y: np.ndarray, known: Sequence[np.ndarray], power: float, shift: float
) -> tuple[float, np.ndarray]:
    """Deflation factor prod_i (||y - y_i||^-power + shift) and its gradient."""
    factor = 1.0
    log_grad = np.zeros_like(y)
    for yi in known:
        d = y - yi
        nd2 = float(np.dot(d, d))
        if nd2 == 0.0:
            return math.inf, log_grad
        mi = nd2 ** (-power / 2.0) + shift
        dmi = -power * nd2 ** (-power / 2.0 - 1.0) * d
        factor *= mi
        log_grad = log_grad + dmi / mi
    return factor, factor * log_grad


def deflated_solve(
    prob: Problem,
    known,
    u0: PeriodicSequence,
    cfg: SolverConfig,
) -> Optional[SolutionRecord]:
    """Newton on the deflated residual, repelled from already-known solutions.

    known is a SolutionSet or any iterable of PeriodicSequence / flat arrays.
    Convergence is judged on the undeflated residual, and a result landing
    back on a known solution (within dedupe_tol) is rejected.
    """
    known_flat = _known_flats(known, prob)
    if not known_flat:
        return newton_solve(prob, u0, cfg)
    system = _System(prob)

    def g_defl(y: np.ndarray) -> np.ndarray:
        factor, _ = _deflation_terms(y, known_flat, cfg.deflation_power, cfg.deflation_shift)
        if not math.isfinite(factor):
            raise EvaluationError("deflated residual evaluated at a known solution")
        return factor * system.g_full(y)

    def jac_defl(y: np.ndarray) -> np.ndarray:
        factor, dfactor = _deflation_terms(
            y, known_flat, cfg.deflation_power, cfg.deflation_shift
        )
        g = system.g_full(y)
        return factor * system.jacobian(y) + np.outer(g, dfactor)

    x, _, converged, _ = _newton_iterate(
        system, u0.flat(), cfg, g_fn=g_defl, jac_fn=jac_defl
    )
    if not converged:
        return None
    true_norm = float(np.linalg.norm(system.g_full(x)))
    if true_norm > cfg.residual_tol:
        return None
    for yi in known_flat:
        if _same_solution(x, yi, prob, cfg):
            return None
    return _make_record(prob, x, "deflated", cfg)


def _known_flats(known, prob: Problem) -> list[np.ndarray]:
    if known is None:
        return []
    if isinstance(known, SolutionSet):
        entries = [r.u for r in known.records]
    else:
        entries = list(known)
    out = []
    for e in entries:
        if isinstance(e, SolutionRecord):
            out.append(e.u.flat())
        elif isinstance(e, PeriodicSequence):
            out.append(e.flat())
        else:
            out.append(np.asarray(e, dtype=float).reshape(-1))
    return out


def _is_duplicate(a: np.ndarray, b: np.ndarray, tol: float) -> bool:
    scale = max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    return float(np.linalg.norm(a - b)) <= tol * scale


def _flat_connected(a: np.ndarray, b: np.ndarray, prob: Problem, bar: float) -> bool:
    """True when the segment from a to b stays inside the residual sublevel set.

    Two below-tolerance points joined by a below-tolerance path belong to one
    connected component of {u : |residual(u)| <= bar} and are numerically the
    same solution.  Residuals with high-order flatness (or the translation
    family of a potential-free problem) produce whole plateaus of such points;
    distance alone cannot collapse them.  The midpoint goes first so genuinely
    distinct solutions are rejected after a single evaluation.
    """
    for t in (0.5, 0.25, 0.75, 0.125, 0.375, 0.625, 0.875):
        x = a + t * (b - a)
        try:
            vals = residual_values(PeriodicSequence.from_flat(x, prob.m, prob.n), prob)
        except EvaluationError:
            return False
        if float(np.linalg.norm(vals)) > bar:
            return False
    return True


def _same_solution(a: np.ndarray, b: np.ndarray, prob: Problem, cfg: SolverConfig) -> bool:
    return _is_duplicate(a, b, cfg.dedupe_tol) or _flat_connected(
        a, b, prob, 100.0 * cfg.residual_tol
    )


class _Diverged(Exception):
    pass


def minimize(
    prob: Problem,
    subspace: str = SUBSPACE_FULL,
    objective: str = OBJECTIVE_ACTION,
    cfg: SolverConfig | None = None,
    u0: PeriodicSequence | None = None,
) -> Optional[SolutionRecord]:
    """Minimise the action (or its negation) over a subspace.

    objective "J_m" and "mu_plus_lambda_J" denote the same function (the two
    names reflect the two analytic routes); "neg_J_m" maximises the action.
    Runs L-BFGS followed by a reduced Newton polish on the projected
    gradient.  Iterates escaping a large ball trigger the divergence guard:
    the objective is reported as non-coercive and None is returned.
    """
    from scipy.optimize import minimize as scipy_minimize

    cfg = cfg or SolverConfig()
    if objective not in (OBJECTIVE_ACTION, OBJECTIVE_NEG_ACTION, OBJECTIVE_SPLIT):
        raise ValueError(f"unknown objective {objective!r}")
    sign = -1.0 if objective == OBJECTIVE_NEG_ACTION else 1.0
    system = _System(prob, subspace=subspace)
    guard = DIVERGENCE_GUARD * max(1.0, cfg.start_radius)

    def fun(y: np.ndarray):
        if float(np.linalg.norm(y)) > guard:
            raise _Diverged
        x = system.to_full(y)
        seq = PeriodicSequence.from_flat(x, prob.m, prob.n)
        val = sign * action(seq, prob)
        grad = sign * system.to_reduced(-residual_values(seq, prob).reshape(-1))
        return val, grad

    if u0 is not None:
        y = system.to_reduced(u0.flat())
    else:
        rng = rng_for(cfg.seed, 31)
        y = cfg.start_radius * rng.normal(size=system.dim) / math.sqrt(max(system.dim, 1))
    try:
        result = scipy_minimize(
            fun,
            y,
            jac=True,
            method="L-BFGS-B",
            options={"maxiter": 50 * cfg.max_iterations, "ftol": 1e-18, "gtol": 1e-12},
        )
        y = result.x
        # polish: Newton on the projected gradient, accepted only while the
        # objective does not increase (stay at the minimiser)
        for _ in range(40):
            val, grad = fun(y)
            gnorm = float(np.linalg.norm(grad))
            if gnorm <= cfg.residual_tol:
                break
            h = 1e-6 * max(1.0, float(np.linalg.norm(y)))
            hess = np.zeros((system.dim, system.dim))
            for i in range(system.dim):
                yp = y.copy()
                ym = y.copy()
                yp[i] += h
                ym[i] -= h
                hess[:, i] = (fun(yp)[1] - fun(ym)[1]) / (2.0 * h)
            try:
                delta = np.linalg.solve(hess, -grad)
            except np.linalg.LinAlgError:
                delta, *_ = np.linalg.lstsq(hess, -grad, rcond=None)
            alpha, accepted = 1.0, False
            for _ in range(25):
                y_new = y + alpha * delta
                val_new, grad_new = fun(y_new)
                if (
                    float(np.linalg.norm(grad_new)) < gnorm
                    and val_new <= val + 1e-10 * max(1.0, abs(val))
                ):
                    y, accepted = y_new, True
                    break
                alpha *= 0.5
            if not accepted:
                break
    except _Diverged:
        warnings.warn(
            f"minimize({objective} on {subspace}): iterates escaped the guard "
            f"ball; the objective appears unbounded below (anti-coercive)",
            RuntimeWarning,
            stacklevel=2,
        )
        return None

    val, grad = fun(y)
    gnorm = float(np.linalg.norm(grad))
    if gnorm > cfg.residual_tol:
        logger.debug("minimize stalled with projected gradient %.3e", gnorm)
        return None
    x = system.to_full(y)
    record = _make_record(prob, x, "subspace_min", cfg)
    if subspace != SUBSPACE_FULL and record.residual_norm > cfg.residual_tol:
        record = dataclasses.replace(
            record, flags=record.flags + ("subspace_critical_only",)
        )
    return record


def mountain_pass(
    prob: Problem,
    u_a: PeriodicSequence,
    u_b: PeriodicSequence,
    cfg: SolverConfig,
) -> Optional[SolutionRecord]:
    """Saddle search along a relaxed path between two distinct critical points.

    A discretised path from u_a to u_b is relaxed by moving interior points
    along the component of steepest descent orthogonal to the path, with an
    arc-length reparametrisation each sweep.  When the gradient at the path
    maximum is small the point is polished by Newton.  Returns None when no
    separating barrier is detected (the interior maximum never exceeds the
    endpoint values).
    """
    a = u_a.flat()
    b = u_b.flat()
    scale = max(1.0, float(np.linalg.norm(a)), float(np.linalg.norm(b)))
    if float(np.linalg.norm(a - b)) <= cfg.dedupe_tol * scale:
        raise ValueError("mountain_pass endpoints must be distinct")
    system = _System(prob)
    npts = cfg.path_points
    ts = np.linspace(0.0, 1.0, npts)
    path = np.array([a + t * (b - a) for t in ts])

    def j_of(x: np.ndarray) -> float:
        return action(PeriodicSequence.from_flat(x, prob.m, prob.n), prob)

    j_end = max(j_of(a), j_of(b))
    barrier_tol = 1e-9 * max(1.0, abs(j_end))
    polish_from = None
    for _ in range(10 * cfg.max_iterations):
        j_vals = np.array([j_of(p) for p in path])
        i_star = 1 + int(np.argmax(j_vals[1:-1]))
        if j_vals[i_star] <= j_end + barrier_tol:
            return None
        g_star = system.g_full(path[i_star])
        if float(np.linalg.norm(g_star)) <= 10.0 * cfg.residual_tol:
            polish_from = path[i_star].copy()
            break
        seg = np.linalg.norm(np.diff(path, axis=0), axis=1)
        spacing = float(np.mean(seg))
        new_path = path.copy()
        for i in range(1, npts - 1):
            tangent = path[i + 1] - path[i - 1]
            tn = float(np.linalg.norm(tangent))
            if tn > 0.0:
                tangent /= tn
            g = -system.g_full(path[i])  # gradient of the action
            step_dir = -(g - float(np.dot(g, tangent)) * tangent)
            sn = float(np.linalg.norm(step_dir))
            if sn > 0.0:
                new_path[i] = path[i] + min(0.2 * spacing / sn, 0.5) * step_dir
        # reparametrise by arc length
        deltas = np.linalg.norm(np.diff(new_path, axis=0), axis=1)
        arc = np.concatenate([[0.0], np.cumsum(deltas)])
        if arc[-1] > 0.0:
            targets = np.linspace(0.0, arc[-1], npts)
            for dim in range(new_path.shape[1]):
                new_path[:, dim] = np.interp(targets, arc, new_path[:, dim])
        path = new_path
        polish_from = path[1 + int(np.argmax([j_of(p) for p in path[1:-1]]))].copy()
    if polish_from is None:
        return None
    record = newton_solve(
        prob, PeriodicSequence.from_flat(polish_from, prob.m, prob.n), cfg
    )
    if record is None:
        return None
    x = record.u.flat()
    if _is_duplicate(x, a, cfg.dedupe_tol) or _is_duplicate(x, b, cfg.dedupe_tol):
        return None
    return dataclasses.replace(record, method="mountain_pass")


@dataclasses.dataclass(frozen=True)
class SolutionSet:
    """Deduplicated, classified solutions of one problem instance.

    records are sorted by action value.  y_discrepancies holds points that
    are critical for the restriction to the zero-mean subspace but fail the
    full residual test; they are kept separate because they do not solve the
    original system.  symmetry_ok reports the post-hoc check that -u solves
    whenever u does (only meaningful for even potentials).
    """

    records: tuple
    y_discrepancies: tuple = ()
    symmetry_ok: Optional[bool] = None
    subspace: str = SUBSPACE_FULL
    seed: int = 0


@dataclasses.dataclass(frozen=True)
class SweepResult:
    """Per-lambda solution counts over a grid, with the >=3 region estimate."""

    lambda_grid: tuple
    counts: tuple
    nontrivial_counts: tuple
    min_actions: tuple
    a_estimate: tuple
    solution_sets: tuple
    failures: tuple = ()


def _canonical(x: np.ndarray, prob: Problem) -> np.ndarray:
    """Dedupe representative; constants are quotiented out only for F == 0."""
    if prob.nonlinearity.is_zero:
        v = x.reshape(prob.m, prob.n)
        return (v - v.mean(axis=0)).reshape(-1)
    return x


def find_multiple(
    prob: Problem,
    cfg: SolverConfig | None = None,
    subspace: str = SUBSPACE_FULL,
    extra_starts: Sequence[np.ndarray] = (),
) -> SolutionSet:
    """Multistart Newton + deflation pipeline returning a deduplicated set.

    Stages: the zero sequence, multistart Newton, deflation rounds until a
    full round adds nothing, and optionally a saddle search between the two
    lowest critical points.  With subspace="Y" the iteration runs on the
    zero-mean reduction; every candidate is still verified against the full
    residual, and reduced-critical points failing that test are reported in
    y_discrepancies instead of records.
    """
    cfg = cfg or SolverConfig()
    if subspace not in (SUBSPACE_FULL, SUBSPACE_Y):
        raise ValueError(f"find_multiple supports subspaces H_m and Y, got {subspace!r}")
    system = _System(prob, subspace=subspace)
    records: list[SolutionRecord] = []
    discrepancies: list[SolutionRecord] = []

    def try_add(rec: SolutionRecord) -> bool:
        x = _canonical(rec.u.flat(), prob)
        for i, existing in enumerate(records):
            if _same_solution(x, _canonical(existing.u.flat(), prob), prob, cfg):
                if rec.residual_norm < existing.residual_norm:
                    records[i] = rec
                return False
        records.append(rec)
        return True

    def handle_candidate(y: np.ndarray, method: str, start_index=None) -> bool:
        x = system.to_full(y)
        full_norm = float(np.linalg.norm(_System(prob).g_full(x)))
        if full_norm <= cfg.residual_tol:
            return try_add(_make_record(prob, x, method, cfg, start_index=start_index))
        if subspace == SUBSPACE_Y:
            rec = _make_record(
                prob,
                x,
                method,
                cfg,
                start_index=start_index,
                flags=("y_critical_only",),
                classify=False,
            )
            for existing in discrepancies:
                if _is_duplicate(x, existing.u.flat(), cfg.dedupe_tol):
                    return False
            discrepancies.append(rec)
        return False

    # stage 0: the zero sequence
    if float(np.linalg.norm(system.g_full(np.zeros(prob.dim)))) <= cfg.residual_tol:
        try_add(_make_record(prob, np.zeros(prob.dim), "newton", cfg))

    # stage 1: warm starts (continuation) then multistart Newton
    start_pool: list[np.ndarray] = [system.to_reduced(np.asarray(w, float).reshape(-1)) for w in extra_starts]
    for i in range(cfg.starts):
        rng = rng_for(cfg.seed, 101, i)
        v = rng.normal(size=system.dim)
        nv = float(np.linalg.norm(v))
        if nv == 0.0:
            continue
        radius = cfg.start_radius * rng.random() ** (1.0 / max(system.dim, 1))
        start_pool.append(radius * v / nv)
    for idx, y0 in enumerate(start_pool):
        y, _, converged, _ = _newton_iterate(system, y0, cfg)
        if converged:
            handle_candidate(y, "newton", start_index=idx)

    # stage 2: deflation rounds until a round adds nothing new
    for round_no in range(10):
        added = False
        known = [system.to_reduced(r.u.flat()) for r in records]
        if not known:
            break

        def g_defl(y, known=known):
            factor, _ = _deflation_terms(y, known, cfg.deflation_power, cfg.deflation_shift)
            if not math.isfinite(factor):
                raise EvaluationError("deflated residual at a known solution")
            return factor * system.g(y)

        def jac_defl(y, known=known):
            factor, dfactor = _deflation_terms(
                y, known, cfg.deflation_power, cfg.deflation_shift
            )
            return factor * system.jacobian(y) + np.outer(system.g(y), dfactor)

        for i in range(cfg.starts):
            rng = rng_for(cfg.seed, 211 + round_no, i)
            v = rng.normal(size=system.dim)
            nv = float(np.linalg.norm(v))
            if nv == 0.0:
                continue
            radius = cfg.start_radius * rng.random() ** (1.0 / max(system.dim, 1))
            y0 = radius * v / nv
            y, ng, converged, _ = _newton_iterate(
                system, y0, cfg, g_fn=g_defl, jac_fn=jac_defl
            )
            if not converged:
                continue
            if float(np.linalg.norm(system.g(y))) > cfg.residual_tol:
                continue
            if handle_candidate(y, "deflated", start_index=i):
                added = True
        if not added:
            break

    # stage 3: saddle search between the two lowest records
    if cfg.use_mountain_pass and subspace == SUBSPACE_FULL and len(records) >= 2:
        ordered = sorted(records, key=lambda r: r.action_value)
        try:
            mp = mountain_pass(prob, ordered[0].u, ordered[1].u, cfg)
        except ValueError:
            mp = None
        if mp is not None and mp.converged:
            try_add(mp)

    symmetry_ok = None
    if prob.nonlinearity.even_symmetric and records:
        symmetry_ok = True
        for rec in records:
            mirrored = PeriodicSequence(-rec.u.values)
            norm = float(np.linalg.norm(residual_values(mirrored, prob)))
            if norm > 10.0 * cfg.residual_tol:
                symmetry_ok = False
                break

    records.sort(key=lambda r: (r.action_value, tuple(r.u.values.reshape(-1))))
    return SolutionSet(
        records=tuple(records),
        y_discrepancies=tuple(discrepancies),
        symmetry_ok=symmetry_ok,
        subspace=subspace,
        seed=cfg.seed,
    )


def lambda_sweep(
    prob: Problem,
    lambda_grid: Sequence[float],
    cfg: SolverConfig | None = None,
    subspace: str = SUBSPACE_FULL,
) -> SweepResult:
    """find_multiple along a lambda grid with warm-started continuation.

    Solutions found at one grid point seed the Newton starts at the next.
    a_estimate lists the maximal grid intervals on which at least three
    distinct solutions were located.
    """
    cfg = cfg or SolverConfig()
    grid = [float(v) for v in lambda_grid]
    if not grid or any(v <= 0 for v in grid):
        raise ValueError("lambda grid must contain positive values")
    if any(b <= a for a, b in zip(grid, grid[1:])):
        raise ValueError("lambda grid must be strictly increasing")

    counts, nontrivial, min_actions, sets, failures = [], [], [], [], []
    warm: list[np.ndarray] = []
    for lam in grid:
        prob_l = prob.with_lambda(lam)
        try:
            sol = find_multiple(prob_l, cfg, subspace=subspace, extra_starts=warm)
        except Exception as exc:  # keep sweeping past a bad grid point
            failures.append((lam, f"{type(exc).__name__}: {exc}"))
            sets.append(SolutionSet(records=(), subspace=subspace, seed=cfg.seed))
            counts.append(0)
            nontrivial.append(0)
            min_actions.append(None)
            continue
        sets.append(sol)
        counts.append(len(sol.records))
        nontrivial.append(
            sum(1 for r in sol.records if euclidean_norm(r.u) > cfg.dedupe_tol)
        )
        min_actions.append(
            min((r.action_value for r in sol.records), default=None)
        )
        warm = [r.u.flat() for r in sol.records]

    intervals = []
    run_start = None
    for i, c in enumerate(counts):
        if c >= 3 and run_start is None:
            run_start = i
        if (c < 3 or i == len(counts) - 1) and run_start is not None:
            end = i if c >= 3 else i - 1
            intervals.append((grid[run_start], grid[end]))
            run_start = None
    return SweepResult(
        lambda_grid=tuple(grid),
        counts=tuple(counts),
        nontrivial_counts=tuple(nontrivial),
        min_actions=tuple(min_actions),
        a_estimate=tuple(intervals),
        solution_sets=tuple(sets),
        failures=tuple(failures),
    )
