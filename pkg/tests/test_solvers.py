import math

import numpy as np
import pytest

from pklap.core import (
    ExponentFunction,
    Nonlinearity,
    PeriodicSequence,
    Problem,
)
from pklap.operators import residual_values
from pklap.solvers import (
    OBJECTIVE_ACTION,
    OBJECTIVE_NEG_ACTION,
    SUBSPACE_FULL,
    SUBSPACE_W,
    SUBSPACE_Y,
    SolutionSet,
    SolverConfig,
    SweepResult,
    _deflation_terms,
    _flat_connected,
    deflated_solve,
    find_multiple,
    lambda_sweep,
    minimize,
    mountain_pass,
    newton_solve,
    subspace_basis,
)
from pklap.nonlinearities import make_example2, make_power


def _double_well(lam=1.0, p=2.0):
    """m = 2, F = (2 t2^2 - t2^4)/4: wells at u = +-(1, 1), saddle at 0."""

    def F(k, u1, u2):
        t = float(np.asarray(u2).reshape(()))
        return (2.0 * t * t - t**4) / 4.0

    def F3(k, u1, u2):
        t = float(np.asarray(u2).reshape(()))
        return t - t**3

    nl = Nonlinearity(
        m=2,
        F=F,
        F2_prime=lambda *a: 0.0,
        F3_prime=F3,
        even_symmetric=True,
    )
    return Problem(
        m=2,
        n=1,
        exponent=ExponentFunction.constant(p, 2),
        nonlinearity=nl,
        lam=lam,
    )


class TestSubspaceBasis:
    @pytest.mark.parametrize("m,n", [(2, 1), (4, 1), (3, 2)])
    def test_orthonormal_columns(self, m, n):
        for name, cols in ((SUBSPACE_Y, (m - 1) * n), (SUBSPACE_W, n)):
            B = subspace_basis(m, n, name)
            assert B.shape == (m * n, cols)
            assert np.allclose(B.T @ B, np.eye(cols), atol=1e-12)

    def test_w_spans_constants(self):
        B = subspace_basis(3, 1, SUBSPACE_W)
        v = B @ np.ones(1)
        assert np.allclose(v, v[0])

    def test_y_columns_have_zero_mean(self):
        B = subspace_basis(4, 2, SUBSPACE_Y)
        for col in B.T:
            assert abs(col.reshape(4, 2).sum(axis=0)).max() < 1e-12

    def test_unknown_subspace(self):
        with pytest.raises(ValueError):
            subspace_basis(3, 1, "Z")


class TestNewtonSolve:
    def test_well_from_nearby_start(self):
        prob = _double_well()
        cfg = SolverConfig(starts=4, seed=0)
        rec = newton_solve(prob, PeriodicSequence(np.array([0.9, 1.1])), cfg)
        assert rec is not None
        assert np.allclose(rec.u.values.reshape(-1), [1.0, 1.0], atol=1e-9)
        assert rec.residual_norm <= cfg.residual_tol
        assert rec.classification == "minimum"
        assert rec.morse_index == 0
        assert rec.method == "newton"

    def test_none_when_capped_iterations_miss(self):
        prob = _double_well()
        cfg = SolverConfig(max_iterations=1, residual_tol=1e-14)
        rec = newton_solve(prob, PeriodicSequence(np.array([5.0, -7.0])), cfg)
        assert rec is None

    def test_alternating_solution_singular_exponent(self):
        """p = 1.5, cubic wells: u = (a, -a) with a = (sqrt(2)/3)^(2/3).

        The alternating ansatz reduces the system to 3 a^(3/2) = sqrt(2),
        giving a closed-form target for the singular-exponent branch.
        """
        nl, _ = make_power(2, a=1.0, b=1.0, s=3.0, r=3.0)
        prob = Problem(
            m=2,
            n=1,
            exponent=ExponentFunction.constant(1.5, 2),
            nonlinearity=nl,
            lam=1.0,
        )
        a = (math.sqrt(2.0) / 3.0) ** (2.0 / 3.0)
        target = PeriodicSequence(np.array([a, -a]))
        assert float(np.linalg.norm(residual_values(target, prob))) < 1e-12

        cfg = SolverConfig(regularization_eps=1e-3, residual_tol=1e-9)
        with pytest.warns(RuntimeWarning, match="p_minus < 2"):
            rec = newton_solve(prob, PeriodicSequence(np.array([0.5, -0.5])), cfg)
        assert rec is not None
        assert np.allclose(np.abs(rec.u.values.reshape(-1)), a, atol=1e-7)


class TestDeflation:
    def test_factor_and_gradient_oracle(self):
        # distance 1 from the known point: factor = 1 + shift = 2,
        # gradient = factor * d(log factor) = -2 * (y - y0)
        y = np.array([1.0, 0.0])
        factor, grad = _deflation_terms(y, [np.zeros(2)], 2.0, 1.0)
        assert factor == pytest.approx(2.0)
        assert np.allclose(grad, [-2.0, 0.0])

    def test_exact_hit_is_infinite(self):
        factor, _ = _deflation_terms(np.zeros(2), [np.zeros(2)], 2.0, 1.0)
        assert factor == math.inf

    def test_deflated_solve_escapes_known_well(self):
        prob = _double_well()
        cfg = SolverConfig(starts=4, seed=0)
        known = [np.array([1.0, 1.0])]
        rec = deflated_solve(prob, known, PeriodicSequence(np.array([0.9, 1.1])), cfg)
        assert rec is not None
        assert rec.method == "deflated"
        # repelled from (1, 1); must land on a different critical point
        assert np.linalg.norm(rec.u.values.reshape(-1) - np.array([1.0, 1.0])) > 0.5
        assert rec.residual_norm <= cfg.residual_tol

    def test_no_known_falls_back_to_newton(self):
        prob = _double_well()
        cfg = SolverConfig()
        rec = deflated_solve(prob, None, PeriodicSequence(np.array([0.9, 1.1])), cfg)
        assert rec is not None
        assert rec.method == "newton"

    def test_accepts_solution_set_input(self):
        prob = _double_well()
        cfg = SolverConfig(starts=6, seed=0)
        sols = find_multiple(prob, cfg)
        rec = deflated_solve(prob, sols, PeriodicSequence(np.array([3.0, -2.0])), cfg)
        # every critical point is already known, so nothing new may appear
        if rec is not None:
            flats = [r.u.flat() for r in sols.records]
            assert all(np.linalg.norm(rec.u.flat() - f) > cfg.dedupe_tol for f in flats)


class TestMinimize:
    def test_constant_well_minimum(self):
        prob = _double_well()
        cfg = SolverConfig(seed=0)
        rec = minimize(prob, subspace=SUBSPACE_W, cfg=cfg)
        assert rec is not None
        assert rec.action_value == pytest.approx(-0.5, abs=1e-10)
        assert np.allclose(np.abs(rec.u.values), 1.0, atol=1e-8)

    def test_unbounded_objective_returns_none(self):
        # quartic forcing: J -> -inf along every nonconstant ray
        nl, _ = make_power(2, a=1.0, b=1.0, s=4.0, r=4.0)
        prob = Problem(
            m=2,
            n=1,
            exponent=ExponentFunction.constant(2.0, 2),
            nonlinearity=nl,
            lam=1.0,
        )
        with pytest.warns(RuntimeWarning, match="unbounded below"):
            rec = minimize(prob, cfg=SolverConfig(seed=3))
        assert rec is None

    def test_neg_action_unbounded_on_axes(self):
        """The weighted quartic coupling vanishes on coordinate axes, so the
        action grows without bound there and maximisation must fail."""
        nl, _ = make_example2(3)
        prob = Problem(
            m=3,
            n=1,
            exponent=ExponentFunction.constant(2.0, 3),
            nonlinearity=nl,
            lam=1.0,
        )
        with pytest.warns(RuntimeWarning, match="unbounded below"):
            rec = minimize(prob, objective=OBJECTIVE_NEG_ACTION, cfg=SolverConfig(seed=1))
        assert rec is None

    def test_unknown_objective(self):
        with pytest.raises(ValueError):
            minimize(_double_well(), objective="J")


def test_mountain_pass_between_wells():
    prob = _double_well()
    cfg = SolverConfig(seed=0)
    rec = mountain_pass(
        prob,
        PeriodicSequence(np.array([1.0, 1.0])),
        PeriodicSequence(np.array([-1.0, -1.0])),
        cfg,
    )
    assert rec is not None
    assert np.allclose(rec.u.values, 0.0, atol=1e-8)
    assert rec.action_value == pytest.approx(0.0, abs=1e-10)
    assert rec.morse_index == 1
    assert rec.method == "mountain_pass"


class TestFindMultiple:
    def test_double_well_inventory(self):
        prob = _double_well()
        sols = find_multiple(prob, SolverConfig(starts=8, seed=0))
        flats = [tuple(np.round(r.u.values.reshape(-1), 8)) for r in sols.records]
        assert (1.0, 1.0) in flats
        assert (-1.0, -1.0) in flats
        assert (0.0, 0.0) in flats
        actions = [r.action_value for r in sols.records]
        assert actions == sorted(actions)
        assert all(r.residual_norm <= 1e-10 for r in sols.records)
        assert sols.symmetry_ok is True

    def test_bitwise_reproducible(self):
        prob = _double_well()
        cfg = SolverConfig(starts=8, seed=0)
        a = find_multiple(prob, cfg)
        b = find_multiple(prob, cfg)
        assert len(a.records) == len(b.records)
        for ra, rb in zip(a.records, b.records):
            assert np.array_equal(ra.u.values, rb.u.values)
            assert ra.action_value == rb.action_value
            assert ra.residual_norm == rb.residual_norm

    def test_potential_free_collapses_to_zero(self):
        """With F == 0 every constant solves the system; the translation gauge
        must be quotiented away, leaving a single record."""
        with pytest.warns(RuntimeWarning, match="vanishing alpha"):
            nl, _ = make_power(2, a=0.0, b=0.0, s=2.0, r=2.0)
        prob = Problem(
            m=2,
            n=1,
            exponent=ExponentFunction.constant(2.0, 2),
            nonlinearity=nl,
            lam=1.0,
        )
        sols = find_multiple(prob, SolverConfig(starts=8, seed=0))
        assert len(sols.records) == 1
        assert np.allclose(sols.records[0].u.values, 0.0)

    def test_subspace_validation(self):
        with pytest.raises(ValueError):
            find_multiple(_double_well(), subspace=SUBSPACE_W)

    def test_extra_starts_seed_known_solution(self):
        prob = _double_well()
        cfg = SolverConfig(starts=1, seed=0, use_mountain_pass=False)
        sols = find_multiple(prob, cfg, extra_starts=[np.array([0.9, 1.1])])
        flats = [tuple(np.round(r.u.values.reshape(-1), 8)) for r in sols.records]
        assert (1.0, 1.0) in flats


def test_flat_connected_segments():
    with pytest.warns(RuntimeWarning, match="vanishing alpha"):
        nl, _ = make_power(2, a=0.0, b=0.0, s=2.0, r=2.0)
    prob = Problem(
        m=2,
        n=1,
        exponent=ExponentFunction.constant(2.0, 2),
        nonlinearity=nl,
        lam=1.0,
    )
    # two constants: the whole segment between them has zero residual
    assert _flat_connected(np.array([1.0, 1.0]), np.array([-2.0, -2.0]), prob, 1e-8)
    # a constant and a nonconstant: the midpoint already fails
    assert not _flat_connected(np.array([1.0, 1.0]), np.array([4.0, -4.0]), prob, 1e-8)


class TestLambdaSweep:
    def test_grid_validation(self):
        prob = _double_well()
        with pytest.raises(ValueError):
            lambda_sweep(prob, [])
        with pytest.raises(ValueError):
            lambda_sweep(prob, [1.0, -2.0])

    def test_counts_and_estimate_shape(self):
        prob = _double_well()
        cfg = SolverConfig(starts=6, seed=0)
        res = lambda_sweep(prob, [0.5, 1.0], cfg)
        assert isinstance(res, SweepResult)
        assert res.lambda_grid == (0.5, 1.0)
        assert len(res.counts) == 2
        assert len(res.solution_sets) == 2
        assert res.failures == ()
        # the double well keeps three critical points at both grid points
        assert all(c >= 3 for c in res.counts)
        assert res.a_estimate == ((0.5, 1.0),)
        # min action recorded per grid point
        assert res.min_actions[1] == pytest.approx(-0.5, abs=1e-9)
