import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from crowdctl.errors import DomainError, UnsupportedInputError
from crowdctl.meanfield import (CharacteristicFlow, EmpiricalMeasure, characteristic_flow,
                                dobrushin_constant, meanfield_lyapunov, push_forward,
                                read_measure, verify_dobrushin, wasserstein1, write_measure)
from crowdctl.particles import InitialConditionSpec, integrate, sample_initial_conditions
from crowdctl.riccati import ControlProblem, closed_form_y, exact_rate

X1_ORACLE = 0.761594155955765  # position of xi0 = (0, 1) at t = 1, alpha = 1
C1_ALPHA1 = 6.594885082800513  # 4 exp(1/2)
C1_ALPHA_1E2 = 10.87312731383618  # 4 exp(1)


def closed_position_factor(t, p):
    sa = p.sqrt_alpha
    T = p.horizon_T
    return sa * (np.sinh(T / sa) - np.sinh((T - t) / sa)) / np.cosh(T / sa)


def brute_w1(a, b):
    n = len(a)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, sum(np.hypot(*(a[i] - b[j])) for i, j in enumerate(perm)) / n)
    return best


def test_flow_at_time_zero_is_identity():
    flow = CharacteristicFlow(ControlProblem(1.0))
    pts = np.array([[0.3, -1.2], [2.0, 0.5]])
    np.testing.assert_array_equal(flow(0.0, pts), pts)


def test_flow_single_point():
    flow = CharacteristicFlow(ControlProblem(1.0))
    xi = characteristic_flow([0.0, 1.0], 1.0, flow)
    assert xi[0] == pytest.approx(X1_ORACLE, abs=1e-9)
    assert xi[1] == pytest.approx(1 / np.cosh(1.0), abs=1e-12)


@pytest.mark.parametrize("alpha", [1.0, 1e-2, 1e-4])
def test_position_factor_matches_closed_antiderivative(alpha):
    p = ControlProblem(alpha)
    flow = CharacteristicFlow(p)
    for t in (0.1, 0.5, 0.9, 1.0):
        assert flow.position_factor(t) == pytest.approx(closed_position_factor(t, p), abs=1e-9)


def test_flow_rejects_times_outside_horizon():
    flow = CharacteristicFlow(ControlProblem(1.0))
    with pytest.raises(DomainError):
        flow(1.5, np.zeros((1, 2)))


def test_push_forward_keeps_weights_and_mean_velocity_decays():
    flow = CharacteristicFlow(ControlProblem(1e-2))
    mu = EmpiricalMeasure([[0, 1], [1, -2], [0.5, 3]], [0.2, 0.3, 0.5])
    nu = push_forward(mu, 0.7, flow)
    np.testing.assert_array_equal(nu.weights, mu.weights)
    np.testing.assert_allclose(nu.v, mu.v * np.exp(-exact_rate(0.7, flow.problem)))


def test_push_forward_agrees_with_particle_integrator():
    p = ControlProblem(1e-2, 1.0, 100)
    ens = sample_initial_conditions(InitialConditionSpec(100, 3))
    traj = integrate(ens, p, 1e-8, 1e-8, output_times=[0.5, 1.0])
    flow = CharacteristicFlow(p)
    mu0 = EmpiricalMeasure.from_particles(ens.x, ens.v)
    for k, t in zip(traj.output_index, (0.5, 1.0)):
        pushed = push_forward(mu0, t, flow)
        assert np.max(np.abs(pushed.v - traj.v[k])) < 1e-5
        assert np.max(np.abs(pushed.x - traj.x[k])) < 1e-4


@pytest.mark.parametrize("n", [2, 3, 5, 6])
def test_w1_matches_permutation_brute_force(n):
    rng = np.random.default_rng(n)
    a, b = rng.normal(size=(n, 2)), rng.normal(size=(n, 2))
    w = wasserstein1(EmpiricalMeasure(a), EmpiricalMeasure(b))
    assert w == pytest.approx(brute_w1(a, b), abs=1e-12)


def test_w1_dirac():
    assert wasserstein1(EmpiricalMeasure([[0, 0]]), EmpiricalMeasure([[3, 4]])) == pytest.approx(5.0)


@given(seed=st.integers(0, 10_000), n=st.sampled_from([16, 32]))
@settings(max_examples=15, deadline=None)
def test_w1_metric_axioms(seed, n):
    rng = np.random.default_rng(seed)
    a, b, c = (EmpiricalMeasure(rng.normal(size=(n, 2))) for _ in range(3))
    assert wasserstein1(a, a) == 0.0
    ab, ba = wasserstein1(a, b), wasserstein1(b, a)
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab <= wasserstein1(a, c) + wasserstein1(c, b) + 1e-12


def test_w1_unequal_counts_by_replication():
    a = EmpiricalMeasure([[0, 0], [2, 0]])
    b = EmpiricalMeasure([[1, 0]])
    assert wasserstein1(a, b) == pytest.approx(1.0)
    c = EmpiricalMeasure([[0, 0], [0, 0], [2, 0]])
    # mass 2/3 at 0 and 1/3 at 2 against 1/2, 1/2: move 1/6 over distance 2
    assert wasserstein1(a, c) == pytest.approx(1.0 / 3.0)


def test_w1_weighted_linear_program():
    a = EmpiricalMeasure([[0, 0], [2, 0]], [0.25, 0.75])
    b = EmpiricalMeasure([[0, 0], [2, 0]], [0.75, 0.25])
    assert wasserstein1(a, b) == pytest.approx(1.0, abs=1e-9)
    uniform = EmpiricalMeasure([[0, 0], [2, 0]])
    assert wasserstein1(uniform, EmpiricalMeasure([[0, 0], [2, 0]], [0.5, 0.5])) == pytest.approx(0.0, abs=1e-12)


def test_w1_unsupported_sizes():
    rng = np.random.default_rng(0)
    w = rng.random(100)
    big = EmpiricalMeasure(rng.normal(size=(100, 2)), w / w.sum())
    with pytest.raises(UnsupportedInputError):
        wasserstein1(big, big)
    with pytest.raises(UnsupportedInputError):
        wasserstein1(EmpiricalMeasure(rng.normal(size=(1021, 2))), EmpiricalMeasure(rng.normal(size=(1019, 2))))


def test_measure_validation():
    with pytest.raises(DomainError):
        EmpiricalMeasure([[0, 0], [1, 1]], [0.7, 0.7])
    with pytest.raises(DomainError):
        EmpiricalMeasure(np.zeros((2, 3)))
    with pytest.raises(DomainError):
        EmpiricalMeasure([[np.inf, 0]])


def test_dobrushin_constants():
    c = dobrushin_constant(ControlProblem(1.0))
    assert c.lipschitz_CL == 1.0 and c.constant_C1 == pytest.approx(C1_ALPHA1, rel=1e-14)
    c = dobrushin_constant(ControlProblem(0.25))
    assert c.lipschitz_CL == 2.0 and c.constant_C1 == pytest.approx(C1_ALPHA_1E2, rel=1e-14)
    assert dobrushin_constant(ControlProblem(1.0, 1e-3)).constant_C1 == 1.0


@pytest.mark.parametrize("alpha", [1.0, 1e-2, 1e-4])
def test_dobrushin_bound_holds(alpha):
    rng = np.random.default_rng(1)
    mu = EmpiricalMeasure(rng.random((40, 2)))
    nu = EmpiricalMeasure(rng.random((40, 2)))
    rep = verify_dobrushin(mu, nu, np.linspace(0, 1, 11), CharacteristicFlow(ControlProblem(alpha)))
    assert rep.passed
    assert rep.distances[0] == pytest.approx(rep.initial_distance)
    assert len(rep.rows()) == 11


def test_dobrushin_identical_measures():
    mu = EmpiricalMeasure([[0.0, 1.0], [1.0, 0.0]])
    rep = verify_dobrushin(mu, mu, [0.0, 1.0], CharacteristicFlow(ControlProblem(1.0)))
    assert rep.passed and rep.max_ratio == 0.0


@pytest.mark.parametrize("alpha", [1.0, 1e-2, 1e-4])
def test_meanfield_lyapunov_bound(alpha):
    p = ControlProblem(alpha)
    flow = CharacteristicFlow(p)
    ens = sample_initial_conditions(InitialConditionSpec(250, 42))
    mu0 = EmpiricalMeasure.from_particles(ens.x, ens.v)
    L0 = meanfield_lyapunov(mu0, float(closed_form_y(0.0, p)))
    for t in np.linspace(0, 1, 21):
        L = meanfield_lyapunov(push_forward(mu0, t, flow), float(closed_form_y(t, p)))
        assert L <= L0 * np.exp(-exact_rate(t, p)) * (1 + 1e-10)


def test_meanfield_lyapunov_value():
    assert meanfield_lyapunov(EmpiricalMeasure([[0, 1], [0, -3]]), 0.5) == pytest.approx(2.5)
    with pytest.raises(DomainError):
        meanfield_lyapunov(EmpiricalMeasure([[0, 1]]), -1.0)


def test_measure_roundtrip(tmp_path):
    rng = np.random.default_rng(4)
    mu = EmpiricalMeasure(rng.normal(size=(7, 2)))
    write_measure(mu, tmp_path / "u.txt")
    back = read_measure(tmp_path / "u.txt")
    np.testing.assert_array_equal(back.points, mu.points)
    w = rng.random(7)
    nu = EmpiricalMeasure(mu.points, w / w.sum())
    write_measure(nu, tmp_path / "w.txt")
    back = read_measure(str(tmp_path / "w.txt"))
    np.testing.assert_allclose(back.weights, nu.weights, rtol=0, atol=1e-15)


def test_read_measure_text_and_errors():
    mu = read_measure("# comment\n0 1\n\n2 3  # trailing\n")
    assert mu.n == 2 and mu.is_uniform
    with pytest.raises(DomainError, match="line 1"):
        read_measure("0 1 2 3\n")
    with pytest.raises(DomainError):
        read_measure("0 1 0.5\n1 1\n")
    with pytest.raises(DomainError):
        read_measure("# nothing\n")


def test_empirical_convergence_in_particle_number():
    p = ControlProblem(1e-2)
    flow = CharacteristicFlow(p)
    medians = []
    for n in (16, 64, 256):
        dists = []
        for seed in range(10):
            a = sample_initial_conditions(InitialConditionSpec(n, seed))
            b = sample_initial_conditions(InitialConditionSpec(4 * n, 1000 + seed))
            mu = push_forward(EmpiricalMeasure.from_particles(a.x, a.v), 1.0, flow)
            nu = push_forward(EmpiricalMeasure.from_particles(b.x, b.v), 1.0, flow)
            dists.append(wasserstein1(mu, nu))
        medians.append(np.median(dists))
    assert medians[0] >= medians[1] >= medians[2]


def test_flow_cache_is_reused():
    flow = CharacteristicFlow(ControlProblem(1e-2))
    a = flow.position_factor(0.3)
    assert flow.position_factor(0.3) == a
