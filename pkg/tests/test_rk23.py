import numpy as np
import pytest

from crowdctl import rk23
from crowdctl.errors import StiffnessError


def test_tableau_consistency():
    for i, row in enumerate(rk23.A):
        assert sum(row) == pytest.approx(rk23.C[i])
    assert rk23.B3.sum() == pytest.approx(1.0)
    assert rk23.B2.sum() == pytest.approx(1.0)
    # FSAL: last stage row equals the propagating weights
    np.testing.assert_allclose(rk23.A[3], rk23.B3[:3])


def test_order_conditions():
    b, c = rk23.B3, rk23.C
    a = np.zeros((4, 4))
    for i, row in enumerate(rk23.A):
        a[i, :len(row)] = row
    assert b @ c == pytest.approx(0.5)
    assert b @ c ** 2 == pytest.approx(1 / 3)
    assert b @ a @ c == pytest.approx(1 / 6)
    assert rk23.B2 @ c == pytest.approx(0.5)


def test_exponential_decay_accuracy():
    t, y, _ = rk23.solve(lambda t, y: -y, (0, 2), [1.0], atol=1e-9, rtol=1e-9)
    np.testing.assert_allclose(y[:, 0], np.exp(-t), atol=1e-7)


def test_lands_on_requested_times():
    stops = [0.1, 0.37, 0.5]
    t, _, _ = rk23.solve(lambda t, y: np.cos(t) * np.ones_like(y), (0, 1), [0.0], t_eval=stops)
    for s in stops:
        assert s in t.tolist()
    assert t[-1] == 1.0


def test_error_shrinks_with_tolerance():
    errs = []
    for tol in (1e-4, 1e-6, 1e-8):
        t, y, _ = rk23.solve(lambda t, y: np.array([y[1], -y[0]]), (0, 3), [0.0, 1.0],
                             atol=tol, rtol=tol)
        errs.append(np.max(np.abs(y[:, 0] - np.sin(t))))
    assert errs[0] > errs[1] > errs[2]


def test_step_underflow():
    with pytest.raises(StiffnessError):
        rk23.solve(lambda t, y: -y, (0, 1), [1.0], max_step=1e-16)
