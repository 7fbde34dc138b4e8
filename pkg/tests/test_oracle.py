import json

import numpy as np
import pytest

from junta_probe.errors import BudgetExceeded, InvalidArgument, QueriesFrozen
from junta_probe.oracle import (Constant, CutStripedTwoJunta, FunctionOracle, GaussianSampler,
                                Halfspace, HalfspaceCombo, QueryLedger, RecordingOracle,
                                RotatedJunta, SignLiftedJunta, StripedOneJunta, and_table,
                                make_constant, make_halfspace, make_parity, parity_table,
                                random_halfspace_intersection, sample_d1, sample_d2, sign,
                                zoo_from_json, zoo_to_json)


def test_sign_ties_go_positive():
    assert sign(np.array([-1.0, 0.0, 2.0])).tolist() == [-1.0, 1.0, 1.0]


def test_ledger_counts_batches_exactly():
    f = make_halfspace(np.eye(4)[0])
    f.evaluate_batch(np.zeros((7, 4)))
    f.evaluate(np.zeros(4))
    assert f.ledger.total_queries == 8


def test_ledger_cap_is_checked_before_charging():
    ledger = QueryLedger(max_queries=10)
    f = make_halfspace(np.eye(3)[0], ledger=ledger)
    f.evaluate_batch(np.zeros((10, 3)))
    with pytest.raises(BudgetExceeded):
        f.evaluate(np.zeros(3))
    assert ledger.total_queries == 10


def test_child_ledger_forwards_and_respects_parent_cap():
    parent = QueryLedger(max_queries=5)
    child = parent.child()
    child.charge(3)
    assert parent.total_queries == 3 and child.total_queries == 3
    with pytest.raises(BudgetExceeded):
        child.charge(3)
    assert parent.total_queries == 3


def test_frozen_ledger_refuses_queries():
    f = make_constant(1.0, 2)
    with f.ledger.frozen():
        with pytest.raises(QueriesFrozen):
            f.evaluate(np.zeros(2))
    f.evaluate(np.zeros(2))


def test_wrong_shape_is_rejected():
    with pytest.raises(InvalidArgument):
        make_halfspace(np.eye(3)[0]).evaluate_batch(np.zeros((2, 4)))


def test_sampler_children_are_reproducible_and_distinct():
    a, b = GaussianSampler(5), GaussianSampler(5)
    assert np.array_equal(a.normal(4), b.normal(4))
    ca1, ca2 = a.child(), a.child()
    cb1 = b.child()
    x1, x2, y1 = ca1.normal(3), ca2.normal(3), cb1.normal(3)
    assert np.array_equal(x1, y1)
    assert not np.array_equal(x1, x2)


def test_orthonormal_rows():
    R = GaussianSampler(1).orthonormal_rows(3, 10)
    assert np.allclose(R @ R.T, np.eye(3), atol=1e-12)


def test_parity_and_and_tables():
    X = np.array([[1.0, 1.0, 1.0], [-1.0, 1.0, 1.0], [-1.0, -1.0, 1.0]])
    par = SignLiftedJunta(parity_table(3), [0, 1, 2], 3)
    assert par(X).tolist() == [1.0, -1.0, 1.0]
    conj = SignLiftedJunta(and_table(2), [0, 1], 3)
    assert conj(X).tolist() == [1.0, -1.0, -1.0]


def test_halfspace_combo_matches_direct_and():
    s = GaussianSampler(3)
    combo = random_halfspace_intersection(2, 5, s)
    X = GaussianSampler(4).normal((500, 5))
    direct = np.where((X @ combo.halfspaces[0].u >= combo.halfspaces[0].theta)
                      & (X @ combo.halfspaces[1].u >= combo.halfspaces[1].theta), 1.0, -1.0)
    assert np.array_equal(combo(X), direct)


def test_rotated_junta_depends_only_on_rows():
    s = GaussianSampler(0)
    rows = s.orthonormal_rows(1, 6)
    f = RotatedJunta(Halfspace(np.array([1.0]), 0.2), rows)
    X = s.normal((200, 6))
    noise = s.normal((200, 6))
    noise -= np.outer(noise @ rows[0], rows[0])
    assert np.array_equal(f(X), f(X + noise))
    assert np.allclose(f.relevant_subspace(), rows)


def test_constant_rejects_non_sign_values():
    with pytest.raises(InvalidArgument):
        Constant(0.5, 2)


@pytest.mark.parametrize("fn", [
    Constant(1.0, 3),
    Halfspace(np.array([1.0, 2.0, 0.0]), 0.3),
    SignLiftedJunta(parity_table(2), [0, 2], 3),
    RotatedJunta(Halfspace(np.array([1.0]), 0.0), np.array([[0.6, 0.8, 0.0]])),
])
def test_zoo_json_round_trip(fn):
    back = zoo_from_json(zoo_to_json(fn))
    X = GaussianSampler(2).normal((300, 3))
    assert np.array_equal(fn(X), back(X))
    assert json.loads(zoo_to_json(back)) == json.loads(zoo_to_json(fn))


def test_d1_d2_share_stripes_under_same_seed():
    f = sample_d1(50, GaussianSampler(9)).function
    g = sample_d2(50, GaussianSampler(9)).function
    assert np.array_equal(f.breakpoints, g.breakpoints)
    assert np.array_equal(f.bits, g.bits)
    assert isinstance(g, CutStripedTwoJunta) and isinstance(f, StripedOneJunta)


def test_stripe_function_is_one_outside_the_strip():
    f = sample_d1(10, GaussianSampler(0)).function
    X = np.array([2.0 * f.theta, -1.5 * f.theta])
    assert f(X).tolist() == [1.0, 1.0]


def test_d2_values_are_bit_times_side():
    g = sample_d2(20, GaussianSampler(1)).function
    X = GaussianSampler(2).normal((1000, 2)) * 0.5
    j = g.stripe_index(X)
    inside = j > 0
    expect = np.ones(len(X))
    expect[inside] = g.bits[j[inside] - 1] * sign(X[inside] @ g.theta_perp - g.z)
    assert np.array_equal(g(X), expect)


def test_recording_oracle_keeps_points():
    f = RecordingOracle(Halfspace(np.array([1.0, 0.0]), 0.0))
    f.evaluate_batch(np.ones((3, 2)))
    f.evaluate(np.zeros(2))
    assert f.recorded().shape == (4, 2)


def test_make_parity_dimension():
    f = make_parity(3, 8)
    assert isinstance(f, FunctionOracle) and f.dim == 8


def test_combo_table_size_checked():
    with pytest.raises(InvalidArgument):
        HalfspaceCombo([Halfspace(np.array([1.0, 0.0]))], [1.0, -1.0, 1.0])
