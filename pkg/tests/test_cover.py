import itertools
import math

import numpy as np
import pytest
from scipy.stats import norm

from junta_probe.cover import Cover, CoverFunction, build_cover, build_net, log_count_bound
from junta_probe.errors import CoverTooLarge, InvalidArgument


def _brute_force_count(net):
    """Count unit assignments on a 3-point net that pass every pairwise check."""
    assert net.size == 3
    K = net.max_units
    P = net.points
    J = net.allowed_jump(np.linalg.norm(P[:, None] - P[None], axis=2))
    r = np.arange(-K, K + 1)
    a, b, c = np.meshgrid(r, r, r, indexing="ij", sparse=True)
    ok = (np.abs(a - b) <= J[0, 1]) & (np.abs(a - c) <= J[0, 2]) & (np.abs(b - c) <= J[1, 2])
    return int(ok.sum())


def test_single_net_point_cover():
    cover = build_cover(1, 1.0, 0.5, c=0.001)
    assert cover.net.size == 1
    assert cover.count() == 2 * 200 + 1
    assert len(list(cover)) == 401


def test_zero_dimensional_cover():
    cover = build_cover(0, 0.25, 0.2)
    assert cover.count() == 1001
    g = next(iter(cover))
    assert g(np.zeros((3, 0))).tolist() == [-1.0] * 3


def test_dp_count_matches_brute_force():
    net = build_net(1, 1.0, 0.95, c=0.08)
    assert net.size == 3
    assert Cover(net).count() == _brute_force_count(net)


def test_enumeration_matches_count_on_small_instance():
    net = build_net(1, 1.0, 0.95, c=0.08)
    net.points = net.points[np.argsort(net.points[:, 0])][:2]
    cover = Cover(net)
    assert cover.count() < 100_000
    items = list(cover)
    assert len(items) == cover.count()
    assert len({tuple(g.units) for g in items}) == len(items)
    assert all(g.is_lipschitz() for g in items[:: max(1, len(items) // 500)])


def test_net_is_a_separated_subset_of_the_ball():
    net = build_net(2, 1.0, 0.5, c=0.5)
    P = net.points
    assert np.all(np.linalg.norm(P, axis=1) <= net.radius + 1e-9)
    D = np.linalg.norm(P[:, None] - P[None], axis=2) + np.eye(len(P)) * 1e9
    assert D.min() >= net.sep - 1e-12
    assert net.radius == pytest.approx(math.sqrt(2) * math.log(200))
    assert net.L == pytest.approx(1.0)


def test_one_dimensional_net_has_no_holes():
    net = build_net(1, 1.0, 0.2)
    P = np.sort(net.points[:, 0])
    assert np.allclose(np.diff(P), net.sep)
    assert P[-1] > net.radius - net.sep


def test_emitted_functions_satisfy_contract():
    cover = build_cover(1, 0.25, 0.2, cap=None)
    q = cover.net.quantum
    rng = np.random.default_rng(0)
    seen = itertools.islice(iter(cover), 300)
    sampled = (cover.sample(rng) for _ in range(100))
    for g in itertools.chain(seen, sampled):
        ratio = g.values / q
        assert np.allclose(ratio, np.round(ratio), atol=1e-9)
        assert np.all(np.abs(g.values) <= 1.0 + 1e-12)
        assert g.is_lipschitz()


def test_evaluation_is_nearest_point_and_zero_outside():
    cover = build_cover(1, 1.0, 0.5, c=1.0, cap=None)
    g = cover.sample(np.random.default_rng(1))
    P = cover.net.points
    Z = np.array([[P[3, 0] + 0.1 * cover.net.sep], [cover.net.radius + 1.0]])
    assert g(Z)[0] == g.values[3]
    assert g(Z)[1] == 0.0


def test_cover_too_large():
    with pytest.raises(CoverTooLarge) as exc:
        build_cover(1, 0.25, 0.2, cap=1000)
    assert exc.value.cap == 1000


def test_invalid_cover_arguments():
    with pytest.raises(InvalidArgument):
        build_net(1, 0.0, 0.2)
    with pytest.raises(InvalidArgument):
        build_net(-1, 1.0, 0.2)
    net = build_net(1, 1.0, 0.5)
    with pytest.raises(InvalidArgument):
        CoverFunction(net, np.full(net.size, 10 ** 6))


def test_uniform_sampling_on_small_cover():
    net = build_net(1, 1.0, 0.95, c=0.001)
    net.points = net.points[:1]
    cover = Cover(net)
    n = cover.count()
    rng = np.random.default_rng(0)
    draws = 40 * n
    counts = {}
    for _ in range(draws):
        key = tuple(cover.sample(rng).units)
        counts[key] = counts.get(key, 0) + 1
    assert len(counts) == n
    freq = np.array(list(counts.values()))
    chi2 = float(np.sum((freq - 40) ** 2 / 40))
    assert chi2 < n - 1 + 4 * math.sqrt(2 * (n - 1))


def test_soundness_on_random_pairs():
    """|g(x) - g(y)| <= 2L|x - y| + delta on random pairs in the ball.

    A slack of delta/50 is not enough: nearby pairs on either side of a
    cell boundary can differ by a whole allowed jump (see next test).
    """
    cover = build_cover(1, 1.0, 0.2, cap=None)
    L, delta, R = cover.net.L, cover.net.delta, cover.net.radius
    rng = np.random.default_rng(2)
    for _ in range(20):
        g = cover.sample(rng)
        X = rng.uniform(-R, R, (1000, 1))
        Y = X + rng.normal(0, 0.1, (1000, 1)) * rng.integers(0, 2, (1000, 1))
        Y = np.clip(Y, -R, R)
        lhs = np.abs(g(X) - g(Y))
        assert np.all(lhs <= 2 * L * np.abs(X - Y)[:, 0] + delta + 1e-12)


def test_soundness_slack_near_cell_boundaries_is_delta():
    """Across a Voronoi boundary two nearby points can differ by a full
    allowed jump, so the additive slack is delta, not delta/50."""
    cover = build_cover(1, 1.0, 0.2, cap=None)
    net = cover.net
    P = net.points[:, 0]
    h = net.size // 2
    steps = int(net.allowed_jump(np.diff(P)).min())
    jump = steps * net.quantum
    units = np.zeros(net.size, dtype=np.int64)
    units[h:] = steps
    g = CoverFunction(net, units)
    assert g.is_lipschitz()
    mid = 0.5 * (P[h - 1] + P[h])
    x, y = np.array([[mid - 1e-9]]), np.array([[mid + 1e-9]])
    gap = abs(g(x)[0] - g(y)[0])
    assert gap == pytest.approx(jump)
    assert gap > net.delta / 50
    assert gap <= 2 * net.L * 2e-9 + net.delta


def test_completeness_for_lipschitz_functions():
    cover = build_cover(1, 1.0, 0.2, cap=None)
    L, delta, R = cover.net.L, cover.net.delta, cover.net.radius
    grid = np.linspace(-R - 2, R + 2, 40001)
    w = norm.pdf(grid)
    w /= w.sum()
    rng = np.random.default_rng(3)
    for _ in range(50):
        knots = np.sort(rng.uniform(-R, R, 6))
        vals = np.clip(np.cumsum(rng.uniform(-1, 1, 6) * L * np.diff(np.r_[-R, knots])), -1, 1)

        def f(Z, knots=knots, vals=vals):
            return np.interp(np.asarray(Z)[:, 0], knots, vals)
        slopes = np.abs(np.diff(vals) / np.diff(knots))
        assert np.all(slopes <= 2 * L + 1e-9)
        g = cover.rounding_of(f)
        assert g.is_lipschitz() or np.max(slopes) > L
        dist = float(np.sum(w * np.abs(f(grid[:, None]) - g(grid[:, None]))))
        assert dist <= delta


def test_log_count_bound_formula():
    assert log_count_bound(1, 1.0, 0.2) == pytest.approx(20 * math.log(5) ** 2 / 0.2)
    assert log_count_bound(2, 0.25, 0.5, C=1) == pytest.approx(
        (math.sqrt(2) * math.log(2) ** 2 / 0.25) ** 2)
