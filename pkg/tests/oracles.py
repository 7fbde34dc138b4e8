"""Independent reference values for the tests.

Nothing here calls the package's estimators. Halfspace quantities use
Monte Carlo on the one-dimensional projection <u, x> (a halfspace only
sees that coordinate, and it is exactly standard normal), so 10^7
samples are cheap. Gradients use Stein's identity
D P_t f(y) = (e^{-t}/sigma) E[f(e^{-t} y + sigma z) z] rather than the
J-estimator's finite differences.
"""
import math

import numpy as np

MC_SAMPLES = 10_000_000
_CHUNK = 1_000_000


def _sigma(t):
    return math.sqrt(1.0 - math.exp(-2.0 * t))


def _mc_mean(fn, n=MC_SAMPLES, seed=0):
    rng = np.random.default_rng(seed)
    total = 0.0
    for start in range(0, n, _CHUNK):
        m = min(_CHUNK, n - start)
        total += float(np.sum(fn(rng, m)))
    return total / n


def _sgn(v):
    return np.where(v >= 0, 1.0, -1.0)


def mc_halfspace_mean(theta, seed=0):
    return _mc_mean(lambda r, m: _sgn(r.standard_normal(m) - theta), seed=seed)


def mc_halfspace_pt(theta, t, proj_y, seed=1):
    a, s = math.exp(-t) * proj_y, _sigma(t)
    return _mc_mean(lambda r, m: _sgn(a + s * r.standard_normal(m) - theta), seed=seed)


def mc_halfspace_grad_component(theta, t, proj_y, seed=2):
    """<D P_t f(y), u> via Stein's identity."""
    a, s = math.exp(-t) * proj_y, _sigma(t)

    def draw(r, m):
        g = r.standard_normal(m)
        return _sgn(a + s * g - theta) * g
    return math.exp(-t) / s * _mc_mean(draw, seed=seed)


def mc_halfspace_grad_inner(theta, t, proj_y1, proj_y2):
    return (mc_halfspace_grad_component(theta, t, proj_y1, seed=2)
            * mc_halfspace_grad_component(theta, t, proj_y2, seed=3))


def mc_halfspace_noise_sensitivity(theta, t, seed=4):
    rho, s = math.exp(-t), _sigma(t)

    def draw(r, m):
        x = r.standard_normal(m)
        y = rho * x + s * r.standard_normal(m)
        return (_sgn(x - theta) != _sgn(y - theta)).astype(float)
    return _mc_mean(draw, seed=seed)


def mc_halfspace_degree1_eval(theta, eta, proj_x):
    """(P_s f(x) - E f)/eta with e^{-s} = eta, both terms by Monte Carlo."""
    s = -math.log(eta)
    return (mc_halfspace_pt(theta, s, proj_x, seed=5) - mc_halfspace_mean(theta, seed=6)) / eta


# ---------------------------------------------------------------------------
# distance to linear juntas by brute-force search over projections


def parity3(X):
    return _sgn(X[:, 0]) * _sgn(X[:, 1]) * _sgn(X[:, 2])


def distance_to_2junta_in_r3(f, normals=400, points=3000, nodes=48, seed=0):
    """min over 2-planes V in R^3 of Pr[f(x) != sign E[f | P_V x]].

    For f depending on the first three coordinates only, planes with
    components outside R^3 see a noisier version of a projection inside
    R^3, so searching planes inside R^3 (indexed by their unit normal w)
    suffices. E[f | P_V x = v] is computed by Gauss-Hermite quadrature
    along w; the outer expectation by Monte Carlo over v.
    """
    rng = np.random.default_rng(seed)
    gh_x, gh_w = np.polynomial.hermite_e.hermegauss(nodes)
    gh_w = gh_w / gh_w.sum()
    # Fibonacci points on the upper hemisphere (w and -w give the same plane)
    i = np.arange(normals) + 0.5
    z = i / normals
    phi = math.pi * (1 + 5 ** 0.5) * i
    W = np.stack([np.sqrt(1 - z * z) * np.cos(phi), np.sqrt(1 - z * z) * np.sin(phi), z], axis=1)
    best = 1.0
    G = rng.standard_normal((points, 3))
    for w in W:
        V = G - np.outer(G @ w, w)  # samples of P_V x
        pts = V[:, None, :] + gh_x[None, :, None] * w[None, None, :]
        cond = (f(pts.reshape(-1, 3)).reshape(points, nodes) * gh_w).sum(axis=1)
        best = min(best, float(np.mean((1.0 - np.abs(cond)) / 2.0)))
    return best


# ---------------------------------------------------------------------------
# linear algebra helpers


def random_independent_set(ell, n, eta, gamma, rng, tries=1000):
    """Rows v_1..v_ell with |v_i| <= eta and dist(v_i, span(v_<i)) >= gamma."""
    for _ in range(tries):
        V = np.zeros((ell, n))
        ok = True
        for i in range(ell):
            v = rng.standard_normal(n)
            v *= rng.uniform(gamma, eta) / np.linalg.norm(v)
            if i:
                Q, _ = np.linalg.qr(V[:i].T)
                if np.linalg.norm(v - Q @ (Q.T @ v)) < gamma:
                    ok = False
                    break
            V[i] = v
        if ok:
            return V
    raise RuntimeError("could not draw an independent set")
