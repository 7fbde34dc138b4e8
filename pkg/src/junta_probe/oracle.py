"""Function oracles, query accounting, seeded Gaussian sampling, and the zoo
of ground-truth test functions.

Algorithms only ever call :meth:`FunctionOracle.evaluate_batch` (or
:meth:`FunctionOracle.evaluate`). The zoo objects also expose ground-truth
introspection (``relevant_subspace``, ``surface_area_bound``) which is meant
for the test harness only.
"""
from __future__ import annotations

import contextlib
import json
import math
import threading
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded, InvalidArgument, QueriesFrozen


def sign(v):
    """Elementwise sign with the tie rule sign(0) = +1."""
    return np.where(np.asarray(v) >= 0, 1.0, -1.0)


# ---------------------------------------------------------------------------
# query ledger


class QueryLedger:
    """Thread-safe query counter with an optional budget cap.

    A child ledger (see :meth:`child`) forwards every charge to its parent,
    so composed testers can report per-stage and overall totals at once.
    """

    def __init__(self, max_queries: Optional[int] = None, parent: "QueryLedger | None" = None):
        self._total = 0
        self.max_queries = max_queries
        self.parent = parent
        self._frozen = 0
        self._lock = threading.Lock() if parent is None else parent._lock

    @property
    def total_queries(self) -> int:
        return self._total

    def child(self, max_queries=None) -> "QueryLedger":
        return QueryLedger(max_queries=max_queries, parent=self)

    def _chain(self):
        node = self
        while node is not None:
            yield node
            node = node.parent

    def charge(self, m: int) -> None:
        m = int(m)
        if m < 0:
            raise InvalidArgument("cannot charge a negative number of queries")
        with self._lock:
            for node in self._chain():
                if node._frozen:
                    raise QueriesFrozen("oracle queried while the ledger is frozen")
                if node.max_queries is not None and node._total + m > node.max_queries:
                    raise BudgetExceeded(node.max_queries, node._total + m)
            for node in self._chain():
                node._total += m

    def reset(self) -> None:
        with self._lock:
            self._total = 0

    @contextlib.contextmanager
    def frozen(self):
        """Any query made inside this block raises :class:`QueriesFrozen`."""
        self._frozen += 1
        try:
            yield self
        finally:
            self._frozen -= 1


# ---------------------------------------------------------------------------
# sampler


class GaussianSampler:
    """Seeded source of Gaussian and uniform draws.

    Child samplers are derived with ``numpy.random.SeedSequence.spawn``:
    the i-th call to :meth:`child` on a sampler always yields the same
    stream, which is the counter scheme used for all derived seeds.
    """

    def __init__(self, seed: int = 0, _seq: "np.random.SeedSequence | None" = None):
        self.seed = int(seed)
        self._seq = _seq if _seq is not None else np.random.SeedSequence(self.seed)
        self._rng = np.random.Generator(np.random.PCG64(self._seq))
        self.draws = 0

    @property
    def spawn_key(self):
        return tuple(self._seq.spawn_key)

    def child(self) -> "GaussianSampler":
        (seq,) = self._seq.spawn(1)
        return GaussianSampler(self.seed, _seq=seq)

    def normal(self, size) -> np.ndarray:
        out = self._rng.standard_normal(size)
        self.draws += out.size
        return out

    def uniform(self, low=0.0, high=1.0, size=None):
        out = self._rng.uniform(low, high, size)
        self.draws += np.size(out)
        return out

    def signs(self, size) -> np.ndarray:
        return np.where(self._rng.integers(0, 2, size) == 1, 1.0, -1.0)

    def unit_vector(self, n: int) -> np.ndarray:
        g = self.normal(n)
        return g / np.linalg.norm(g)

    def orthonormal_rows(self, k: int, n: int) -> np.ndarray:
        """k orthonormal rows in R^n (Haar-random via QR with sign fix)."""
        g = self.normal((n, k))
        q, r = np.linalg.qr(g)
        q = q * np.where(np.diag(r) >= 0, 1.0, -1.0)
        return q.T.copy()


# ---------------------------------------------------------------------------
# zoo functions


class ZooFunction:
    """Base class: a vectorized map from (m, n) points to (m,) values."""

    kind = "abstract"
    dim: int

    def __call__(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    # harness-only introspection
    def relevant_subspace(self) -> np.ndarray:
        """Orthonormal rows spanning the subspace the function depends on."""
        raise NotImplementedError

    def surface_area_bound(self) -> float:
        raise NotImplementedError


@dataclass
class Constant(ZooFunction):
    c: float
    dim: int = 1
    kind = "constant"

    def __post_init__(self):
        if self.c not in (-1, 1, -1.0, 1.0):
            raise InvalidArgument("constant must be -1 or +1")
        self.c = float(self.c)

    def __call__(self, X):
        return np.full(np.shape(X)[0], self.c)

    def to_dict(self):
        return {"kind": self.kind, "c": self.c, "dim": self.dim}

    def relevant_subspace(self):
        return np.zeros((0, self.dim))

    def surface_area_bound(self):
        return 0.0


@dataclass
class Halfspace(ZooFunction):
    u: np.ndarray
    theta: float = 0.0
    kind = "halfspace"

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.float64).ravel()
        norm = np.linalg.norm(u)
        if not np.isfinite(norm) or norm == 0.0:
            raise InvalidArgument("halfspace normal must be a nonzero finite vector")
        # leave (numerically) unit normals untouched so JSON round-trips are exact
        self.u = u if abs(norm - 1.0) <= 8 * np.finfo(float).eps else u / norm
        self.theta = float(self.theta)

    @property
    def dim(self):
        return self.u.shape[0]

    def __call__(self, X):
        return sign(np.asarray(X) @ self.u - self.theta)

    def to_dict(self):
        return {"kind": self.kind, "u": self.u.tolist(), "theta": self.theta}

    def relevant_subspace(self):
        return self.u[None, :].copy()

    def surface_area_bound(self):
        return float(np.exp(-0.5 * self.theta ** 2) / math.sqrt(2 * math.pi))


def _check_table(table, k):
    table = np.asarray(table, dtype=np.float64).ravel()
    if table.shape[0] != 2 ** k:
        raise InvalidArgument(f"combiner table needs {2 ** k} entries, got {table.shape[0]}")
    if not np.all(np.abs(table) == 1):
        raise InvalidArgument("combiner table entries must be +-1")
    return table


def _table_lookup(table, bits):
    # bits: (m, k) boolean, bit i set when the i-th sign is +1
    idx = np.zeros(bits.shape[0], dtype=np.int64)
    for i in range(bits.shape[1]):
        idx |= bits[:, i].astype(np.int64) << i
    return table[idx]


@dataclass
class HalfspaceCombo(ZooFunction):
    """Boolean combination of halfspaces; table index = sum_i [h_i = +1] 2^i."""

    halfspaces: list
    table: np.ndarray
    kind = "halfspace_combo"

    def __post_init__(self):
        if not self.halfspaces:
            raise InvalidArgument("need at least one halfspace")
        dims = {h.dim for h in self.halfspaces}
        if len(dims) != 1:
            raise InvalidArgument("halfspaces must share a dimension")
        self.table = _check_table(self.table, len(self.halfspaces))

    @property
    def dim(self):
        return self.halfspaces[0].dim

    def __call__(self, X):
        bits = np.stack([h(X) > 0 for h in self.halfspaces], axis=1)
        return _table_lookup(self.table, bits)

    def to_dict(self):
        return {"kind": self.kind, "halfspaces": [h.to_dict() for h in self.halfspaces],
                "table": self.table.tolist()}

    def relevant_subspace(self):
        U = np.stack([h.u for h in self.halfspaces])
        q, _ = np.linalg.qr(U.T)
        return q.T[: np.linalg.matrix_rank(U)].copy()

    def surface_area_bound(self):
        return float(sum(h.surface_area_bound() for h in self.halfspaces))


@dataclass
class SignLiftedJunta(ZooFunction):
    """table[sign bits of x at ``coords``], e.g. parity when table is +-1 alternating."""

    table: np.ndarray
    coords: Sequence[int]
    dim: int
    kind = "sign_lifted"

    def __post_init__(self):
        self.coords = [int(c) for c in self.coords]
        if len(set(self.coords)) != len(self.coords) or any(
                c < 0 or c >= self.dim for c in self.coords):
            raise InvalidArgument("coords must be distinct indices below dim")
        self.table = _check_table(self.table, len(self.coords))

    def __call__(self, X):
        X = np.asarray(X)
        return _table_lookup(self.table, X[:, self.coords] >= 0)

    def to_dict(self):
        return {"kind": self.kind, "table": self.table.tolist(), "coords": list(self.coords),
                "dim": self.dim}

    def relevant_subspace(self):
        return np.eye(self.dim)[self.coords]

    def surface_area_bound(self):
        return len(self.coords) / math.sqrt(2 * math.pi)


@dataclass
class RotatedJunta(ZooFunction):
    """inner(rows @ x) for orthonormal ``rows`` of shape (k, n)."""

    inner: ZooFunction
    rows: np.ndarray
    kind = "rotated"

    def __post_init__(self):
        self.rows = np.atleast_2d(np.asarray(self.rows, dtype=np.float64))
        gram = self.rows @ self.rows.T
        if np.max(np.abs(gram - np.eye(gram.shape[0]))) > 1e-10:
            raise InvalidArgument("rotation rows must be orthonormal")
        if self.rows.shape[0] != self.inner.dim:
            raise InvalidArgument("rows must match the inner function's dimension")

    @property
    def dim(self):
        return self.rows.shape[1]

    def __call__(self, X):
        return self.inner(np.asarray(X) @ self.rows.T)

    def to_dict(self):
        return {"kind": self.kind, "inner": self.inner.to_dict(), "rows": self.rows.tolist()}

    def relevant_subspace(self):
        sub = self.inner.relevant_subspace()
        return sub @ self.rows

    def surface_area_bound(self):
        return self.inner.surface_area_bound()


def rotate_clockwise(theta):
    """90 degree clockwise rotation of a planar vector."""
    theta = np.asarray(theta, dtype=np.float64)
    return np.array([theta[1], -theta[0]])


@dataclass
class StripedOneJunta(ZooFunction):
    """The D1 stripe function: b_i on stripe (a_{i-1}, a_i] along theta, +1 elsewhere."""

    theta: np.ndarray
    breakpoints: np.ndarray
    bits: np.ndarray
    kind = "striped_one"
    dim = 2

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        a = np.asarray(self.breakpoints, dtype=np.float64)
        b = np.asarray(self.bits, dtype=np.float64)
        if abs(np.linalg.norm(self.theta) - 1.0) > 1e-12:
            raise InvalidArgument("theta must be a unit vector")
        if a[0] != -1.0 or a[-1] != 1.0 or np.any(np.diff(a) <= 0):
            raise InvalidArgument("breakpoints must increase strictly from -1 to 1")
        if b.shape[0] != a.shape[0] - 1 or not np.all(np.abs(b) == 1):
            raise InvalidArgument("need one +-1 bit per stripe")
        self.breakpoints, self.bits = a, b

    @property
    def s(self):
        return self.bits.shape[0]

    def stripe_index(self, X):
        """Stripe number 1..s for points in the strip, 0 outside."""
        p = np.asarray(X) @ self.theta
        j = np.searchsorted(self.breakpoints, p, side="left")
        return np.where((p > -1.0) & (p <= 1.0), j, 0)

    def _stripe_values(self, X):
        j = self.stripe_index(X)
        vals = np.ones(j.shape[0])
        inside = j > 0
        vals[inside] = self.bits[j[inside] - 1]
        return vals, inside

    def __call__(self, X):
        return self._stripe_values(X)[0]

    def to_dict(self):
        return {"kind": self.kind, "theta": self.theta.tolist(),
                "breakpoints": self.breakpoints.tolist(), "bits": self.bits.tolist()}

    def relevant_subspace(self):
        return self.theta[None, :].copy()

    def surface_area_bound(self):
        return (self.s + 1) / math.sqrt(2 * math.pi)


@dataclass
class CutStripedTwoJunta(StripedOneJunta):
    """The D2 function: b_i * sign(<x, theta_perp> - z) on stripe i, +1 elsewhere."""

    z: float = 0.0
    kind = "cut_striped_two"

    def __post_init__(self):
        super().__post_init__()
        self.z = float(self.z)
        self.theta_perp = rotate_clockwise(self.theta)

    def side(self, X):
        """+1 for points in S^+ (<x, theta_perp> >= z), -1 for S^-."""
        return sign(np.asarray(X) @ self.theta_perp - self.z)

    def __call__(self, X):
        vals, inside = self._stripe_values(X)
        vals[inside] *= self.side(np.asarray(X)[inside])
        return vals

    def to_dict(self):
        d = super().to_dict()
        d["z"] = self.z
        return d

    def relevant_subspace(self):
        return np.eye(2)

    def surface_area_bound(self):
        return (self.s + 2) / math.sqrt(2 * math.pi)


_KINDS = {}


def _register(cls):
    _KINDS[cls.kind] = cls


for _cls in (Constant, Halfspace, HalfspaceCombo, SignLiftedJunta, RotatedJunta,
             StripedOneJunta, CutStripedTwoJunta):
    _register(_cls)


def zoo_from_dict(d: dict) -> ZooFunction:
    """Inverse of ``to_dict`` for every zoo kind."""
    kind = d.get("kind")
    if kind == "constant":
        return Constant(d["c"], int(d.get("dim", 1)))
    if kind == "halfspace":
        return Halfspace(np.asarray(d["u"]), d.get("theta", 0.0))
    if kind == "halfspace_combo":
        return HalfspaceCombo([zoo_from_dict(h) for h in d["halfspaces"]], d["table"])
    if kind == "sign_lifted":
        return SignLiftedJunta(d["table"], d["coords"], int(d["dim"]))
    if kind == "rotated":
        return RotatedJunta(zoo_from_dict(d["inner"]), np.asarray(d["rows"]))
    if kind == "striped_one":
        return StripedOneJunta(d["theta"], d["breakpoints"], d["bits"])
    if kind == "cut_striped_two":
        return CutStripedTwoJunta(d["theta"], d["breakpoints"], d["bits"], d["z"])
    raise InvalidArgument(f"unknown zoo kind {kind!r}")


def zoo_to_json(fn: ZooFunction) -> str:
    return json.dumps(fn.to_dict(), sort_keys=True)


def zoo_from_json(text: str) -> ZooFunction:
    return zoo_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# oracle


class FunctionOracle:
    """Black-box access to a function R^n -> [-1, 1] with query counting."""

    def __init__(self, function, dim: Optional[int] = None, ledger: Optional[QueryLedger] = None):
        self.function = function
        self.dim = int(dim if dim is not None else function.dim)
        if self.dim <= 0:
            raise InvalidArgument("dimension must be positive")
        self.ledger = ledger if ledger is not None else QueryLedger()

    def evaluate_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.dim:
            raise InvalidArgument(f"expected points of shape (m, {self.dim}), got {X.shape}")
        self.ledger.charge(X.shape[0])
        return np.asarray(self.function(X), dtype=np.float64)

    def evaluate(self, x) -> float:
        return float(self.evaluate_batch(np.asarray(x, dtype=np.float64)[None, :])[0])

    def with_ledger(self, ledger: QueryLedger) -> "FunctionOracle":
        """Same function, different ledger (used to wrap for composition)."""
        return type(self)(self.function, self.dim, ledger)


class RecordingOracle(FunctionOracle):
    """Oracle that also keeps every queried point (for marginal checks)."""

    def __init__(self, function, dim=None, ledger=None):
        super().__init__(function, dim, ledger)
        self.points = []

    def evaluate_batch(self, X):
        out = super().evaluate_batch(X)
        self.points.append(np.array(X, dtype=np.float64))
        return out

    def recorded(self) -> np.ndarray:
        if not self.points:
            return np.empty((0, self.dim))
        return np.concatenate(self.points)


# ---------------------------------------------------------------------------
# constructors


def make_halfspace(u, theta=0.0, ledger=None) -> FunctionOracle:
    fn = Halfspace(np.asarray(u, dtype=np.float64), theta)
    return FunctionOracle(fn, ledger=ledger)


def make_constant(c, dim, ledger=None) -> FunctionOracle:
    return FunctionOracle(Constant(c, dim), ledger=ledger)


def parity_table(k: int) -> np.ndarray:
    """Table of the sign-lifted parity: product of the k signs."""
    idx = np.arange(2 ** k)
    ones = np.array([bin(i).count("1") for i in idx])
    # bit set means sign +1, so the product is (-1)^(number of unset bits)
    return np.where((k - ones) % 2 == 0, 1.0, -1.0)


def and_table(k: int) -> np.ndarray:
    table = -np.ones(2 ** k)
    table[-1] = 1.0
    return table


def make_parity(k: int, dim: int, ledger=None) -> FunctionOracle:
    return FunctionOracle(SignLiftedJunta(parity_table(k), list(range(k)), dim), ledger=ledger)


def random_halfspace_intersection(k: int, dim: int, sampler: GaussianSampler,
                                  theta_scale: float = 0.5, orthogonal=False) -> HalfspaceCombo:
    """AND of k random halfspaces in R^dim with thresholds uniform in +-theta_scale."""
    if orthogonal:
        normals = sampler.orthonormal_rows(k, dim)
    else:
        normals = np.stack([sampler.unit_vector(dim) for _ in range(k)])
    thetas = sampler.uniform(-theta_scale, theta_scale, k)
    return HalfspaceCombo([Halfspace(u, th) for u, th in zip(normals, thetas)], and_table(k))


def _d1_randomness(s: int, sampler: GaussianSampler):
    if int(s) != s or s < 1:
        raise InvalidArgument("s must be a positive integer")
    phi = sampler.uniform(0.0, 2.0 * math.pi)
    theta = np.array([math.cos(phi), math.sin(phi)])
    inner = np.sort(sampler.uniform(-1.0, 1.0, int(s) - 1))
    a = np.concatenate([[-1.0], inner, [1.0]])
    bits = sampler.signs(int(s))
    return theta, a, bits


def sample_d1(s: int, sampler: GaussianSampler, ledger=None) -> FunctionOracle:
    """Draw f ~ D1 (random stripes along a uniform direction theta in R^2)."""
    theta, a, bits = _d1_randomness(s, sampler)
    return FunctionOracle(StripedOneJunta(theta, a, bits), ledger=ledger)


def sample_d2(s: int, sampler: GaussianSampler, ledger=None) -> FunctionOracle:
    """Draw g ~ D2. The first draws coincide with ``sample_d1`` on the same seed."""
    theta, a, bits = _d1_randomness(s, sampler)
    z = float(sampler.uniform(-1.0, 1.0))
    return FunctionOracle(CutStripedTwoJunta(theta, a, bits, z), ledger=ledger)
