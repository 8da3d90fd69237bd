"""The formal matrix ring M2(R;s).

Elements are 2x2 matrices over a finite ring ``R`` with product

    [a b] [a' b']   [aa' + s^2 bc'   ab' + bd'   ]
    [c d] [c' d'] = [ca' + dc'       s^2 cb' + dd']

for a central ``s``.  A matrix ``(a, b, c, d)`` has the canonical index
``((a*n + b)*n + c)*n + d``; exhaustive work is done on index arrays with
numpy table lookups, scalar work on :class:`FMatrix` tuples.
"""

from __future__ import annotations

import json
import re
import threading
from dataclasses import dataclass
from typing import Callable, Iterator, NamedTuple

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .config import Caps
from .errors import CapExceeded, HypothesisError, TheoremViolation
from .rings import FiniteRing, RingAnalysis, analyze, j_s_mask


class FMatrix(NamedTuple):
    a: int
    b: int
    c: int
    d: int

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]


class Split(NamedTuple):
    """Entry arrays of a batch of matrices."""
    a: np.ndarray
    b: np.ndarray
    c: np.ndarray
    d: np.ndarray


class FMContext:
    """The ring M2(R;s) for a finite ring R and central s.

    Contexts are immutable; bulk data (unit masks, idempotent lists, the
    conjugacy index) is computed on first use under a lock and then shared.
    """

    def __init__(self, base: FiniteRing, s, analysis: RingAnalysis | None = None,
                 caps: Caps | None = None):
        self.base = base
        self.analysis = analysis if analysis is not None else analyze(base)
        self.caps = caps or Caps()
        self.s = base.element(s)
        if not self.analysis.center_mask[self.s]:
            raise HypothesisError(f"s={base.name(self.s)} is not central in {base.label}")
        self.s_squared = base.m(self.s, self.s)
        self.n = base.size
        self.size = self.n**4
        an = self.analysis
        self.s_is_unit = bool(an.unit_mask[self.s])
        self.s_in_jacobson = bool(an.jacobson_mask[self.s])
        self.is_local = an.is_local
        self.is_commutative = an.is_commutative
        self.j_s = j_s_mask(base, an, self.s)
        self._A = base.add.astype(np.intp)
        self._M = base.mul.astype(np.intp)
        self._N = base.neg.astype(np.intp)
        self._lock = threading.RLock()
        self._cache: dict = {}

    def __repr__(self):
        return f"FMContext(M2({self.base.label}; s={self.base.name(self.s)}))"

    @property
    def label(self) -> str:
        return f"M2({self.base.label};{self.base.name(self.s)})"

    # -- element encoding ---------------------------------------------
    @property
    def identity(self) -> FMatrix:
        z, o = self.base.zero, self.base.one
        return FMatrix(o, z, z, o)

    @property
    def zero(self) -> FMatrix:
        z = self.base.zero
        return FMatrix(z, z, z, z)

    def diag(self, x: int, y: int) -> FMatrix:
        z = self.base.zero
        return FMatrix(x, z, z, y)

    def index(self, A: FMatrix) -> int:
        n = self.n
        return ((A.a * n + A.b) * n + A.c) * n + A.d

    def matrix(self, idx: int) -> FMatrix:
        n = self.n
        idx = int(idx)
        return FMatrix(idx // n**3, (idx // n**2) % n, (idx // n) % n, idx % n)

    def split(self, idx) -> Split:
        idx = np.asarray(idx, dtype=np.int64)
        n = self.n
        return Split(idx // n**3, (idx // n**2) % n, (idx // n) % n, idx % n)

    def join(self, X: Split) -> np.ndarray:
        n = self.n
        a, b, c, d = (np.asarray(v, dtype=np.int64) for v in X)
        return ((a * n + b) * n + c) * n + d

    def format(self, A: FMatrix) -> str:
        nm = self.base.name
        return f"[[{nm(A.a)},{nm(A.b)}],[{nm(A.c)},{nm(A.d)}]]"

    def to_json(self, A: FMatrix) -> dict:
        nm = self.base.name
        return {"a": nm(A.a), "b": nm(A.b), "c": nm(A.c), "d": nm(A.d)}

    # -- vectorized arithmetic ----------------------------------------
    def vmul(self, X: Split, Y: Split) -> Split:
        A, M, s2 = self._A, self._M, self.s_squared
        return Split(
            A[M[X.a, Y.a], M[s2, M[X.b, Y.c]]],
            A[M[X.a, Y.b], M[X.b, Y.d]],
            A[M[X.c, Y.a], M[X.d, Y.c]],
            A[M[s2, M[X.c, Y.b]], M[X.d, Y.d]],
        )

    def vadd(self, X: Split, Y: Split) -> Split:
        A = self._A
        return Split(A[X.a, Y.a], A[X.b, Y.b], A[X.c, Y.c], A[X.d, Y.d])

    def vneg(self, X: Split) -> Split:
        N = self._N
        return Split(N[X.a], N[X.b], N[X.c], N[X.d])

    def vsub(self, X: Split, Y: Split) -> Split:
        return self.vadd(X, self.vneg(Y))

    def vconst(self, A: FMatrix, length: int = 1) -> Split:
        return Split(*(np.full(length, v, dtype=np.intp) for v in A))

    def mul_idx(self, x, y) -> np.ndarray:
        return self.join(self.vmul(self.split(x), self.split(y)))

    def one_minus_idx(self, x) -> np.ndarray:
        return self.join(self.vsub(self.vconst(self.identity), self.split(x)))

    # -- caching ---------------------------------------------------------
    def cached(self, key, compute: Callable):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = compute()
            return self._cache[key]

    def require_enumerable(self, what: str = "enumeration"):
        if self.size > self.caps.enumeration_cap:
            raise CapExceeded(f"{what} of {self.label}", self.size, self.caps.enumeration_cap)

    def require_unit_search(self, what: str = "unit-group search"):
        self.require_enumerable(what)
        if self.n > self.caps.similarity_cap:
            raise CapExceeded(f"{what} of {self.label} (|R|)", self.n, self.caps.similarity_cap)

    def all_indices(self) -> np.ndarray:
        self.require_enumerable()
        return np.arange(self.size, dtype=np.int64)

    def all_split(self) -> Split:
        return self.cached("all_split", lambda: self.split(self.all_indices()))

    # -- bulk structure --------------------------------------------------
    def unit_strategies(self) -> list[str]:
        """Unit tests valid for this context, in dispatch order."""
        out = []
        if self.is_commutative:
            out.append("determinant")
        if self.is_local and self.s_in_jacobson:
            out.append("diagonal")
        out.append("search")
        return out

    def unit_mask(self, strategy: str | None = None) -> np.ndarray:
        strategy = strategy or self.unit_strategies()[0]
        if strategy not in self.unit_strategies():
            raise HypothesisError(f"unit strategy {strategy!r} does not apply to {self.label}")
        return self.cached(("units", strategy), lambda: _unit_mask(self, strategy))

    def unit_indices(self) -> np.ndarray:
        return self.cached("unit_indices", lambda: np.flatnonzero(self.unit_mask()))

    def inverse_indices(self) -> np.ndarray:
        """Right inverse of every matrix from the exhaustive column search (-1 if none)."""
        return self.cached("inverses", lambda: _search_inverses(self)[1])

    def jacobson_mask(self) -> np.ndarray:
        """Membership in J(M2(R;s)) by the entrywise pattern [[J, J_s], [J_s, J]]."""
        def compute():
            X = self.all_split()
            J, Js = self.analysis.jacobson_mask, self.j_s
            return J[X.a] & Js[X.b] & Js[X.c] & J[X.d]
        return self.cached("jacobson", compute)

    def quasi_regular_mask(self) -> np.ndarray:
        """J(M2(R;s)) computed from quasi-regularity inside the finite ring."""
        return self.cached("quasi_regular", lambda: _quasi_regular(self))

    def idempotent_indices(self) -> np.ndarray:
        def compute():
            out = []
            for lo, hi in _chunks(self.size):
                idx = np.arange(lo, hi, dtype=np.int64)
                out.append(idx[self.mul_idx(idx, idx) == idx])
            return np.concatenate(out)
        self.require_enumerable("idempotent enumeration")
        return self.cached("idempotents", compute)

    def nil_mask(self) -> np.ndarray:
        """Nilpotent matrices: ``X^(2^k) = 0`` once ``2^k >= |M2|``."""
        def compute():
            steps = max(1, int(np.ceil(np.log2(self.size)))) + 1
            zero = self.index(self.zero)
            out = np.zeros(self.size, dtype=bool)
            for lo, hi in _chunks(self.size):
                p = np.arange(lo, hi, dtype=np.int64)
                for _ in range(steps):
                    p = self.mul_idx(p, p)
                out[lo:hi] = p == zero
            return out
        self.require_enumerable("nilpotent scan")
        return self.cached("nil", compute)

    def classes(self) -> "ConjugacyIndex":
        self.require_unit_search("conjugacy index")
        return self.cached("classes", lambda: ConjugacyIndex.build(self))


def _chunks(size: int, step: int = 1 << 18):
    for lo in range(0, size, step):
        yield lo, min(size, lo + step)


# ---------------------------------------------------------------------------
# units


def _det_idx(ctx: FMContext, X: Split) -> np.ndarray:
    A, M, N, s2 = ctx._A, ctx._M, ctx._N, ctx.s_squared
    return A[M[X.a, X.d], N[M[s2, M[X.b, X.c]]]]


def _linear_solution_tables(ctx: FMContext):
    """For targets t in {0, 1}: masks over (p, q, x, y) of ``p x + q y = t`` and ``x p + y q = t``."""
    n = ctx.n
    A, M = ctx._A, ctx._M
    r = np.arange(n)
    # right: p x + q y ; shape (p, q, x, y)
    right = A[M[r[:, None, None, None], r[None, None, :, None]], M[r[None, :, None, None], r[None, None, None, :]]]
    left = A[M[r[None, None, :, None], r[:, None, None, None]], M[r[None, None, None, :], r[None, :, None, None]]]
    out = {}
    for t, val in ((0, ctx.base.zero), (1, ctx.base.one)):
        out[("R", t)] = (right == val).reshape(n * n, n * n)
        out[("L", t)] = (left == val).reshape(n * n, n * n)
    return out


def _search_inverses(ctx: FMContext):
    """Exhaustive inverse search, decomposed by columns/rows of the unknown inverse.

    ``XY = I`` splits into two independent 2-unknown systems (one per column of
    Y) and ``YX = I`` into one per row of Y, so trying every Y is equivalent
    to trying every (column, column) and (row, row) pair.
    """
    def compute():
        ctx.require_enumerable("inverse search")
        n = ctx.n
        T = _linear_solution_tables(ctx)
        s2 = ctx.s_squared
        M = ctx._M
        unit = np.zeros(ctx.size, dtype=bool)
        inv = np.full(ctx.size, -1, dtype=np.int64)
        for lo, hi in _chunks(ctx.size, max(1, (1 << 22) // (n * n))):
            X = ctx.split(np.arange(lo, hi, dtype=np.int64))
            pq = lambda p, q: p * n + q  # noqa: E731
            col1 = T[("R", 1)][pq(X.a, M[s2, X.b])] & T[("R", 0)][pq(X.c, X.d)]
            col2 = T[("R", 0)][pq(X.a, X.b)] & T[("R", 1)][pq(M[s2, X.c], X.d)]
            row1 = T[("L", 1)][pq(X.a, M[s2, X.c])] & T[("L", 0)][pq(X.b, X.d)]
            row2 = T[("L", 0)][pq(X.a, X.c)] & T[("L", 1)][pq(M[s2, X.b], X.d)]
            ok = col1.any(1) & col2.any(1) & row1.any(1) & row2.any(1)
            unit[lo:hi] = ok
            k1, k2 = col1.argmax(1), col2.argmax(1)
            # column 1 solves for (a', c'), column 2 for (b', d')
            Y = Split(k1 // n, k2 // n, k1 % n, k2 % n)
            inv[lo:hi] = np.where(ok, ctx.join(Y), -1)
        return unit, inv
    return ctx.cached("inverse_search", compute)


def _unit_mask(ctx: FMContext, strategy: str) -> np.ndarray:
    if strategy == "search":
        return _search_inverses(ctx)[0]
    X = ctx.all_split()
    U = ctx.analysis.unit_mask
    if strategy == "determinant":
        return U[_det_idx(ctx, X)]
    if strategy == "diagonal":
        return U[X.a] & U[X.d]
    raise ValueError(strategy)


QR_BRUTE_FORCE_LIMIT = 8192


def _quasi_regular(ctx: FMContext) -> np.ndarray:
    """X in J iff 1 - YX and 1 - XY are units for every Y (units by exhaustive search).

    Small rings are swept over every Y.  Larger ones are filtered with a few
    Y first; the survivors C contain J, and when C turns out to be a two-sided
    ideal whose elements x all have 1 - x a unit, C is contained in J as well,
    so C = J.  If that certificate fails the full sweep runs on C.
    """
    unit = ctx.unit_mask("search")
    n4 = ctx.size
    cand = np.arange(n4, dtype=np.int64)
    if n4 > QR_BRUTE_FORCE_LIMIT:
        gens = _ring_generators(ctx)
        rng = np.random.default_rng(ctx.caps.seed)
        probe = np.concatenate([[ctx.index(ctx.identity)], gens, rng.integers(0, n4, 64)])
        cand = _qr_filter(ctx, unit, cand, probe)
        if _is_quasi_regular_ideal(ctx, unit, cand, gens):
            out = np.zeros(n4, dtype=bool)
            out[cand] = True
            return out
    cand = _qr_filter(ctx, unit, cand, np.arange(n4, dtype=np.int64))
    out = np.zeros(n4, dtype=bool)
    out[cand] = True
    return out


def _qr_filter(ctx: FMContext, unit: np.ndarray, cand: np.ndarray, ys: np.ndarray) -> np.ndarray:
    pos = 0
    while pos < len(ys) and len(cand):
        block = max(1, min(4096, (1 << 21) // len(cand)))
        chunk = ys[pos:pos + block]
        pos += block
        Xc = ctx.split(cand[:, None])
        Yb = ctx.split(chunk[None, :])
        left = unit[ctx.one_minus_idx(ctx.join(ctx.vmul(Yb, Xc)))]
        right = unit[ctx.one_minus_idx(ctx.join(ctx.vmul(Xc, Yb)))]
        cand = cand[(left & right).all(axis=1)]
    return cand


def _ring_generators(ctx: FMContext) -> np.ndarray:
    """diag(r,0), diag(0,r), E12, E21: their sums of products give every matrix."""
    z, o = ctx.base.zero, ctx.base.one
    out = [ctx.index(ctx.diag(r, z)) for r in range(ctx.n)]
    out += [ctx.index(ctx.diag(z, r)) for r in range(ctx.n)]
    out += [ctx.index(FMatrix(z, o, z, z)), ctx.index(FMatrix(z, z, o, z))]
    return np.array(out, dtype=np.int64)


def _is_quasi_regular_ideal(ctx, unit, cand, gens) -> bool:
    member = np.zeros(ctx.size, dtype=bool)
    member[cand] = True
    if not unit[ctx.one_minus_idx(cand)].all():
        return False
    X = ctx.split(cand)
    for lo, hi in _chunks(len(cand), max(1, (1 << 22) // len(cand))):
        Y = ctx.split(cand[lo:hi, None])
        if not member[ctx.join(ctx.vadd(Y, Split(*(v[None, :] for v in X))))].all():
            return False
    for g in gens:
        G = ctx.vconst(ctx.matrix(g), len(cand))
        if not member[ctx.join(ctx.vmul(G, X))].all() or not member[ctx.join(ctx.vmul(X, G))].all():
            return False
    return True


# ---------------------------------------------------------------------------
# scalar arithmetic


def fm_mul(ctx: FMContext, A: FMatrix, B: FMatrix) -> FMatrix:
    ad, ml, s2 = ctx.base.add_l, ctx.base.mul_l, ctx.s_squared
    return FMatrix(
        ad[ml[A.a][B.a]][ml[s2][ml[A.b][B.c]]],
        ad[ml[A.a][B.b]][ml[A.b][B.d]],
        ad[ml[A.c][B.a]][ml[A.d][B.c]],
        ad[ml[s2][ml[A.c][B.b]]][ml[A.d][B.d]],
    )


def fm_add(ctx: FMContext, A: FMatrix, B: FMatrix) -> FMatrix:
    ad = ctx.base.add_l
    return FMatrix(ad[A.a][B.a], ad[A.b][B.b], ad[A.c][B.c], ad[A.d][B.d])


def fm_neg(ctx: FMContext, A: FMatrix) -> FMatrix:
    ng = ctx.base.neg_l
    return FMatrix(ng[A.a], ng[A.b], ng[A.c], ng[A.d])


def fm_sub(ctx: FMContext, A: FMatrix, B: FMatrix) -> FMatrix:
    return fm_add(ctx, A, fm_neg(ctx, B))


def fm_scale(ctx: FMContext, r: int, A: FMatrix) -> FMatrix:
    """``rA``: every entry multiplied on the left by ``r``."""
    ml = ctx.base.mul_l
    return FMatrix(ml[r][A.a], ml[r][A.b], ml[r][A.c], ml[r][A.d])


def fm_pow(ctx: FMContext, A: FMatrix, k: int) -> FMatrix:
    out = ctx.identity
    for _ in range(k):
        out = fm_mul(ctx, out, A)
    return out


def det_s(ctx: FMContext, A: FMatrix) -> int:
    """``ad - s^2 bc``; only defined over a commutative base."""
    if not ctx.is_commutative:
        raise HypothesisError(f"det_s needs a commutative base ring; {ctx.base.label} is not")
    R = ctx.base
    return R.sub(R.m(A.a, A.d), R.m(ctx.s_squared, R.m(A.b, A.c)))


def tr(ctx: FMContext, A: FMatrix) -> int:
    return ctx.base.a(A.a, A.d)


def _scalar_inverse_search(ctx: FMContext, A: FMatrix) -> FMatrix | None:
    R = ctx.base
    n = ctx.n
    x = np.arange(n)
    X, Y = np.meshgrid(x, x, indexing="ij")
    Ad, M = ctx._A, ctx._M
    s2 = ctx.s_squared

    def solve(p, q, r, u, t1, t2):
        e1 = Ad[M[p, X], M[q, Y]] == t1
        e2 = Ad[M[r, X], M[u, Y]] == t2
        hit = np.argwhere(e1 & e2)
        return tuple(int(v) for v in hit[0]) if len(hit) else None

    c1 = solve(A.a, R.m(s2, A.b), A.c, A.d, R.one, R.zero)
    c2 = solve(A.a, A.b, R.m(s2, A.c), A.d, R.zero, R.one)
    if c1 is None or c2 is None:
        return None
    B = FMatrix(c1[0], c2[0], c1[1], c2[1])
    # right inverses are two-sided in a finite ring; confirm anyway
    return B if fm_mul(ctx, B, A) == ctx.identity else None


def fm_is_unit(ctx: FMContext, A: FMatrix, strategy: str | None = None) -> bool:
    strategy = strategy or ctx.unit_strategies()[0]
    if strategy not in ctx.unit_strategies():
        raise HypothesisError(f"unit strategy {strategy!r} does not apply to {ctx.label}")
    U = ctx.analysis.unit_mask
    if strategy == "determinant":
        return bool(U[det_s(ctx, A)])
    if strategy == "diagonal":
        return bool(U[A.a] and U[A.d])
    return _scalar_inverse_search(ctx, A) is not None


def fm_inverse(ctx: FMContext, A: FMatrix) -> FMatrix | None:
    if ctx.is_commutative:
        R = ctx.base
        dinv = ctx.analysis.inverse_array[det_s(ctx, A)]
        if dinv < 0:
            return None
        dinv = int(dinv)
        return FMatrix(R.m(dinv, A.d), R.m(dinv, R.neg_l[A.b]), R.m(dinv, R.neg_l[A.c]), R.m(dinv, A.a))
    return _scalar_inverse_search(ctx, A)


def fm_in_jacobson(ctx: FMContext, A: FMatrix) -> bool:
    J = ctx.analysis.jacobson_mask
    return bool(J[A.a] and J[A.d] and ctx.j_s[A.b] and ctx.j_s[A.c])


def fm_is_idempotent(ctx: FMContext, A: FMatrix) -> bool:
    return fm_mul(ctx, A, A) == A


def fm_is_nilpotent(ctx: FMContext, A: FMatrix) -> bool:
    """Iterated powering with cycle detection."""
    seen = set()
    P = A
    zero = ctx.zero
    while P != zero:
        if P in seen:
            return False
        seen.add(P)
        P = fm_mul(ctx, P, A)
    return True


# ---------------------------------------------------------------------------
# enumeration


PREDICATES = ("all", "units", "idempotents", "radical", "nilpotents")


def predicate_mask(ctx: FMContext, predicate: str) -> np.ndarray:
    if predicate == "all":
        return np.ones(ctx.size, dtype=bool)
    if predicate == "units":
        return ctx.unit_mask()
    if predicate == "idempotents":
        out = np.zeros(ctx.size, dtype=bool)
        out[ctx.idempotent_indices()] = True
        return out
    if predicate == "radical":
        return ctx.jacobson_mask()
    if predicate == "nilpotents":
        return ctx.nil_mask()
    raise ValueError(f"unknown predicate {predicate!r}; expected one of {PREDICATES}")


def fm_enumerate(ctx: FMContext, predicate="all", *, sample: int | None = None,
                 seed: int = 0) -> Iterator[FMatrix]:
    """Matrices satisfying ``predicate`` in canonical order.

    ``predicate`` is one of :data:`PREDICATES` or a callable on FMatrix.  Above
    the enumeration cap a ``sample`` size is required; sampled matrices are
    drawn with a seeded generator and yielded in canonical order.
    """
    if ctx.size > ctx.caps.enumeration_cap:
        if sample is None:
            raise CapExceeded(f"enumeration of {ctx.label}", ctx.size, ctx.caps.enumeration_cap)
        rng = np.random.default_rng(seed)
        idx = np.unique(rng.integers(0, ctx.size, size=sample, dtype=np.int64))
        for i in idx:
            A = ctx.matrix(i)
            if callable(predicate):
                if predicate(A):
                    yield A
            elif _scalar_predicate(ctx, predicate, A):
                yield A
        return
    if callable(predicate):
        for i in range(ctx.size):
            A = ctx.matrix(i)
            if predicate(A):
                yield A
        return
    for i in np.flatnonzero(predicate_mask(ctx, predicate)):
        yield ctx.matrix(i)


def _scalar_predicate(ctx: FMContext, predicate: str, A: FMatrix) -> bool:
    if predicate == "all":
        return True
    if predicate == "units":
        return fm_is_unit(ctx, A)
    if predicate == "idempotents":
        return fm_is_idempotent(ctx, A)
    if predicate == "radical":
        return fm_in_jacobson(ctx, A)
    if predicate == "nilpotents":
        return fm_is_nilpotent(ctx, A)
    raise ValueError(f"unknown predicate {predicate!r}")


# ---------------------------------------------------------------------------
# similarity


def similarity_search(ctx: FMContext, A: FMatrix, B: FMatrix) -> FMatrix | None:
    """First unit P (canonical order) with ``B = P^-1 A P``, i.e. ``AP = PB``."""
    ctx.require_unit_search("similarity search")
    units = ctx.unit_indices()
    P = ctx.split(units)
    AP = ctx.join(ctx.vmul(ctx.vconst(A, len(units)), P))
    PB = ctx.join(ctx.vmul(P, ctx.vconst(B, len(units))))
    hit = np.flatnonzero(AP == PB)
    return ctx.matrix(units[hit[0]]) if len(hit) else None


def equivalence_search(ctx: FMContext, A: FMatrix, B: FMatrix) -> tuple[FMatrix, FMatrix] | None:
    """Units ``(u, v)`` with ``B = u A v``; the first ``v`` in canonical order wins."""
    ctx.require_unit_search("equivalence search")
    units = ctx.unit_indices()
    U = ctx.split(units)
    Av = ctx.join(ctx.vmul(ctx.vconst(A, len(units)), U))     # A v
    wB = ctx.join(ctx.vmul(U, ctx.vconst(B, len(units))))     # w B, w = u^-1
    first_w = {}
    for k in range(len(units) - 1, -1, -1):
        first_w[int(wB[k])] = k
    for k in range(len(units)):
        j = first_w.get(int(Av[k]))
        if j is not None:
            u = fm_inverse(ctx, ctx.matrix(units[j]))
            return u, ctx.matrix(units[k])
    return None


def is_similar_witness(ctx: FMContext, A: FMatrix, B: FMatrix, P: FMatrix) -> bool:
    """Check ``B = P^-1 A P`` by multiplication (P a unit, AP = PB)."""
    Pinv = fm_inverse(ctx, P)
    return (Pinv is not None and fm_mul(ctx, P, Pinv) == ctx.identity
            and fm_mul(ctx, A, P) == fm_mul(ctx, P, B))


@dataclass
class ConjugacyIndex:
    """Partition of M2(R;s) into similarity classes, with witnesses.

    For every matrix X, ``X = Q[X]^-1 rep Q[X]`` where ``rep`` is the
    smallest index of its class; ``Qinv[X]`` is ``Q[X]^-1``.
    """

    label: np.ndarray       # class label = index of the class representative
    Q: np.ndarray
    Qinv: np.ndarray
    generators: np.ndarray  # unit indices generating U(M2(R;s))

    @classmethod
    def build(cls, ctx: FMContext) -> "ConjugacyIndex":
        units = ctx.unit_indices()
        gens = _unit_generators(ctx, units)
        ginv = np.array([ctx.index(fm_inverse(ctx, ctx.matrix(g))) for g in gens], dtype=np.int64)
        size = ctx.size
        allx = np.arange(size, dtype=np.int64)
        X = ctx.split(allx)
        images = []
        for g, gi in zip(gens, ginv):
            images.append(ctx.join(ctx.vmul(ctx.vmul(ctx.vconst(ctx.matrix(gi), size), X),
                                            ctx.vconst(ctx.matrix(g), size))))
        rows = np.concatenate([allx] * len(gens))
        cols = np.concatenate(images)
        graph = coo_matrix((np.ones(len(rows), dtype=np.int8), (rows, cols)), shape=(size, size))
        _, comp = connected_components(graph, directed=True, connection="weak")
        rep_of_comp = np.full(comp.max() + 1, size, dtype=np.int64)
        np.minimum.at(rep_of_comp, comp, allx)
        label = rep_of_comp[comp]

        ident = ctx.index(ctx.identity)
        Q = np.full(size, -1, dtype=np.int64)
        Qinv = np.full(size, -1, dtype=np.int64)
        frontier = np.unique(label)
        Q[frontier] = ident
        Qinv[frontier] = ident
        while len(frontier):
            found = []
            for k, (g, gi) in enumerate(zip(gens, ginv)):
                Y = images[k][frontier]
                fresh = Q[Y] < 0
                if not fresh.any():
                    continue
                Y, src = Y[fresh], frontier[fresh]
                Y, first = np.unique(Y, return_index=True)
                src = src[first]
                m = len(Y)
                Q[Y] = ctx.mul_idx(Q[src], np.full(m, g))
                Qinv[Y] = ctx.mul_idx(np.full(m, gi), Qinv[src])
                found.append(Y)
            frontier = np.unique(np.concatenate(found)) if found else np.array([], dtype=np.int64)
        if (Q < 0).any():
            raise RuntimeError("conjugacy BFS did not reach every matrix")
        return cls(label, Q, Qinv, gens)

    def same_class(self, i: int, j: int) -> bool:
        return self.label[i] == self.label[j]

    def witness(self, ctx: FMContext, A: FMatrix, B: FMatrix) -> FMatrix | None:
        """A unit P with ``B = P^-1 A P`` when A and B are similar."""
        i, j = ctx.index(A), ctx.index(B)
        if self.label[i] != self.label[j]:
            return None
        return ctx.matrix(ctx.mul_idx(self.Qinv[i:i + 1], self.Q[j:j + 1])[0])

    def members(self, A_idx: int) -> np.ndarray:
        return np.flatnonzero(self.label == self.label[A_idx])


def _unit_generators(ctx: FMContext, units: np.ndarray) -> np.ndarray:
    """Seeded random units, added until they generate the whole unit group."""
    rng = np.random.default_rng(ctx.caps.seed)
    ident = ctx.index(ctx.identity)
    gens: list[int] = []
    closure = np.zeros(ctx.size, dtype=bool)
    closure[ident] = True
    count = 1
    while count < len(units):
        outside = units[~closure[units]]
        gens.append(int(outside[rng.integers(len(outside))]))
        # recompute the generated subgroup from scratch
        closure[:] = False
        closure[ident] = True
        frontier = np.array([ident], dtype=np.int64)
        while len(frontier):
            nxt = np.unique(np.concatenate([ctx.mul_idx(frontier, np.full(len(frontier), g)) for g in gens]))
            nxt = nxt[~closure[nxt]]
            closure[nxt] = True
            frontier = nxt
        count = int(closure.sum())
    return np.array(gens, dtype=np.int64)


# ---------------------------------------------------------------------------
# idempotents


@dataclass(frozen=True)
class IdempotentForm:
    kind: str                   # zero | identity | diag-1-0 | diag-0-1
    witness: FMatrix | None     # P with P^-1 E P equal to the canonical form


def idempotent_canonical_form(ctx: FMContext, E: FMatrix) -> IdempotentForm:
    if not ctx.is_local:
        raise HypothesisError(f"{ctx.base.label} is not local")
    if not fm_is_idempotent(ctx, E):
        raise HypothesisError(f"{ctx.format(E)} is not idempotent")
    if E == ctx.zero:
        return IdempotentForm("zero", ctx.identity)
    if E == ctx.identity:
        return IdempotentForm("identity", ctx.identity)
    o, z = ctx.base.one, ctx.base.zero
    for kind, D in (("diag-1-0", ctx.diag(o, z)), ("diag-0-1", ctx.diag(z, o))):
        P = similarity_search(ctx, E, D)
        if P is not None:
            return IdempotentForm(kind, P)
    raise TheoremViolation(f"{ctx.format(E)} is similar to neither diag(1,0) nor diag(0,1) in {ctx.label}")


# ---------------------------------------------------------------------------
# literals

_LITERAL = re.compile(r"^\s*\[\s*\[([^\[\]]*)\]\s*,\s*\[([^\[\]]*)\]\s*\]\s*$")


def parse_matrix(ctx: FMContext, text) -> FMatrix:
    """Parse ``"[[a,b],[c,d]]"`` or a JSON object ``{"a":..,"b":..,"c":..,"d":..}``."""
    R = ctx.base
    if isinstance(text, dict):
        try:
            return FMatrix(*(R.element(text[k]) for k in "abcd"))
        except KeyError as exc:
            raise ValueError(f"matrix object is missing entry {exc}") from None
    if isinstance(text, str) and text.strip().startswith("{"):
        return parse_matrix(ctx, json.loads(text))
    m = _LITERAL.match(str(text))
    if not m:
        raise ValueError(f"malformed matrix literal {text!r}; expected [[a,b],[c,d]]")
    row1 = [t.strip() for t in m.group(1).split(",")]
    row2 = [t.strip() for t in m.group(2).split(",")]
    if len(row1) != 2 or len(row2) != 2:
        raise ValueError(f"matrix literal {text!r} must have two entries per row")
    return FMatrix(*(R.element(t) for t in row1 + row2))
