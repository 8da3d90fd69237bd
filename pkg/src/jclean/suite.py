"""Executable checks for every numbered result, plus a census of M2(R;s).

Each check runs over all matrices of a context (or all pairs, under
``pair_cap``) and compares a criterion against the brute-force oracle.
Checks with unmet hypotheses report ``hypotheses-not-met`` and never pass.
"""

from __future__ import annotations

import csv
import io
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from .catalog import DEFAULT_CATALOG, catalog_ring
from .clean import (
    CleanKind,
    _standard_forms,
    decide_sc,
    decide_sjc,
    decide_sjc_commutative,
    decide_sjc_radical_s,
    decide_snc,
    find_standard_form,
    oracle_decide,
    oracle_table,
    radical_power_check,
    verify_certificate,
)
from .config import Caps
from .errors import HypothesisError, TheoremViolation
from .formal import (
    FMatrix,
    FMContext,
    _det_idx,
    fm_inverse,
    idempotent_canonical_form,
    is_similar_witness,
)
from .rings import FiniteRing, RingAnalysis, analyze, is_weakly_bleached, truncated_power_series

CHECK_IDS = ("T2.1", "L2.2", "E2.3", "L2.4", "L2.5", "L2.6", "L2.7", "L2.8", "L2.9", "C2.10",
             "L2.11", "C2.12", "T2.13", "P2.14", "L2.15", "T2.16", "L2.17", "T2.18", "C2.19",
             "L3.1", "P3.2", "P3.3", "R3.4", "L3.5", "T3.6")

STATUSES = ("pass", "fail", "hypotheses-not-met")
TRUNCATION_NOTE = "truncated analogue: R[[x]] replaced by R[[x]]/(x^N)"
CENSUS_HEADER = ("ring", "s", "total", "units", "idempotents", "jacobson", "sc", "sjc", "snc")


@dataclass
class CheckReport:
    check: str
    ring: str
    s: str
    status: str
    counterexample: dict | None = None
    counts: dict = field(default_factory=dict)
    elapsed: float = 0.0
    sampled: bool = False
    seed: int | None = None
    notes: list[str] = field(default_factory=list)
    witness: dict | None = None

    def to_json(self) -> dict:
        return {
            "schema": 1,
            "check": self.check,
            "ring": self.ring,
            "s": self.s,
            "status": self.status,
            "counterexample": self.counterexample,
            "counts": self.counts,
            "elapsed": round(self.elapsed, 4),
            "sampled": self.sampled,
            "seed": self.seed,
            "notes": self.notes,
            "witness": self.witness,
        }


# ---------------------------------------------------------------------------
# contexts


class ContextCache:
    """Shares rings, analyses and M2 contexts between checks.

    Entries hold a reference to their ring, so an ``id`` is never reused
    while its entry is alive.
    """

    def __init__(self, caps: Caps | None = None):
        self.caps = caps or Caps()
        self._analysis: dict[int, tuple[FiniteRing, RingAnalysis]] = {}
        self._ctx: dict[tuple[int, int], tuple[FiniteRing, FMContext]] = {}
        self._series: dict[tuple, tuple] = {}

    def analysis(self, R: FiniteRing) -> RingAnalysis:
        hit = self._analysis.get(id(R))
        if hit is None or hit[0] is not R:
            hit = (R, analyze(R, self.caps.analysis_cap))
            self._analysis[id(R)] = hit
        return hit[1]

    def context(self, R: FiniteRing, s: int) -> FMContext:
        key = (id(R), int(s))
        hit = self._ctx.get(key)
        if hit is None or hit[0] is not R:
            hit = (R, FMContext(R, s, self.analysis(R), self.caps))
            self._ctx[key] = hit
        return hit[1]

    def series(self, R: FiniteRing, N: int):
        key = (id(R), N)
        hit = self._series.get(key)
        if hit is None or hit[0] is not R:
            hit = (R, truncated_power_series(R, N, cap=self.caps.analysis_cap))
            self._series[key] = hit
        return hit[1]

    def drop(self, R: FiniteRing, s: int):
        """Release the bulk data of M2(R;s) and any series contexts built over R."""
        self._ctx.pop((id(R), int(s)), None)
        for key in [k for k, (base, _) in self._series.items() if base is R]:
            ext = self._series[key][1]
            self._ctx = {k: v for k, v in self._ctx.items() if v[0] is not ext.ring}


class _Run:
    """Collects counts, notes and the first counterexample of one check."""

    def __init__(self, ctx: FMContext, caps: Caps):
        self.ctx = ctx
        self.caps = caps
        self.counts: dict = {}
        self.notes: list[str] = []
        self.sampled = False
        self.counterexample: dict | None = None
        self.witness: dict | None = None

    def fail(self, explanation: str, A: FMatrix | int | None = None, **extra):
        if self.counterexample is not None:
            return
        ce = {"explanation": explanation}
        if A is not None:
            M = self.ctx.matrix(int(A)) if not isinstance(A, FMatrix) else A
            ce["matrix"] = self.ctx.to_json(M)
        for key, val in extra.items():
            ce[key] = self.ctx.to_json(val) if isinstance(val, FMatrix) else val
        self.counterexample = ce

    def compare(self, name: str, lhs: np.ndarray, rhs: np.ndarray, explanation: str,
                domain: np.ndarray | None = None):
        """Both directions of ``lhs <=> rhs`` over all (or ``domain``) matrices."""
        diff = lhs != rhs
        if domain is not None:
            diff &= domain
        bad = np.flatnonzero(diff)
        self.counts[f"{name}_checked"] = int(domain.sum()) if domain is not None else int(len(lhs))
        self.counts[f"{name}_mismatches"] = int(len(bad))
        if len(bad):
            i = int(bad[0])
            self.fail(f"{explanation}: lhs={bool(lhs[i])}, rhs={bool(rhs[i])}", i)

    def implication(self, name: str, premise: np.ndarray, conclusion: np.ndarray, explanation: str):
        bad = np.flatnonzero(premise & ~conclusion)
        self.counts[f"{name}_premises"] = int(premise.sum())
        self.counts[f"{name}_violations"] = int(len(bad))
        if len(bad):
            self.fail(explanation, int(bad[0]))


# bulk per-context data


def _data(ctx: FMContext) -> dict:
    def compute():
        X = ctx.all_split()
        I = ctx.vconst(ctx.identity, ctx.size)
        R = ctx.base
        d = {"X": X, "comp": ctx.join(ctx.vsub(I, X)), "minus_i": ctx.join(ctx.vsub(X, I))}
        if ctx.is_commutative:
            d["det"] = _det_idx(ctx, X)
            d["tr"] = R.add.astype(np.intp)[X.a, X.d]
        return d
    return ctx.cached("suite_data", compute)


def _oracle(ctx: FMContext, kind: CleanKind) -> np.ndarray:
    return oracle_table(ctx, kind) >= 0


def _one_plus_j(ctx: FMContext) -> np.ndarray:
    return ctx.analysis.in_one_plus_j(ctx.base)


def _sweep(run: _Run, decider: Callable, kind: CleanKind, name: str):
    """Run a criteria decider on every matrix; compare with the oracle and re-verify certificates."""
    ctx = run.ctx
    oracle = _oracle(ctx, kind)
    verified = successes = mismatches = 0
    for i in range(ctx.size):
        A = ctx.matrix(i)
        cert = decider(ctx, A)
        if (cert is not None) != bool(oracle[i]):
            mismatches += 1
            run.fail(f"{name} says {cert is not None}, oracle says {bool(oracle[i])}", A)
        if cert is not None:
            successes += 1
            if verify_certificate(ctx, A, cert):
                verified += 1
            else:
                run.fail(f"{name} certificate does not re-verify", A, certificate=cert.to_json(ctx))
    run.counts.update({f"{name}_checked": ctx.size, f"{name}_mismatches": mismatches,
                       f"{name}_successes": successes, f"{name}_certificates_verified": verified})


# ---------------------------------------------------------------------------
# individual checks


def _check_T2_1(run: _Run):
    ctx = run.ctx
    run.compare("pattern_vs_quasi_regular", ctx.jacobson_mask(), ctx.quasi_regular_mask(),
                "[[J,J_s],[J_s,J]] pattern disagrees with quasi-regularity")


def _check_L2_2(run: _Run):
    ctx = run.ctx
    X = _data(ctx)["X"]
    J = ctx.analysis.jacobson_mask
    U = ctx.analysis.unit_mask
    run.compare("radical", J[X.a] & J[X.d], ctx.quasi_regular_mask(),
                "[[J,R],[R,J]] disagrees with quasi-regular J(M2)")
    run.compare("units", U[X.a] & U[X.d], ctx.unit_mask("search"),
                "a,d units disagrees with exhaustive inverse search")


def _base_sjc(R: FiniteRing, an: RingAnalysis) -> np.ndarray:
    idem = sorted(an.idempotents)
    out = np.zeros(R.size, dtype=bool)
    for a in range(R.size):
        out[a] = any(R.m(e, a) == R.m(a, e) and an.jacobson_mask[R.sub(a, e)] for e in idem)
    return out


def _check_E2_3(run: _Run):
    ctx = run.ctx
    d = _data(ctx)
    sjc, J, U = _oracle(ctx, CleanKind.SJC), ctx.jacobson_mask(), ctx.unit_mask()
    run.implication("radical_is_sjc", J, sjc, "element of J not strongly J-clean")
    run.compare("unit_sjc", sjc, J[d["minus_i"]], "unit: strongly J-clean vs A - I in J", domain=U)
    run.compare("complement", sjc, sjc[d["comp"]], "A vs I - A strongly J-clean")
    # the same three statements in the base ring
    R, an = ctx.base, ctx.analysis
    bs = _base_sjc(R, an)
    idx = np.arange(R.size)
    one_minus = R.sub_table()[R.one, idx]
    minus_one = R.sub_table()[idx, R.one]
    bad = [int(a) for a in idx if (an.jacobson_mask[a] and not bs[a])
           or (an.unit_mask[a] and bs[a] != an.jacobson_mask[minus_one[a]])
           or bs[a] != bs[one_minus[a]]]
    run.counts["base_ring_violations"] = len(bad)
    if bad:
        run.fail(f"base ring element {R.name(bad[0])} violates one of the three statements")


def _check_L2_4(run: _Run):
    ctx = run.ctx
    d = _data(ctx)
    lhs = ctx.unit_mask() & _oracle(ctx, CleanKind.SJC)
    run.compare("unit_and_sjc_vs_a_minus_i", lhs, ctx.jacobson_mask()[d["minus_i"]],
                "(A unit and strongly J-clean) vs A - I in J")


def _check_L2_5(run: _Run):
    ctx, caps = run.ctx, run.caps
    sjc = _oracle(ctx, CleanKind.SJC)
    units = ctx.unit_indices()
    pairs = ctx.size * len(units)
    bad_total = 0
    if pairs <= caps.pair_cap:
        X = _data(ctx)["X"]
        for p in units:
            P = ctx.matrix(int(p))
            Pinv = fm_inverse(ctx, P)
            conj = ctx.join(ctx.vmul(ctx.vmul(ctx.vconst(P, ctx.size), X), ctx.vconst(Pinv, ctx.size)))
            bad = np.flatnonzero(sjc != sjc[conj])
            bad_total += len(bad)
            if len(bad):
                run.fail("strongly J-clean status changes under P A P^-1", int(bad[0]), P=P)
        run.counts["conjugations"] = pairs
    else:
        rng = np.random.default_rng(caps.seed)
        m = caps.sample_size
        A = rng.integers(ctx.size, size=m)
        P = units[rng.integers(len(units), size=m)]
        inv = {int(p): ctx.index(fm_inverse(ctx, ctx.matrix(int(p)))) for p in np.unique(P)}
        Pinv = np.array([inv[int(p)] for p in P], dtype=np.int64)
        conj = ctx.mul_idx(ctx.mul_idx(P, A), Pinv)
        bad = np.flatnonzero(sjc[A] != sjc[conj])
        bad_total = len(bad)
        if len(bad):
            run.fail("strongly J-clean status changes under P A P^-1", int(A[bad[0]]), P=ctx.matrix(int(P[bad[0]])))
        run.counts["conjugations"] = m
        run.sampled = True
        run.notes.append(f"sampled {m} (A, P) pairs; {pairs} exceeds pair_cap {caps.pair_cap}")
    run.counts["violations"] = int(bad_total)


def _check_L2_6(run: _Run):
    ctx = run.ctx
    J = ctx.jacobson_mask()
    # if some A^n lies in J then A^m does for every m >= log2|M2| + 1
    need = int(np.ceil(np.log2(ctx.size))) + 1
    steps = int(np.ceil(np.log2(need))) + 1
    P = ctx.all_indices()
    for _ in range(steps):
        P = ctx.mul_idx(P, P)
    run.compare("power_in_J_vs_in_J", J[P], J, "some power in J vs A in J")
    # scalar cross-check of the power iteration on a deterministic slice
    stride = max(1, ctx.size // 256)
    mism = 0
    for i in range(0, ctx.size, stride):
        n = radical_power_check(ctx, ctx.matrix(i))
        if (n is not None) != bool(J[i]) or (n is not None and n != 1):
            mism += 1
            run.fail("radical_power_check disagrees with membership in J", i)
    run.counts["scalar_power_checks"] = len(range(0, ctx.size, stride))
    run.counts["scalar_power_mismatches"] = mism


def _check_L2_7(run: _Run):
    ctx = run.ctx
    ci = ctx.classes()
    o, z = ctx.base.one, ctx.base.zero
    d10, d01 = ctx.index(ctx.diag(o, z)), ctx.index(ctx.diag(z, o))
    trivial = {ctx.index(ctx.zero), ctx.index(ctx.identity)}
    allowed = {int(ci.label[d10])} if ctx.s_is_unit else {int(ci.label[d10]), int(ci.label[d01])}
    checked = 0
    for e in ctx.idempotent_indices():
        if int(e) in trivial:
            continue
        checked += 1
        E = ctx.matrix(int(e))
        if int(ci.label[e]) not in allowed:
            run.fail("non-trivial idempotent not similar to an allowed diagonal form", E)
            continue
        form = idempotent_canonical_form(ctx, E)
        target = ctx.diag(o, z) if form.kind == "diag-1-0" else ctx.diag(z, o)
        if form.kind not in ("diag-1-0", "diag-0-1") or not is_similar_witness(ctx, E, target, form.witness):
            run.fail("canonical form witness does not verify", E)
        elif ctx.s_is_unit and form.kind != "diag-1-0":
            run.fail("s is a unit but E was matched to diag(0,1) only", E)
    run.counts["nontrivial_idempotents"] = checked


def _check_L2_8(run: _Run):
    _sweep(run, decide_sjc, CleanKind.SJC, "decide_sjc")


def _check_L2_9(run: _Run):
    _sweep(run, decide_snc, CleanKind.SNC, "decide_snc")


COR_2_10_WITNESS = FMatrix(1, 1, 1, 0)


def _check_C2_10(run: _Run):
    ctx = run.ctx
    R = ctx.base
    A = FMatrix(R.one, R.one, R.one, R.zero)
    sjc = _oracle(ctx, CleanKind.SJC)
    run.counts["sjc_count"] = int(sjc.sum())
    run.counts["total"] = ctx.size
    run.witness = {"matrix": ctx.to_json(A), "strongly_J_clean": bool(sjc[ctx.index(A)])}
    if sjc[ctx.index(A)] or decide_sjc(ctx, A) is not None:
        run.fail("[[1,1],[1,0]] is strongly J-clean", A)
    if sjc.all():
        run.fail("every matrix is strongly J-clean")


def _diag_labels(ctx: FMContext, ok: Callable[[int, int], bool]) -> np.ndarray:
    ci = ctx.classes()
    z = ctx.base.zero
    labels = {int(ci.label[ctx.index(FMatrix(x, z, z, y))])
              for x in range(ctx.n) for y in range(ctx.n) if ok(x, y)}
    return np.isin(ci.label, np.fromiter(labels, dtype=np.int64, count=len(labels)))


def _check_L2_11(run: _Run):
    ctx = run.ctx
    J, one_plus = ctx.analysis.jacobson_mask, _one_plus_j(ctx)
    U, comp = ctx.unit_mask(), _data(ctx)["comp"]
    if ctx.s_is_unit:
        ok = lambda x, y: J[x] and one_plus[y]             # diag(w, v)
    else:
        ok = lambda x, y: (J[x] and one_plus[y]) or (one_plus[x] and J[y])
    crit = U | U[comp] | _diag_labels(ctx, ok)
    run.compare("criterion_vs_oracle", crit, _oracle(ctx, CleanKind.SC),
                "unit / I-A unit / diagonal similarity vs strongly clean oracle")


def _check_C2_12(run: _Run):
    ctx = run.ctx
    U, comp = ctx.unit_mask(), _data(ctx)["comp"]
    crit = U | U[comp] | _diag_labels(ctx, lambda x, y: True)
    run.compare("criterion_vs_oracle", crit, _oracle(ctx, CleanKind.SC),
                "unit / I-A unit / similar to some diag(a,b) vs strongly clean oracle")


def _check_T2_13(run: _Run):
    ctx = run.ctx
    U, comp = ctx.unit_mask(), _data(ctx)["comp"]
    crit = U | U[comp] | _oracle(ctx, CleanKind.SJC)
    run.compare("criterion_vs_oracle", crit, _oracle(ctx, CleanKind.SC),
                "unit / I-A unit / strongly J-clean vs strongly clean oracle")
    _sweep(run, decide_sc, CleanKind.SC, "decide_sc")


def _check_P2_14(run: _Run):
    ctx = run.ctx
    U, comp = ctx.unit_mask(), _data(ctx)["comp"]
    S = ~U & ~U[comp]
    snc, sjc = _oracle(ctx, CleanKind.SNC), _oracle(ctx, CleanKind.SJC)
    an = ctx.analysis
    j_nil = an.jacobson <= an.nilpotents
    st1 = bool(snc[S].all())
    st2 = bool(sjc[S].all()) and j_nil
    run.counts.update({"restricted_domain": int(S.sum()), "statement_1": st1, "statement_2": st2,
                       "J_is_nil": j_nil})
    if st1 != st2:
        run.fail(f"statement (1)={st1} but statement (2)={st2}")
    run.compare("snc_vs_sjc", snc, sjc, "strongly nil clean vs strongly J-clean on A, I-A non-units",
                domain=S)
    run.notes.append("finite-ring instance: J(R) is nil in every finite ring")


def _check_L2_15(run: _Run):
    ctx = run.ctx
    U, comp = ctx.unit_mask(), _data(ctx)["comp"]
    S = ~U & ~U[comp]
    forms = _standard_forms(ctx)
    keys = np.fromiter(forms.keys(), dtype=np.int64, count=len(forms))
    has = np.isin(ctx.classes().label, keys)
    run.implication("standard_form_exists", S, has, "A, I-A non-units but no standard form is similar")
    # re-verify a deterministic slice of witnesses by multiplication
    members = np.flatnonzero(S & has)
    stride = max(1, len(members) // 256)
    for i in members[::stride]:
        A = ctx.matrix(int(i))
        try:
            sf = find_standard_form(ctx, A)
        except TheoremViolation as exc:
            run.fail(str(exc), A)
            continue
        if not is_similar_witness(ctx, A, sf.form, sf.P):
            run.fail("standard form witness does not verify", A, P=sf.P)
    run.counts["witnesses_verified"] = len(members[::stride])


def _check_T2_16(run: _Run):
    _sweep(run, decide_sjc_radical_s, CleanKind.SJC, "decide_sjc_radical_s")


def _check_L3_1(run: _Run):
    ctx, caps = run.ctx, run.caps
    d = _data(ctx)
    R = ctx.base
    M = R.mul.astype(np.intp)
    det = d["det"]
    if ctx.size * ctx.size <= caps.pair_cap:
        bad = 0
        X = d["X"]
        for j in range(ctx.size):
            prod = ctx.join(ctx.vmul(X, ctx.vconst(ctx.matrix(j), ctx.size)))
            wrong = np.flatnonzero(det[prod] != M[det, det[j]])
            bad += len(wrong)
            if len(wrong):
                run.fail("det_s(AB) != det_s(A) det_s(B)", int(wrong[0]), B=ctx.matrix(j))
        run.counts["det_pairs"] = ctx.size * ctx.size
    else:
        rng = np.random.default_rng(caps.seed)
        m = caps.sample_size
        A, B = rng.integers(ctx.size, size=m), rng.integers(ctx.size, size=m)
        wrong = np.flatnonzero(det[ctx.mul_idx(A, B)] != M[det[A], det[B]])
        bad = len(wrong)
        if bad:
            run.fail("det_s(AB) != det_s(A) det_s(B)", int(A[wrong[0]]), B=ctx.matrix(int(B[wrong[0]])))
        run.counts["det_pairs"] = m
        run.sampled = True
        run.notes.append(f"det_s multiplicativity sampled on {m} pairs")
    run.counts["det_violations"] = int(bad)
    search = ctx.unit_mask("search")
    run.compare("unit_vs_det_unit", search, ctx.analysis.unit_mask[det], "unit vs det_s a unit")
    # inverse formula det^-1 [[d,-b],[-c,a]]
    units = np.flatnonzero(search)
    X = ctx.split(units)
    k = ctx.analysis.inverse_array[det[units]]
    neg = R.neg.astype(np.intp)
    adj = type(X)(X.d, neg[X.b], neg[X.c], X.a)
    inv = type(X)(*(M[k, part] for part in adj))
    ident = ctx.index(ctx.identity)
    ok = (ctx.join(ctx.vmul(X, inv)) == ident) & (ctx.join(ctx.vmul(inv, X)) == ident)
    run.counts["inverse_formula_failures"] = int((~ok).sum())
    if not ok.all():
        run.fail("det_s^-1 adj(A) is not the inverse", int(units[np.argmin(ok)]))


def _det_tr_in_j(ctx: FMContext):
    d = _data(ctx)
    J = ctx.analysis.jacobson_mask
    return J[d["det"]], J[d["tr"]]


def _check_P3_2(run: _Run):
    ctx = run.ctx
    dj, tj = _det_tr_in_j(ctx)
    J, sjc = ctx.jacobson_mask(), _oracle(ctx, CleanKind.SJC)
    run.implication("not_sjc", ~J & dj & tj, ~sjc, "det_s, tr in J and A not in J, yet strongly J-clean")
    # contrapositive probe: strongly J-clean outside J must have det_s or tr outside J
    run.implication("contrapositive", sjc & ~J, ~(dj & tj), "contrapositive probe failed")


def _check_P3_3(run: _Run):
    ctx = run.ctx
    dj, tj = _det_tr_in_j(ctx)
    run.compare("equivalence", dj & tj & _oracle(ctx, CleanKind.SJC), ctx.jacobson_mask(),
                "(det_s, tr in J and strongly J-clean) vs A in J")


def _check_R3_4(run: _Run):
    ctx = run.ctx
    dj, tj = _det_tr_in_j(ctx)
    run.compare("equivalence", dj & tj, ctx.jacobson_mask(), "det_s, tr in J vs A in J")


def _check_L3_5(run: _Run):
    ctx = run.ctx
    X = _data(ctx)["X"]
    upper = X.c == ctx.base.zero
    run.implication("upper_triangular_sc", upper, _oracle(ctx, CleanKind.SC),
                    "upper triangular matrix not strongly clean")


def _check_T3_6(run: _Run):
    ctx = run.ctx
    d = _data(ctx)
    R = ctx.base
    A, M, S = R.add.astype(np.intp), R.mul.astype(np.intp), R.sub_table().astype(np.intp)
    J, one_plus = ctx.analysis.jacobson_mask, _one_plus_j(ctx)
    root_j = np.zeros(ctx.size, dtype=bool)
    root_u = np.zeros(ctx.size, dtype=bool)
    for t in range(R.size):
        val = A[S[M[t, t], M[d["tr"], t]], d["det"]]
        if J[t]:
            root_j |= val == R.zero
        if one_plus[t]:
            root_u |= val == R.zero
    Jm = ctx.jacobson_mask()
    crit = Jm | Jm[d["comp"]] | (root_j & root_u)
    run.compare("criterion_vs_oracle", crit, _oracle(ctx, CleanKind.SJC),
                "characteristic polynomial criterion vs strongly J-clean oracle")
    _sweep(run, decide_sjc_commutative, CleanKind.SJC, "decide_sjc_commutative")


# ---------------------------------------------------------------------------
# registry and gating


@dataclass(frozen=True)
class _Spec:
    fn: Callable | None
    requires: tuple[str, ...]


_CHECKS: dict[str, _Spec] = {
    "T2.1": _Spec(_check_T2_1, ()),
    "L2.2": _Spec(_check_L2_2, ("local", "s in J")),
    "E2.3": _Spec(_check_E2_3, ()),
    "L2.4": _Spec(_check_L2_4, ()),
    "L2.5": _Spec(_check_L2_5, ()),
    "L2.6": _Spec(_check_L2_6, ("local", "s in J")),
    "L2.7": _Spec(_check_L2_7, ("local",)),
    "L2.8": _Spec(_check_L2_8, ("local",)),
    "L2.9": _Spec(_check_L2_9, ("local",)),
    "C2.10": _Spec(_check_C2_10, ("commutative", "local", "s unit")),
    "L2.11": _Spec(_check_L2_11, ("local",)),
    "C2.12": _Spec(_check_C2_12, ("local",)),
    "T2.13": _Spec(_check_T2_13, ("local",)),
    "P2.14": _Spec(_check_P2_14, ("local",)),
    "L2.15": _Spec(_check_L2_15, ("local", "s in J")),
    "T2.16": _Spec(_check_T2_16, ("local", "s in J")),
    "L2.17": _Spec(None, ("local", "weakly bleached")),
    "T2.18": _Spec(None, ("local", "weakly bleached")),
    "C2.19": _Spec(None, ("local", "weakly bleached")),
    "L3.1": _Spec(_check_L3_1, ("commutative",)),
    "P3.2": _Spec(_check_P3_2, ("commutative",)),
    "P3.3": _Spec(_check_P3_3, ("commutative", "local")),
    "R3.4": _Spec(_check_R3_4, ("commutative", "local", "s in J")),
    "L3.5": _Spec(_check_L3_5, ("commutative", "local")),
    "T3.6": _Spec(_check_T3_6, ("commutative", "local")),
}
SERIES_CHECKS = ("L2.17", "T2.18", "C2.19")
assert set(_CHECKS) == set(CHECK_IDS)


def _unmet(R: FiniteRing, an: RingAnalysis, s: int, requires: Iterable[str]) -> list[str]:
    out = []
    for req in requires:
        if req == "local" and not an.is_local:
            out.append(f"{R.label} is not local")
        elif req == "commutative" and not an.is_commutative:
            out.append(f"{R.label} is not commutative")
        elif req == "s in J" and not an.jacobson_mask[s]:
            out.append(f"s={R.name(s)} is not in J")
        elif req == "s unit" and not an.unit_mask[s]:
            out.append(f"s={R.name(s)} is not a unit")
        elif req == "weakly bleached" and an.is_local:
            flag = an.is_weakly_bleached
            if flag is None:
                flag = is_weakly_bleached(R, an)[0]
            if not flag:
                out.append(f"{R.label} is not weakly bleached")
    return out


def _gate(check: str, R: FiniteRing, an: RingAnalysis, s: int) -> CheckReport | None:
    if not an.center_mask[s]:
        return CheckReport(check, R.label, R.name(s), "hypotheses-not-met",
                           notes=[f"s={R.name(s)} is not central"])
    unmet = _unmet(R, an, s, _CHECKS[check].requires)
    if unmet:
        return CheckReport(check, R.label, R.name(s), "hypotheses-not-met", notes=unmet)
    return None


def run_check(check: str, R: FiniteRing, s, caps: Caps | None = None,
              cache: ContextCache | None = None) -> CheckReport:
    """Run one check on M2(R;s); unmet hypotheses short-circuit to ``hypotheses-not-met``."""
    if check not in _CHECKS:
        raise KeyError(f"unknown check {check!r}; known: {', '.join(CHECK_IDS)}")
    cache = cache or ContextCache(caps)
    caps = cache.caps
    s = R.element(s)
    an = cache.analysis(R)
    gated = _gate(check, R, an, s)
    if gated is not None:
        return gated
    if check in SERIES_CHECKS:
        return lift_series_check(R, series_precision_for(R, caps), (s,), caps, checks=(check,),
                                 cache=cache, label=check)
    start = time.perf_counter()
    ctx = cache.context(R, s)
    run = _Run(ctx, caps)
    _CHECKS[check].fn(run)
    status = "fail" if run.counterexample is not None else "pass"
    return CheckReport(check, R.label, R.name(s), status, run.counterexample, run.counts,
                       time.perf_counter() - start, run.sampled,
                       caps.seed if run.sampled else None, run.notes, run.witness)


def central_elements(R: FiniteRing, an: RingAnalysis) -> list[int]:
    return [int(x) for x in np.flatnonzero(an.center_mask)]


def run_all(catalog: Iterable[str | FiniteRing] | None = None, caps: Caps | None = None,
            checks: Iterable[str] | None = None, s_values: Iterable | None = None,
            jobs: int = 1, progress: Callable[[CheckReport], None] | None = None) -> list[CheckReport]:
    """Every (check, ring, central s) combination, in catalog order."""
    cache = ContextCache(caps)
    rings = [catalog_ring(r) if isinstance(r, str) else r
             for r in (DEFAULT_CATALOG if catalog is None else catalog)]
    checks = list(CHECK_IDS if checks is None else checks)
    for c in checks:
        if c not in _CHECKS:
            raise KeyError(f"unknown check {c!r}")
    tasks = []
    for R in rings:
        an = cache.analysis(R)
        svals = central_elements(R, an) if s_values is None else [R.element(x) for x in s_values]
        # group by context so a context's bulk data is built once and then dropped
        for s in svals:
            tasks.append((R, s, checks))

    def work(task):
        R, s, cs = task
        out = []
        for c in cs:
            rep = run_check(c, R, s, cache=cache)
            if progress:
                progress(rep)
            out.append(rep)
        cache.drop(R, s)
        return out

    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, tasks))
    else:
        results = [work(t) for t in tasks]
    return [rep for group in results for rep in group]


# ---------------------------------------------------------------------------
# power-series lifting


def series_precision_for(R: FiniteRing, caps: Caps) -> int:
    """Largest N <= series_precision with |M2(R[[x]]/(x^N))| under series_matrix_cap
    and |R[[x]]/(x^N)| under similarity_cap."""
    N = caps.series_precision
    while N > 1 and ((R.size**N) ** 4 > caps.series_matrix_cap or R.size**N > caps.similarity_cap):
        N -= 1
    return N


def _series_label(R: FiniteRing, coeffs) -> str:
    terms = []
    for i, c in enumerate(coeffs, start=1):
        if c == R.zero:
            continue
        mono = "x" if i == 1 else f"x^{i}"
        cn = R.name(c)
        terms.append(mono if c == R.one else f"({cn}){mono}" if "+" in cn else f"{cn}{mono}")
    return "+".join(terms) or "0"


def lift_series_check(R: FiniteRing, N: int, s_coefficients: Iterable = (), caps: Caps | None = None,
                      checks: Iterable[str] = SERIES_CHECKS, cache: ContextCache | None = None,
                      label: str | None = None) -> CheckReport:
    """Compare M2(R[[x]]/(x^N); s) with M2(R; 0) where s = sum s_i x^i (i >= 1).

    T2.18 / C2.19: A(x) strongly J-clean (clean) iff A(0) is, both by oracle.
    L2.17: every standard form similar to A(0) lifts to a standard form
    similar to A(x) with the same constant terms.
    """
    cache = cache or ContextCache(caps)
    caps = cache.caps
    checks = tuple(checks)
    name = label or "+".join(checks)
    start = time.perf_counter()
    an0 = cache.analysis(R)
    s_coefficients = [R.element(c) for c in s_coefficients]
    notes = [f"{TRUNCATION_NOTE} with N={N}"]
    s_name = _series_label(R, s_coefficients)
    unmet = _unmet(R, an0, R.zero, ("local", "weakly bleached"))
    if unmet:
        return CheckReport(name, R.label, s_name, "hypotheses-not-met", notes=unmet)
    if len(s_coefficients) > N - 1:
        dropped = s_coefficients[N - 1:]
        s_coefficients = s_coefficients[:N - 1]
        if any(c != R.zero for c in dropped):
            notes.append(f"coefficients beyond x^{N - 1} vanish in the truncation")
    ext = cache.series(R, N)
    R1 = ext.ring
    an1 = cache.analysis(R1)
    s1 = ext.from_coefficients([R.zero] + s_coefficients)
    if not an1.center_mask[s1]:
        return CheckReport(name, R.label, s_name, "hypotheses-not-met",
                           notes=notes + [f"s={R1.name(s1)} is not central in {R1.label}"])
    ctx1 = cache.context(R1, s1)
    ctx0 = cache.context(R, R.zero)
    n = R.size

    if ctx1.size <= caps.series_exhaustive_cap:
        idx = np.arange(ctx1.size, dtype=np.int64)
        sampled = False
    else:
        rng = np.random.default_rng(caps.seed)
        idx = np.sort(rng.choice(ctx1.size, size=min(caps.sample_size, ctx1.size), replace=False))
        sampled = True
        notes.append(f"sampled {len(idx)} of {ctx1.size} matrices over {R1.label}")
    X1 = ctx1.split(idx)
    at0 = ctx0.join(type(X1)(*(part % n for part in X1)))

    counts: dict = {"matrices": int(len(idx)), "precision": N}
    counterexample = None

    def fail(expl, i, **extra):
        nonlocal counterexample
        if counterexample is None:
            counterexample = {"explanation": expl, "matrix": ctx1.to_json(ctx1.matrix(int(i))),
                              "at_zero": ctx0.to_json(ctx0.matrix(int(at0[np.searchsorted(idx, i)]))),
                              **extra}

    for check, kind in (("T2.18", CleanKind.SJC), ("C2.19", CleanKind.SC)):
        if check not in checks:
            continue
        base = _oracle(ctx0, kind)[at0]
        if sampled:
            lifted = np.array([oracle_decide(ctx1, ctx1.matrix(int(i)), kind) is not None for i in idx])
        else:
            lifted = _oracle(ctx1, kind)
        bad = np.flatnonzero(lifted != base)
        counts[f"{check}_mismatches"] = int(len(bad))
        counts[f"{check}_{kind.short}_count"] = int(lifted.sum())
        if len(bad):
            fail(f"{check}: A(x) {kind.value}={bool(lifted[bad[0]])} but A(0)={bool(base[bad[0]])}",
                 idx[bad[0]])

    if "L2.17" in checks:
        forms0 = _standard_forms(ctx0)
        forms1 = _standard_forms(ctx1)
        lab0, lab1 = ctx0.classes().label, ctx1.classes().label
        lifted_by_class = {}
        for lab, members in forms1.items():
            Y = ctx1.split(np.asarray(members, dtype=np.int64))
            lifted_by_class[lab] = set(ctx0.join(type(Y)(*(part % n for part in Y))).tolist())
        premises = lifts = 0
        for k, i in enumerate(idx):
            need = forms0.get(int(lab0[at0[k]]), ())
            if not need:
                continue
            premises += 1
            have = lifted_by_class.get(int(lab1[i]), set())
            missing = [f for f in need if f not in have]
            if missing:
                fail("L2.17: standard form of A(0) has no lift similar to A(x)", i,
                     form=ctx0.to_json(ctx0.matrix(missing[0])))
            else:
                lifts += 1
        counts.update({"L2.17_premises": premises, "L2.17_lifted": lifts})

    status = "fail" if counterexample is not None else "pass"
    return CheckReport(name, R.label, s_name, status, counterexample, counts,
                       time.perf_counter() - start, sampled, caps.seed if sampled else None, notes)


# ---------------------------------------------------------------------------
# census


def census(ctx: FMContext) -> dict:
    """Counts of units, idempotents, J-members and the three clean kinds (by oracle)."""
    return {
        "ring": ctx.base.label,
        "s": ctx.base.name(ctx.s),
        "total": ctx.size,
        "units": int(ctx.unit_mask().sum()),
        "idempotents": int(len(ctx.idempotent_indices())),
        "jacobson": int(ctx.jacobson_mask().sum()),
        "sc": int(_oracle(ctx, CleanKind.SC).sum()),
        "sjc": int(_oracle(ctx, CleanKind.SJC).sum()),
        "snc": int(_oracle(ctx, CleanKind.SNC).sum()),
    }


def census_csv(rows: Iterable[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CENSUS_HEADER, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def summarize(reports: Iterable[CheckReport]) -> dict:
    out = {status: 0 for status in STATUSES}
    for rep in reports:
        out[rep.status] += 1
    return out


def format_table(reports: Iterable[CheckReport]) -> str:
    rows = [("check", "ring", "s", "status", "elapsed", "note")]
    for r in reports:
        note = ""
        if r.counterexample:
            note = r.counterexample.get("explanation", "")
        elif r.notes:
            note = r.notes[0]
        rows.append((r.check, r.ring, r.s, r.status + ("*" if r.sampled else ""), f"{r.elapsed:.2f}s", note))
    widths = [max(len(str(row[i])) for row in rows) for i in range(5)]
    lines = ["  ".join(str(v).ljust(w) for v, w in zip(row[:5], widths)) + "  " + row[5] for row in rows]
    return "\n".join(line.rstrip() for line in lines)
