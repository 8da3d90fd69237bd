"""Finite unital rings given by operation tables.

Every ring element is addressed by a dense canonical index in ``range(size)``
and both operations are stored as full ``size x size`` numpy tables, so the
exhaustive scans done everywhere else in the package are table lookups.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import CapExceeded, HypothesisError, RingConstructionError

KINDS = ("modular-integers", "quotient-polynomial", "explicit-tables", "truncated-power-series")

DEFAULT_AXIOM_CAP = 256
DEFAULT_ANALYSIS_CAP = 4096
# weak bleaching costs |J| * |1+J| * |R| lookups; skip it inside analyze() above this
BLEACH_BUDGET = 2**26


@dataclass(frozen=True)
class RingSpec:
    """Declarative description of a finite ring (mirrors the JSON spec file)."""

    kind: str
    n: int | None = None
    p: int | None = None
    modulus: tuple[int, ...] | None = None   # coefficients low -> high, monic
    add: tuple[tuple[int, ...], ...] | None = None
    mul: tuple[tuple[int, ...], ...] | None = None
    zero: int = 0
    one: int = 1
    base: "RingSpec | None" = None
    precision: int | None = None
    names: tuple[str, ...] | None = None
    label: str | None = None

    @classmethod
    def from_json(cls, obj: dict) -> "RingSpec":
        if not isinstance(obj, dict):
            raise RingConstructionError("ring spec must be a JSON object")
        kind = obj.get("kind")
        if kind not in KINDS:
            raise RingConstructionError(f"field 'kind': expected one of {list(KINDS)}, got {kind!r}")
        known = {"kind", "n", "p", "modulus", "add", "mul", "zero", "one", "base", "precision",
                 "names", "label"}
        extra = set(obj) - known
        if extra:
            raise RingConstructionError(f"unknown field(s) {sorted(extra)}")

        def table(key):
            raw = obj.get(key)
            if raw is None:
                return None
            if not isinstance(raw, list) or not all(isinstance(row, list) for row in raw):
                raise RingConstructionError(f"field {key!r}: expected a list of rows")
            return tuple(tuple(int(v) for v in row) for row in raw)

        base = obj.get("base")
        names = obj.get("names")
        return cls(
            kind=kind,
            n=obj.get("n"),
            p=obj.get("p"),
            modulus=tuple(obj["modulus"]) if obj.get("modulus") is not None else None,
            add=table("add"),
            mul=table("mul"),
            zero=int(obj.get("zero", 0)),
            one=int(obj.get("one", 1)),
            base=cls.from_json(base) if base is not None else None,
            precision=obj.get("precision"),
            names=tuple(str(x) for x in names) if names is not None else None,
            label=obj.get("label"),
        )

    def to_json(self) -> dict:
        out: dict = {"kind": self.kind}
        if self.kind == "modular-integers":
            out["n"] = self.n
        elif self.kind == "quotient-polynomial":
            out["p"] = self.p
            out["modulus"] = list(self.modulus or ())
        elif self.kind == "explicit-tables":
            out["add"] = [list(r) for r in self.add or ()]
            out["mul"] = [list(r) for r in self.mul or ()]
            out["zero"] = self.zero
            out["one"] = self.one
        else:
            out["base"] = self.base.to_json() if self.base else None
            out["precision"] = self.precision
        if self.names is not None:
            out["names"] = list(self.names)
        if self.label is not None:
            out["label"] = self.label
        return out


def load_ring_spec(path: str) -> RingSpec:
    """Read a ring spec file; JSON syntax errors are re-raised with line/column."""
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise RingConstructionError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    try:
        return RingSpec.from_json(obj)
    except RingConstructionError as exc:
        raise RingConstructionError(f"{path}: {exc}") from exc


def _small_dtype(n: int):
    return np.uint8 if n <= 256 else np.uint16 if n <= 65536 else np.int64


class FiniteRing:
    """A finite unital ring on ``range(size)`` with table-driven operations."""

    def __init__(self, add, mul, zero: int, one: int, spec: RingSpec | None = None,
                 names: Sequence[str] | None = None, label: str | None = None):
        add = np.asarray(add)
        mul = np.asarray(mul)
        n = add.shape[0]
        if add.ndim != 2 or add.shape != (n, n) or mul.shape != (n, n):
            raise RingConstructionError("operation tables must be square and of equal size")
        if n < 2:
            raise RingConstructionError("ring must have at least two elements (zero != one)")
        if add.min() < 0 or add.max() >= n or mul.min() < 0 or mul.max() >= n:
            raise RingConstructionError(f"table entries must lie in [0, {n})")
        if not (0 <= zero < n and 0 <= one < n):
            raise RingConstructionError("zero/one out of range")
        if zero == one:
            raise RingConstructionError("zero and one must differ")
        dt = _small_dtype(n)
        self.size = n
        self.add = add.astype(dt)
        self.mul = mul.astype(dt)
        self.add.setflags(write=False)
        self.mul.setflags(write=False)
        self.zero = int(zero)
        self.one = int(one)
        self.spec = spec
        self.label = label or (spec.label if spec and spec.label else f"ring[{n}]")
        if names is not None and len(names) != n:
            raise RingConstructionError(f"name map has {len(names)} entries for a ring of size {n}")
        self.names = list(names) if names is not None else [str(i) for i in range(n)]
        if len(set(self.names)) != n:
            raise RingConstructionError("element names must be distinct")
        self._index = {name: i for i, name in enumerate(self.names)}

        hit = self.add == self.zero
        if not hit.any(axis=1).all():
            raise RingConstructionError("addition has no inverses for some element")
        self.neg = hit.argmax(axis=1).astype(dt)
        self.neg.setflags(write=False)
        # plain lists are much faster than numpy scalars in scalar loops
        self.add_l = self.add.tolist()
        self.mul_l = self.mul.tolist()
        self.neg_l = self.neg.tolist()

    def __repr__(self):
        return f"FiniteRing({self.label}, size={self.size})"

    def __len__(self):
        return self.size

    # -- scalar helpers ------------------------------------------------
    def a(self, x: int, y: int) -> int:
        return self.add_l[x][y]

    def m(self, x: int, y: int) -> int:
        return self.mul_l[x][y]

    def sub(self, x: int, y: int) -> int:
        return self.add_l[x][self.neg_l[y]]

    def power(self, x: int, k: int) -> int:
        out = self.one
        for _ in range(k):
            out = self.mul_l[out][x]
        return out

    def element(self, token) -> int:
        """Resolve an index or an element name to a canonical index."""
        if isinstance(token, (int, np.integer)):
            idx = int(token)
        else:
            text = str(token).strip()
            if text in self._index:
                return self._index[text]
            try:
                idx = int(text)
            except ValueError:
                raise ValueError(f"unknown element {token!r} of {self.label}") from None
        if not 0 <= idx < self.size:
            raise ValueError(f"element index {idx} out of range for {self.label} (size {self.size})")
        return idx

    def name(self, idx: int) -> str:
        return self.names[idx]

    def sub_table(self) -> np.ndarray:
        return self.add[:, self.neg]


# ---------------------------------------------------------------------------
# construction


def _is_prime(p: int) -> bool:
    return p >= 2 and all(p % q for q in range(2, math.isqrt(p) + 1))


def _modular(n: int):
    if not isinstance(n, int) or n < 2:
        raise RingConstructionError(f"modular-integers: n must be an integer >= 2, got {n!r}")
    r = np.arange(n)
    return (r[:, None] + r[None, :]) % n, (r[:, None] * r[None, :]) % n, [str(i) for i in range(n)]


def _poly_name(coeffs, var="t") -> str:
    terms = []
    for i, c in enumerate(coeffs):
        if c == 0:
            continue
        mono = "" if i == 0 else var if i == 1 else f"{var}^{i}"
        if not mono:
            terms.append(str(c))
        else:
            terms.append(mono if c == 1 else f"{c}{mono}")
    return "+".join(terms) if terms else "0"


def _quotient_poly(p: int, modulus: Sequence[int], cap: int):
    if not _is_prime(p):
        raise RingConstructionError(f"quotient-polynomial: p must be prime, got {p!r}")
    m = [int(c) % p for c in modulus]
    if len(m) < 2:
        raise RingConstructionError("quotient-polynomial: modulus must have degree >= 1")
    if m[-1] != 1:
        raise RingConstructionError("quotient-polynomial: modulus must be monic (leading coefficient 1)")
    k = len(m) - 1
    size = p**k
    if size > cap:
        raise CapExceeded("quotient-polynomial ring", size, cap)
    digits = (np.arange(size)[:, None] // p ** np.arange(k)[None, :]) % p   # (size, k)
    # reduction of t^j, j < 2k-1, into the basis 1..t^(k-1)
    red = np.zeros((2 * k - 1, k), dtype=np.int64)
    for j in range(k):
        red[j, j] = 1
    for j in range(k, 2 * k - 1):
        prev = red[j - 1]
        top = prev[-1]
        shifted = np.concatenate(([0], prev[:-1]))
        red[j] = (shifted - top * np.array(m[:-1])) % p
    weights = p ** np.arange(k)
    add = ((digits[:, None, :] + digits[None, :, :]) % p) @ weights
    prod = np.zeros((size, size, 2 * k - 1), dtype=np.int64)
    for i in range(k):
        for j in range(k):
            prod[:, :, i + j] += digits[:, None, i] * digits[None, :, j]
    mul = ((prod @ red) % p) @ weights
    names = [_poly_name(list(row)) for row in digits]
    return add, mul, names


def _explicit(spec: RingSpec):
    if spec.add is None or spec.mul is None:
        raise RingConstructionError("explicit-tables: both 'add' and 'mul' are required")
    n = len(spec.add)
    for key, tab in (("add", spec.add), ("mul", spec.mul)):
        if len(tab) != n or any(len(row) != n for row in tab):
            raise RingConstructionError(f"explicit-tables: table {key!r} is ragged or not {n}x{n}")
        if any(not 0 <= v < n for row in tab for v in row):
            raise RingConstructionError(f"explicit-tables: table {key!r} has entries outside [0, {n})")
    return np.array(spec.add), np.array(spec.mul)


def build_ring(spec: RingSpec, cap: int = DEFAULT_ANALYSIS_CAP) -> FiniteRing:
    """Construct the ring described by ``spec``."""
    kind = spec.kind
    if kind == "modular-integers":
        add, mul, names = _modular(spec.n)
        label = f"Z{spec.n}"
        if spec.n > cap:
            raise CapExceeded("modular ring", spec.n, cap)
        ring = FiniteRing(add, mul, 0, 1, spec, names, spec.label or label)
    elif kind == "quotient-polynomial":
        if spec.p is None or spec.modulus is None:
            raise RingConstructionError("quotient-polynomial: fields 'p' and 'modulus' are required")
        add, mul, names = _quotient_poly(spec.p, spec.modulus, cap)
        label = f"F{spec.p}[t]/({_poly_name([c % spec.p for c in spec.modulus])})"
        ring = FiniteRing(add, mul, 0, 1, spec, names, spec.label or label)
    elif kind == "explicit-tables":
        add, mul = _explicit(spec)
        ring = FiniteRing(add, mul, spec.zero, spec.one, spec, None, spec.label)
    elif kind == "truncated-power-series":
        if spec.base is None:
            raise RingConstructionError("truncated-power-series: field 'base' is required")
        if not isinstance(spec.precision, int) or spec.precision < 1:
            raise RingConstructionError("truncated-power-series: precision N must be an integer >= 1")
        base = build_ring(spec.base, cap)
        ring = truncated_power_series(base, spec.precision, cap).ring
        ring.spec = spec
        if spec.label:
            ring.label = spec.label
    else:
        raise RingConstructionError(f"unknown ring kind {kind!r}")
    if spec.names is not None and kind != "truncated-power-series":
        renamed = FiniteRing(ring.add, ring.mul, ring.zero, ring.one, spec, spec.names, ring.label)
        return renamed
    return ring


# ---------------------------------------------------------------------------
# axioms


@dataclass
class AxiomReport:
    passed: bool
    violations: list[tuple[str, tuple[int, ...]]] = field(default_factory=list)

    def first(self):
        return self.violations[0] if self.violations else None


def _first_true(mask: np.ndarray):
    hit = np.argwhere(mask)
    return tuple(int(v) for v in hit[0]) if len(hit) else None


def verify_ring_axioms(R: FiniteRing, cap: int = DEFAULT_AXIOM_CAP) -> AxiomReport:
    """Exhaustively check the unital ring axioms; reports the first witness per law."""
    n = R.size
    if n > cap:
        raise CapExceeded("axiom check", n, cap)
    A, M = R.add.astype(np.intp), R.mul.astype(np.intp)
    z, o = R.zero, R.one
    violations = []

    def law(name, witness):
        if witness is not None:
            violations.append((name, witness))

    law("add-commutative", _first_true(A != A.T))
    bad = A[z, :] != np.arange(n)
    law("add-identity", (z, int(np.argmax(bad))) if bad.any() else None)
    no_inv = ~(A == z).any(axis=1)
    law("add-inverse", (int(np.argmax(no_inv)),) if no_inv.any() else None)
    bad = M[o, :] != np.arange(n)
    law("mul-left-identity", (o, int(np.argmax(bad))) if bad.any() else None)
    bad = M[:, o] != np.arange(n)
    law("mul-right-identity", (int(np.argmax(bad)), o) if bad.any() else None)
    # triple laws, one slab per first argument
    for x in range(n):
        # (x+y)+z == x+(y+z)
        bad = A[A[x, :], :] != A[x, :][A]
        if bad.any():
            law("add-associative", (x,) + _first_true(bad))
            break
    for x in range(n):
        bad = M[M[x, :], :] != M[x, :][M]
        if bad.any():
            law("mul-associative", (x,) + _first_true(bad))
            break
    for x in range(n):
        # x(y+z) == xy + xz
        bad = M[x, :][A] != A[M[x, :][:, None], M[x, :][None, :]]
        if bad.any():
            law("left-distributive", (x,) + _first_true(bad))
            break
    for x in range(n):
        # (y+z)x == yx + zx
        bad = M[:, x][A] != A[M[:, x][:, None], M[:, x][None, :]]
        if bad.any():
            y, zz = _first_true(bad)
            law("right-distributive", (y, zz, x))
            break
    if z == o:
        law("zero-ne-one", (z,))
    return AxiomReport(not violations, violations)


def commutativity_witness(R: FiniteRing):
    """First pair ``(x, y)`` with ``xy != yx``, or ``None``."""
    return _first_true(R.mul != R.mul.T)


# ---------------------------------------------------------------------------
# structure


@dataclass(frozen=True, eq=False)
class RingAnalysis:
    units: frozenset
    inverse: dict
    jacobson: frozenset
    idempotents: frozenset
    nilpotents: frozenset
    center: frozenset
    is_local: bool
    is_commutative: bool
    is_weakly_bleached: bool | None
    residue_size: int | None
    locality_witness: tuple[int, int] | None
    # boolean masks over range(size), used by the vectorized code
    unit_mask: np.ndarray
    jacobson_mask: np.ndarray
    nil_mask: np.ndarray
    center_mask: np.ndarray
    inverse_array: np.ndarray    # -1 on non-units

    def in_one_plus_j(self, R: FiniteRing) -> np.ndarray:
        """Mask of ``1 + J(R)``."""
        return self.jacobson_mask[R.add[np.arange(R.size), R.neg[R.one]]]

    def summary(self, R: FiniteRing) -> dict:
        def names(s):
            return [R.name(i) for i in sorted(s)]
        return {
            "ring": R.label,
            "size": R.size,
            "units": names(self.units),
            "jacobson": names(self.jacobson),
            "idempotents": names(self.idempotents),
            "nilpotents": names(self.nilpotents),
            "center": names(self.center),
            "is_local": self.is_local,
            "is_commutative": self.is_commutative,
            "is_weakly_bleached": self.is_weakly_bleached,
            "residue_size": self.residue_size,
            "locality_witness": [R.name(i) for i in self.locality_witness] if self.locality_witness else None,
        }


def _mask_to_set(mask) -> frozenset:
    return frozenset(int(i) for i in np.flatnonzero(mask))


def analyze(R: FiniteRing, cap: int = DEFAULT_ANALYSIS_CAP) -> RingAnalysis:
    """Units, Jacobson radical, idempotents, nilpotents, center and locality of ``R``."""
    n = R.size
    if n > cap:
        raise CapExceeded("ring analysis", n, cap)
    M = R.mul.astype(np.intp)
    r = np.arange(n)
    one_hit = M == R.one
    two_sided = one_hit & one_hit.T     # [x, y]: xy = 1 and yx = 1
    unit = two_sided.any(axis=1)
    inverse = np.where(unit, two_sided.argmax(axis=1), -1)

    one_minus = R.add[R.one, R.neg].astype(np.intp)    # y -> 1 - y
    # x in J iff 1 - r x and 1 - x r are units for every r
    jac = unit[one_minus[M]].all(axis=0) & unit[one_minus[M]].all(axis=1)

    powers = r.copy()
    for _ in range(max(1, math.ceil(math.log2(n))) + 1):
        powers = M[powers, powers]
    nil = powers == R.zero
    idem = M[r, r] == r
    center = (M == M.T).all(axis=1)
    commutative = bool(center.all())

    nonunits = np.flatnonzero(~unit)
    sums = R.add[np.ix_(nonunits, nonunits)]
    bad = unit[sums]
    is_local = not bad.any()
    witness = None
    if not is_local:
        i, j = _first_true(bad)
        witness = (int(nonunits[i]), int(nonunits[j]))
    residue = n // int(jac.sum()) if is_local else None

    for arr in (unit, jac, nil, center, inverse):
        arr.setflags(write=False)
    analysis = RingAnalysis(
        units=_mask_to_set(unit),
        inverse={int(x): int(inverse[x]) for x in np.flatnonzero(unit)},
        jacobson=_mask_to_set(jac),
        idempotents=_mask_to_set(idem),
        nilpotents=_mask_to_set(nil),
        center=_mask_to_set(center),
        is_local=is_local,
        is_commutative=commutative,
        is_weakly_bleached=None,
        residue_size=residue,
        locality_witness=witness,
        unit_mask=unit,
        jacobson_mask=jac,
        nil_mask=nil,
        center_mask=center,
        inverse_array=inverse,
    )
    if is_local and int(jac.sum()) ** 2 * n <= BLEACH_BUDGET:
        bleached, _ = is_weakly_bleached(R, analysis)
        object.__setattr__(analysis, "is_weakly_bleached", bleached)
    return analysis


def j_s_set(R: FiniteRing, analysis: RingAnalysis, s: int) -> frozenset:
    """``{x | s x in J(R)}`` for central ``s``."""
    return _mask_to_set(j_s_mask(R, analysis, s))


def j_s_mask(R: FiniteRing, analysis: RingAnalysis, s: int) -> np.ndarray:
    if not analysis.center_mask[s]:
        raise HypothesisError(f"s={R.name(s)} is not central in {R.label}")
    return analysis.jacobson_mask[R.mul[s, :]]


def is_weakly_bleached(R: FiniteRing, analysis: RingAnalysis):
    """Decide weak bleaching; returns ``(flag, first failing (a, b, which) or None)``.

    For every ``a`` in J(R) and ``b`` in 1+J(R) both ``r -> b r - r a`` and
    ``r -> a r - r b`` must be onto.
    """
    if not analysis.is_local:
        raise HypothesisError(f"{R.label} is not local; weak bleaching is defined for local rings")
    M = R.mul.astype(np.intp)
    S = R.sub_table().astype(np.intp)
    J = np.flatnonzero(analysis.jacobson_mask)
    B = np.flatnonzero(analysis.in_one_plus_j(R))
    n = R.size
    for a in J:
        for which, images in (
            ("l_b - r_a", S[M[B, :], M[:, a][None, :]]),     # rows: b in B
            ("l_a - r_b", S[M[a, :][None, :], M[:, B].T]),
        ):
            srt = np.sort(images, axis=1)
            onto = (np.diff(srt, axis=1) != 0).all(axis=1) if n > 1 else np.ones(len(B), bool)
            if not onto.all():
                b = int(B[np.argmin(onto)])
                return False, (int(a), b, which)
    return True, None


# ---------------------------------------------------------------------------
# truncated power series


class SeriesExtension(NamedTuple):
    ring: FiniteRing
    embed: Callable[[int], int]
    eval_at_zero: Callable[[int], int]
    base: FiniteRing
    precision: int

    def coefficients(self, idx: int) -> list[int]:
        n = self.base.size
        return [(idx // n**i) % n for i in range(self.precision)]

    def from_coefficients(self, coeffs: Sequence[int]) -> int:
        n = self.base.size
        out = 0
        for i in range(self.precision):
            c = coeffs[i] if i < len(coeffs) else self.base.zero
            out += c * n**i
        return out


def _series_name(base: FiniteRing, coeffs) -> str:
    terms = []
    for i, c in enumerate(coeffs):
        if c == base.zero:
            continue
        cn = base.name(c)
        if "+" in cn or "-" in cn:
            cn = f"({cn})"
        mono = "" if i == 0 else "x" if i == 1 else f"x^{i}"
        if not mono:
            terms.append(cn)
        elif c == base.one:
            terms.append(mono)
        else:
            terms.append(f"{cn}{mono}")
    return "+".join(terms) if terms else "0"


def truncated_power_series(R: FiniteRing, N: int, cap: int = DEFAULT_ANALYSIS_CAP) -> SeriesExtension:
    """The quotient ``R[[x]]/(x^N)`` on coefficient vectors ``(r_0, ..., r_{N-1})``.

    The index of a series is ``sum(r_i * |R|**i)``, so ``embed`` is the
    identity on indices and ``eval_at_zero`` is ``idx % |R|``.
    """
    if not isinstance(N, int) or N < 1:
        raise RingConstructionError(f"truncated-power-series: precision N must be >= 1, got {N!r}")
    n = R.size
    m = n**N
    if m > cap:
        raise CapExceeded("truncated power series ring", m, cap)
    idx = np.arange(m)
    digits = (idx[:, None] // n ** np.arange(N)[None, :]) % n   # (m, N)
    weights = n ** np.arange(N)
    A, M = R.add.astype(np.intp), R.mul.astype(np.intp)
    add = np.zeros((m, m), dtype=np.int64)
    mul = np.zeros((m, m), dtype=np.int64)
    for k in range(N):
        add += A[digits[:, None, k], digits[None, :, k]] * weights[k]
        acc = np.full((m, m), R.zero, dtype=np.intp)
        for i in range(k + 1):
            acc = A[acc, M[digits[:, None, i], digits[None, :, k - i]]]
        mul += acc * weights[k]
    zero = R.zero * int(weights.sum())
    names = [_series_name(R, row) for row in digits]
    label = f"{R.label}[[x]]/(x^{N})"
    one = R.one + R.zero * int(weights[1:].sum())
    ring = FiniteRing(add, mul, zero, one, None, names, label)
    ring.spec = RingSpec(kind="truncated-power-series", base=R.spec, precision=N)

    def embed(r: int) -> int:
        return int(r) + sum(R.zero * n**i for i in range(1, N))

    def eval_at_zero(series: int) -> int:
        return int(series) % n

    return SeriesExtension(ring, embed, eval_at_zero, R, N)
