"""Named rings used by the suite and the CLI (``--ring z4`` etc.)."""

from __future__ import annotations

from functools import lru_cache

from .rings import FiniteRing, RingSpec, build_ring

# F4 = F2[w]/(w^2 + w + 1) encoded as 2-bit ints: bit 0 -> 1, bit 1 -> w
_F4_MUL = [[0, 0, 0, 0], [0, 1, 2, 3], [0, 2, 3, 1], [0, 3, 1, 2]]
_F4_NAMES = ["0", "1", "w", "w^2"]


def twist_ring_spec() -> RingSpec:
    """F4 + F4 x with x a = a^2 x and x^2 = 0, as explicit tables.

    Element ``alpha + beta x`` has index ``alpha + 4 beta``.
    """
    def sq(a):
        return _F4_MUL[a][a]

    add, mul, names = [], [], []
    for i in range(16):
        a, b = i % 4, i // 4
        add.append([(a ^ (j % 4)) + 4 * (b ^ (j // 4)) for j in range(16)])
        row = []
        for j in range(16):
            c, d = j % 4, j // 4
            # (a + b x)(c + d x) = ac + (ad + b c^2) x
            row.append(_F4_MUL[a][c] + 4 * (_F4_MUL[a][d] ^ _F4_MUL[b][sq(c)]))
        mul.append(row)
        if b == 0:
            names.append(_F4_NAMES[a])
        else:
            xpart = "x" if b == 1 else f"{_F4_NAMES[b]}x"
            names.append(xpart if a == 0 else f"{_F4_NAMES[a]}+{xpart}")
    return RingSpec(kind="explicit-tables", add=tuple(map(tuple, add)), mul=tuple(map(tuple, mul)),
                    zero=0, one=1, names=tuple(names), label="twist")


def _specs() -> dict[str, RingSpec]:
    return {
        "z2": RingSpec(kind="modular-integers", n=2, label="Z2"),
        "z3": RingSpec(kind="modular-integers", n=3, label="Z3"),
        "z4": RingSpec(kind="modular-integers", n=4, label="Z4"),
        "z6": RingSpec(kind="modular-integers", n=6, label="Z6"),
        "z8": RingSpec(kind="modular-integers", n=8, label="Z8"),
        "z9": RingSpec(kind="modular-integers", n=9, label="Z9"),
        "f2t2": RingSpec(kind="quotient-polynomial", p=2, modulus=(0, 0, 1), label="F2[t]/(t^2)"),
        "f3t2": RingSpec(kind="quotient-polynomial", p=3, modulus=(0, 0, 1), label="F3[t]/(t^2)"),
        "f4": RingSpec(kind="quotient-polynomial", p=2, modulus=(1, 1, 1), label="F4"),
        "twist": twist_ring_spec(),
    }


CATALOG_SPECS = _specs()
DEFAULT_CATALOG = ("z2", "z3", "z4", "z8", "z9", "f2t2", "f3t2", "f4", "twist")


def catalog_names() -> list[str]:
    return list(CATALOG_SPECS)


@lru_cache(maxsize=None)
def catalog_ring(name: str) -> FiniteRing:
    try:
        spec = CATALOG_SPECS[name.lower()]
    except KeyError:
        raise KeyError(f"unknown catalog ring {name!r}; known: {', '.join(CATALOG_SPECS)}") from None
    return build_ring(spec)
