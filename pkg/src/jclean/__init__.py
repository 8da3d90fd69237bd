"""Strongly clean, strongly J-clean and strongly nil-clean elements of the
formal matrix ring M2(R;s) over finite rings."""

__version__ = "0.1.0"

from .catalog import DEFAULT_CATALOG, catalog_names, catalog_ring
from .clean import (
    CleanCertificate,
    CleanKind,
    char_poly_roots,
    decide,
    decide_sc,
    decide_sjc,
    decide_sjc_commutative,
    decide_sjc_radical_s,
    decide_snc,
    det_tr_radical_test,
    find_standard_form,
    oracle_decide,
    oracle_table,
    radical_power_check,
    right_root_search,
    verify_certificate,
)
from .config import Caps, caps_from_env
from .errors import CapExceeded, HypothesisError, JCleanError, RingConstructionError, TheoremViolation
from .formal import FMatrix, FMContext, det_s, fm_inverse, fm_is_unit, fm_mul, parse_matrix, tr
from .rings import FiniteRing, RingSpec, analyze, build_ring, truncated_power_series, verify_ring_axioms
from .suite import CHECK_IDS, CheckReport, census, lift_series_check, run_all, run_check

__all__ = [name for name in dir() if not name.startswith("_")]
