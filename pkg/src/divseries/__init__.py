"""Certified digits of divisor-function series and the congruence machinery
that forces long zero runs in them."""

__version__ = "0.1.0"

from .analysis import (
    PeriodicityVerdict,
    RunPrediction,
    ZeroRun,
    find_zero_runs,
    formula_run_length,
    periodicity_scan,
    predict_run_window,
    recheck,
)
from .arith import (
    crt_solve,
    divisor_count,
    divisor_sieve,
    is_prime,
    prime_count_ap,
    primes_in_range,
    valuation,
)
from .construction import (
    CrtPlan,
    M0Certificate,
    build_plan,
    choose_j0,
    choose_k,
    find_m0,
    verify_plan,
)
from .digits import (
    DigitString,
    ScaledInteger,
    accumulate_terms,
    certified_common_prefix,
    compare,
    to_digits,
)
from .series import (
    CertifiedPrefix,
    SeriesSpec,
    Verdict,
    certified_prefix,
    certified_prefix_at,
    lemma1_census,
    tail_compare,
    tail_upper_bound,
)
