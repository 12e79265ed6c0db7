"""Where the prime slot forces a run of zeros.

With P0 = r + m0*A, every term before P0 + k except n* = P0 + j0 is a
multiple of b**-P0, and d(n*) = 2 puts a lone non-zero digit near n*.  If the
rest of the tail is small enough, zeros follow it.  At toy sizes the
guarantee is empty; a hand-built k = 40 example shows the mechanism.
"""

import random
from fractions import Fraction

from divseries import (
    CrtPlan,
    DigitString,
    M0Certificate,
    SeriesSpec,
    build_plan,
    find_m0,
    find_zero_runs,
    formula_run_length,
    predict_run_window,
)

spec = SeriesSpec.constant(2, 1)
desk = build_plan(2, 2, 2, 4)
cert = find_m0(desk, spec, 1000)
pred = predict_run_window(cert, spec, strict=False)
print(f"desk plan, k=2: {pred.status} ({pred.note})")

k, j0, r = 40, 2, 100
plan = CrtPlan(2, k, j0, k + 1, tuple(() for _ in range(k)), "claimed_strength", 1, r)
margin = Fraction(1, 2 ** (k // 2 - j0))
cert = M0Certificate(plan, 0, r + j0, "prime", (0, 0), "structural", "strict", "below", margin)
pred = predict_run_window(cert, spec)
print(f"k=40: {pred.guaranteed_run_length} zeros guaranteed (closed form gives "
      f"{formula_run_length(k, 2, 1)}), run starts in {pred.run_start_window}")

# digits of U + 2/2**n* + T, with T as large as the margin allows
U = Fraction(random.Random(0).getrandbits(r) | 1, 2**r)
T = margin / 2**cert.n_star - Fraction(1, 2 ** (cert.n_star + 60))
x = U + Fraction(2, 2**cert.n_star) + T
digits = []
rem = x - int(x)
for _ in range(cert.n_star + 40):
    rem *= 2
    digits.append(int(rem))
    rem -= int(rem)
fixture = DigitString(2, 1, int(x), tuple(digits))
for run in find_zero_runs(fixture, 10):
    print(f"  zero run at {run.start}, length {run.length}, "
          f"{'inside' if pred.contains(run) else 'outside'} the window")
