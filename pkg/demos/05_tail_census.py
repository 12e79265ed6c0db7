"""How often the tail past the slot window is too big.

For each m the census compares sum_{n > r+k+mA} d(n)/2**n against the
threshold b**-(r + k/2 + mA).  With k = 2 the threshold sits one binary place
below the first omitted term, so every row is expected to exceed it; this is
why strict tail mode needs larger k.
"""

from collections import Counter

from divseries import SeriesSpec, build_plan, lemma1_census

plan = build_plan(2, 2, 2, 4)
rep = lemma1_census(plan, SeriesSpec.constant(2, 1), 50)
print(Counter(r.verdict.value for r in rep.rows))
print(f"exceedances {rep.exceedances}, unresolved {rep.unresolved}, shape {rep.shape_value()}")
print(f"largest summation window used: {max(r.window_used for r in rep.rows)} terms")
