"""A rational number has eventually periodic digits; these prefixes do not.

Each (preperiod s, period p) pair is ruled out by a stored witness position.
The finite series is rational and is caught as such.
"""

from divseries import SeriesSpec, certified_prefix, periodicity_scan, recheck

for name, spec in [("sum d(n)/2^n", SeriesSpec.constant(2, 1)),
                   ("sum d(n)(-1)^n/2^n", SeriesSpec.alternating(2)),
                   ("sum d(n)/3^n", SeriesSpec.constant(3, 1))]:
    res = certified_prefix(spec, 256)
    v = periodicity_scan(res, 64, 64, length=256)
    print(f"{name}: {v.summary()} (recheck {'ok' if recheck(v, res) else 'FAILED'})")

control = certified_prefix(SeriesSpec.explicit(2, [1, 1, 0, 1]), 4)
v = periodicity_scan(control, 64, 64, length=256)
print(f"finite series 1,1,0,1: first survivors {v.survivors[:3]}")
