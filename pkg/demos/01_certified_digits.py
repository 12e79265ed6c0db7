"""Certified binary digits of sum d(n)/2**n and its alternating twin.

The partial sum up to M is exact; the tail is at most max|a| * sum n/b**n.
Every digit printed below holds for every value in that interval.
"""

from divseries import SeriesSpec, certified_prefix, certified_prefix_at

eb = SeriesSpec.constant(2, 1)
res = certified_prefix(eb, 64)
bits = "".join(map(str, res.digits.digits[:64]))
print(f"sum d(n)/2^n = {res.digits.integer_part}.{bits}... (base 2)")
print(f"  truncated at M={res.truncation}, {res.certified_length} digits certified")

# the fraction as a decimal, from the certified bits alone
frac = sum(d / 2**i for i, d in enumerate(res.digits.digits[:52], 1))
print(f"  fractional part ~ {frac:.10f}")

# more terms never change a certified digit, they only add new ones
for M in (64, 128, 256, 512):
    cur = certified_prefix_at(eb, M)
    print(f"  M={M:4d}: {cur.certified_length:4d} certified digits")

alt = certified_prefix(SeriesSpec.alternating(2), 64)
sign = "-" if alt.digits.sign < 0 else ""
print(f"sum d(n)(-1)^n/2^n = {sign}{alt.digits.integer_part}."
      f"{''.join(map(str, alt.digits.digits[:40]))}...")
