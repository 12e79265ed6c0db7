"""Building the congruence plan and looking for a prime slot.

Slot j gets its own primes p with p**(b-1) exactly dividing r + j, so every
r + mA + j has b**(#primes) dividing its divisor count.  One slot is left free
so that r + mA + j0 can be prime.
"""

from divseries import SeriesSpec, build_plan, find_m0, verify_plan

plan = build_plan(2, 2, 2, 4, "claimed_strength")
print("slots:", plan.slots)
print(f"A = {plan.A}, r = {plan.r}")
print("invariant violations:", plan.check() or "none")

rep = verify_plan(plan, range(100))
print(f"divisibility over m < 100: {'all pass' if rep.passed else rep.failures[:3]}")
for c in rep.checks[:2]:
    print(f"  m={c.m} j={c.j}: n={c.n}, d(n) has 2-exponent {c.found} (needs {c.target})")

cert = find_m0(plan, SeriesSpec.constant(2, 1), 10_000)
print(f"first prime slot: m0={cert.m0}, n*={cert.n_star} ({cert.primality})")

# both readings of the slot sizes
for mode in ("paper_faithful", "claimed_strength"):
    p = build_plan(3, 4, 1, 10, mode)
    print(f"{mode:17s} b=3 k=4: block sizes {[len(s) for s in p.slots]}, A has {p.A.bit_length()} bits")
