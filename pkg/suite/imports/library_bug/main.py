from mathlib import triple

x: int = nondet_int()
__ESBMC_assume(x > 0 and x < 15)
t: int = triple(x)
assert t != 12
