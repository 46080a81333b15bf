x: int = nondet_int()
__ESBMC_assume(x >= -5 and x <= 5)
assert abs(x) <= 4
