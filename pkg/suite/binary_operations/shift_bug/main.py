x: int = nondet_int()
__ESBMC_assume(x >= 1 and x <= 8)
assert x << 2 != 16
