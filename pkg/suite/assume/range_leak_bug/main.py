x: int = nondet_int()
__ESBMC_assume(x > 0 and x < 10)
assert x != 7
