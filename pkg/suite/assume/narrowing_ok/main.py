x: int = nondet_int()
__ESBMC_assume(x >= 0 and x <= 100)
__ESBMC_assume(x > 10)
__ESBMC_assume(x < 13)
assert x == 11 or x == 12
assert x * 2 >= 22
