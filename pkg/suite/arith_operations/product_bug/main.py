x: int = nondet_int()
__ESBMC_assume(x > 0 and x < 20)
doubled: int = x * 2
assert doubled != 10
