start: int = nondet_int()
__ESBMC_assume(start >= 0 and start < 8)
value: int = start
value = value + 5
value = value - start
assert value != 5
