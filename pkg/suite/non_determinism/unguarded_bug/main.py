flag: bool = nondet_bool()
x: int = nondet_int()
__ESBMC_assume(x >= 0 and x <= 3)
assert flag or x < 3
