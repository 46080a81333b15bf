x: int = nondet_int()
__ESBMC_assume(x >= 0 and x <= 10)
square: int = (x + 1) * (x + 1)
assert square == x * x + 2 * x + 1
assert x * 3 + 2 <= 32
remainder: int = (x * 7 + 3) % 5
assert remainder >= 0 and remainder < 5
