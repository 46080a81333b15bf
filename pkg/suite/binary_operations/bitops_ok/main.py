a: int = 12
b: int = 10
assert a & b == 8
assert a | b == 14
assert a ^ b == 6
assert a << 2 == 48
assert a >> 1 == 6
assert ~a == -13
x: int = nondet_int()
__ESBMC_assume(x >= 0 and x < 50)
assert x << 1 == x * 2
assert (x & 1) == x % 2
