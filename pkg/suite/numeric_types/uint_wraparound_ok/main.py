top: uint64 = 18446744073709551615
wrapped: uint64 = top + 1
assert wrapped == 0
n: int = nondet_int()
__ESBMC_assume(n >= 0 and n <= 100)
u: uint64 = uint64(n)
assert u + 18446744073709551615 + 1 == u
big: uint128 = 340282366920938463463374607431768211455
assert big + 1 == 0
wide: uint256 = uint256(1)
assert wide << 255 != 0
