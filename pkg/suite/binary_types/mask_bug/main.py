x: int = nondet_int()
__ESBMC_assume(x >= 0 and x < 64)
masked: int = x & 0b111000
assert masked != 0b101000
