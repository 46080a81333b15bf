seed = nondet_int()
__ESBMC_assume(seed >= 2 and seed <= 9)
grown = seed * seed
assert grown != 49
