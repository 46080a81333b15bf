f: float = nondet_float()
__ESBMC_assume(f > 0.0 and f < 1.0)
assert f < 1.5
assert not f > 2.0
neg: float = -f
assert neg < 0.0
quarter: float = 0.25
assert quarter * 4.0 == 1.0
mixed: float = 3 + 0.5
assert mixed == 3.5
sum_check: float = 1.5 + 1.25
assert sum_check == 2.75
