a: int = nondet_int()
__ESBMC_assume(a >= -20 and a <= 20)
assert abs(a) >= 0
assert abs(a) <= 20
assert min(a, 3) <= 3
assert max(a, 3) >= 3
assert max(min(a, 10), -10) >= -10
values: list[int] = [4, 7, 1]
assert len(values) == 3
