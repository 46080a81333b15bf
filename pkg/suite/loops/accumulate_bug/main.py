limit: int = nondet_int()
__ESBMC_assume(limit >= 1 and limit <= 5)
total: int = 0
for i in range(0, limit):
    total = total + i + 1
assert total != 15
