x: int = nondet_int()
__ESBMC_assume(x >= -50 and x <= 50)
sign: int = 0
if x > 0:
    sign = 1
else:
    if x < 0:
        sign = -1
    else:
        sign = 0
assert sign * sign <= 1
assert x * sign >= 0
if x > 10 and x < 20:
    assert sign == 1
