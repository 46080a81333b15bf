x: int = nondet_int()
__ESBMC_assume(x >= 0 and x <= 100)
grade: int = 0
if x >= 90:
    grade = 4
else:
    if x >= 50:
        grade = 2
    else:
        grade = 0
assert grade != 2
