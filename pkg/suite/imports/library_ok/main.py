import shapes
from shapes import perimeter

side: int = nondet_int()
__ESBMC_assume(side > 0 and side < 30)
p: int = perimeter(side)
assert p == side * 4
assert shapes.area(side) >= side
assert shapes.SIDES == 4
