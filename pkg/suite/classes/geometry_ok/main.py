class Shape:
    sides: int = 0
    def describe(self) -> int:
        return self.sides

class Square(Shape):
    def __init__(self, size: int):
        self.size: int = size
        self.sides = 4
    def area(self) -> int:
        return self.size * self.size

class GrowingSquare(Square):
    def grow(self) -> int:
        self.size = self.size + 1
        return self.area()

s: Square = Square(5)
assert s.area() == 25
assert s.describe() == 4
g: GrowingSquare = GrowingSquare(3)
grown: int = g.grow()
assert grown == 16
assert g.size == 4
