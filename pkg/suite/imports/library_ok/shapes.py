SIDES: int = 4

def perimeter(side: int) -> int:
    return side * SIDES

def area(side: int) -> int:
    return side * side
