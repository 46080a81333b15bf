def integer_squareroot(n: uint64) -> uint64:
    x: uint64 = n
    y: uint64 = (x + 1) // 2
    while y < x:
        x = y
        y = (x + n // x) // 2
    return x
