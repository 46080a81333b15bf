def triple(x: int) -> int:
    return x * 3
