def clamp(value: int, low: int, high: int) -> int:
    if value < low:
        return low
    if value > high:
        return high
    return value

def double_clamped(value: int) -> int:
    return clamp(value, 0, 10) * 2

x: int = nondet_int()
__ESBMC_assume(x >= -100 and x <= 100)
y: int = double_clamped(x)
assert y >= 0
assert y <= 20
