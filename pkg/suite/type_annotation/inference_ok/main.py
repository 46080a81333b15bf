def scale(value: int) -> int:
    return value * 10

raw = 7
scaled = scale(raw)
truth = scaled > raw
ratio = 2.5
assert truth
assert scaled == 70
assert ratio * 2.0 == 5.0
