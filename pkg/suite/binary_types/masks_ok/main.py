flags: int = 0b101101
low_mask: int = 0b1111
assert flags & low_mask == 0b1101
assert flags | 0b010010 == 0b111111
high: int = 0x2D
assert flags == high
assert flags == 0o55
