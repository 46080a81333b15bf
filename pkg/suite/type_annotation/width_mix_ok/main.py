small: int = 1000
wide: uint64 = uint64(small) * 1000000
assert wide == 1000000000
back: int = int(wide // 1000000)
assert back == small
