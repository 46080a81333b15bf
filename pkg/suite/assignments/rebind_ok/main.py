a: int = 1
b = a + 1
a = b * 3
c = a - b
assert a == 6
assert b == 2
assert c == 4
swap_tmp: int = a
a = b
b = swap_tmp
assert a == 2 and b == 6
