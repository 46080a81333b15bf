p: bool = nondet_bool()
q: bool = nondet_bool()
assert p or not p
both: bool = p and q
either: bool = p or q
assert not both or either
exclusive: bool = (p or q) and not (p and q)
assert not exclusive or (p != q)
