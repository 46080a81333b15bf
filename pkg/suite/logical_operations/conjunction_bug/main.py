p: bool = nondet_bool()
q: bool = nondet_bool()
r: bool = nondet_bool()
assert not (p and q and r)
