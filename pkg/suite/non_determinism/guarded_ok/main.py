choice: bool = nondet_bool()
amount: int = nondet_int()
__ESBMC_assume(amount >= 0 and amount <= 40)
balance: int = 50
if choice:
    balance = balance + amount
else:
    balance = balance - amount
assert balance >= 10
assert balance <= 90
