class Counter:
    def __init__(self, start: int):
        self.count: int = start
    def bump(self) -> int:
        self.count = self.count + 1
        return self.count

limit: int = nondet_int()
__ESBMC_assume(limit >= 0 and limit <= 6)
c: Counter = Counter(limit)
first: int = c.bump()
second: int = c.bump()
assert second != 5
