class Left:
    def tag(self) -> int:
        return 1

class Right:
    def tag(self) -> int:
        return 2

class Both(Left, Right):
    def combined(self) -> int:
        return self.tag() * 10 + Right.tag(self)

b: Both = Both()
assert b.tag() == 1
assert b.combined() == 12
