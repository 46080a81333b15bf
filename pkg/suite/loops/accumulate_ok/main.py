total: int = 0
for i in range(1, 11):
    total = total + i
assert total == 55
countdown: int = 5
while countdown > 0:
    countdown = countdown - 1
assert countdown == 0
