def squares(limit):
    n = 0
    while n * n < limit:
        yield n * n
        n += 1


total = 0
for sq in squares(100):
    total += sq
    print(sq, end=" ")
print()
print("total", total)
