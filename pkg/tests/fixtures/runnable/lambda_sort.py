people = [("zoe", 31), ("adam", 25), ("mia", 31), ("li", 19)]
by_age = sorted(people, key=lambda p: (p[1], p[0]))
print(by_age)
adults = list(filter(lambda p: p[1] >= 21, people))
print(len(adults), [name for name, _ in adults])
ages = map(lambda p: p[1] * 2, people)
print(sum(ages))
