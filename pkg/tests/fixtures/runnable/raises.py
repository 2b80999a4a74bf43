def parse(value):
    return int(value)


results = []
for item in ["1", "2", "three"]:
    results.append(parse(item))
    print("parsed", results[-1])
print("unreachable")
