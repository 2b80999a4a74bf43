grades = {"ann": [90, 85], "bob": [70, 65, 80], "cy": []}


def average(scores):
    if not scores:
        return None
    return sum(scores) / len(scores)


report = {name: average(scores) for name, scores in grades.items()}
for name in sorted(report):
    value = report[name]
    print(name, "n/a" if value is None else round(value, 1))
