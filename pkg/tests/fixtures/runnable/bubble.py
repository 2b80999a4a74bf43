def bubble_sort(values):
    data = list(values)
    n = len(data)
    for i in range(n):
        swapped = False
        for j in range(n - 1 - i):
            if data[j] > data[j + 1]:
                data[j], data[j + 1] = data[j + 1], data[j]
                swapped = True
        if not swapped:
            break
    return data


print(bubble_sort([5, 2, 9, 1, 5, 6]))
print(bubble_sort([]))
