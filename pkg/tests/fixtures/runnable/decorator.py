import functools

calls = []


def traced(func):
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        calls.append(func.__name__)
        return func(*args, **kwargs)

    return wrapper


@traced
def add(x, y):
    return x + y


@traced
def mul(x, y=2):
    return x * y


print(add(2, 3), mul(4), mul(x=3, y=3))
print(calls)
