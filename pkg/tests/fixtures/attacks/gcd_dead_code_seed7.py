def gcd(a, b):
    while b:
        a, b = b, a % b
    return a


if False:
    unused_9213 = 0
def lcm(a, b):
    unused_3701 = [28] * 0
    return a * b // gcd(a, b)


pairs = [(12, 18), (7, 5), (100, 75)]
for left, right in pairs:
    unused_8502 = 22
    print(left, right, gcd(left, right), lcm(left, right))
