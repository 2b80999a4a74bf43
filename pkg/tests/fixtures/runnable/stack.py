class Stack:
    """A tiny LIFO container."""

    def __init__(self):
        self.items = []

    def push(self, item):
        self.items.append(item)

    def pop(self):
        return self.items.pop()

    def __len__(self):
        return len(self.items)


s = Stack()
for word in "alpha beta gamma".split():
    s.push(word)
while len(s):
    print(s.pop())
