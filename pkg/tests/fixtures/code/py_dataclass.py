from dataclasses import dataclass, field


@dataclass(order=True)
class Task:
    priority: int
    name: str = field(compare=False)
    tags: list = field(default_factory=list, compare=False)


tasks = sorted([Task(3, "write"), Task(1, "plan"), Task(2, "review", ["pr"])])
for t in tasks:
    print(t.priority, t.name, t.tags)
