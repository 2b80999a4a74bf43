import csv
import statistics
import sys


def summarize(path):
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    prices = [float(r["price"]) for r in rows]
    return {
        "count": len(prices),
        "mean": statistics.mean(prices),
        "median": statistics.median(prices),
    }


if __name__ == "__main__":
    for key, value in summarize(sys.argv[1]).items():
        print(f"{key:>8}: {value}")
