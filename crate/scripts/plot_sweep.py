"""Plot success rate against p from a sweep CSV.

Usage: python3 scripts/plot_sweep.py fig1.csv [fig1.png]
"""

import csv
import sys
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt


def main() -> None:
    if len(sys.argv) not in (2, 3):
        sys.exit(__doc__)
    src = sys.argv[1]
    dst = sys.argv[2] if len(sys.argv) == 3 else src.rsplit(".", 1)[0] + ".png"
    curves = defaultdict(list)
    with open(src, newline="") as f:
        for row in csv.DictReader(f):
            rate = int(row["successes"]) / int(row["trials"])
            curves[row["method"]].append((float(row["p"]), rate))
    fig, ax = plt.subplots(figsize=(5, 3.5))
    for method, points in sorted(curves.items()):
        points.sort()
        ax.plot([p for p, _ in points], [r for _, r in points], marker="o", label=method)
    ax.set_xlabel("p")
    ax.set_ylabel("empirical success rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend()
    fig.tight_layout()
    fig.savefig(dst, dpi=150)


if __name__ == "__main__":
    main()
