"""Regenerate src/pairmct/data/migraine_like.csv.

Synthetic integer symptom scores (0-20) at two visits: 82 complete pairs,
44 subjects seen only at the first visit and 6 only at the second. The
scores are made up; only the layout mimics a real trial.
"""

import csv
import pathlib

import numpy as np

OUT = pathlib.Path(__file__).resolve().parents[1] / "src" / "pairmct" / "data" / "migraine_like.csv"


def main(seed=20240601):
    rng = np.random.default_rng(seed)
    subject = rng.normal(10.0, 3.0, 132)
    visit = subject[:, None] + rng.normal(0.0, 2.5, (132, 2))
    scores = np.clip(np.rint(visit), 0, 20).astype(int)
    rows = [(str(a), str(b)) for a, b in scores[:82]]
    rows += [(str(a), "NA") for a in scores[82:126, 0]]
    rows += [("", str(b)) for b in scores[126:, 1]]
    order = rng.permutation(len(rows))
    with open(OUT, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["x1", "x2"])
        w.writerows(rows[i] for i in order)


if __name__ == "__main__":
    main()
