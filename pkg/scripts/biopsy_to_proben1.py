"""Convert the Wisconsin breast-cancer table (R ``MASS::biopsy`` CSV) to PROBEN1 ``.dt``.

Encoding follows the PROBEN1 ``cancer`` problem: the nine cytology scores
(1..10) are divided by 10, the 16 missing ``V6`` values are replaced by the
column mean, and the class is one-hot coded as ``benign -> 1 0``,
``malignant -> 0 1``.  Row order is kept as in the source table.

Usage::

    python3 scripts/biopsy_to_proben1.py biopsy.csv src/qcvselect/datasets/cancer.dt
"""

import csv
import sys


def convert(src, dst):
    with open(src, newline="") as fh:
        rows = list(csv.DictReader(fh))
    cols = [f"V{i}" for i in range(1, 10)]
    present = {c: [float(r[c]) for r in rows if r[c] != "NA"] for c in cols}
    means = {c: sum(v) / len(v) for c, v in present.items()}

    n = len(rows)
    n_train = (n + 1) // 2
    n_val = (n - n_train + 1) // 2
    with open(dst, "w") as out:
        out.write("bool_in=0\nreal_in=9\nbool_out=2\nreal_out=0\n")
        out.write(f"training_examples={n_train}\n")
        out.write(f"validation_examples={n_val}\n")
        out.write(f"test_examples={n - n_train - n_val}\n")
        for r in rows:
            xs = [means[c] if r[c] == "NA" else float(r[c]) for c in cols]
            ys = "1 0" if r["class"] == "benign" else "0 1"
            out.write(" ".join(f"{x / 10:.6g}" for x in xs) + " " + ys + "\n")


if __name__ == "__main__":
    convert(sys.argv[1], sys.argv[2])
