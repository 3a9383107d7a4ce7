#!/usr/bin/env python3
# Copyright 2026 The cessmpc Authors.
# SPDX-License-Identifier: Apache-2.0
"""Writes the two dataset fixtures under data/ from scikit-learn's bundled copies.

Iris: setosa and versicolor rows only, in the original file order.
Breast Cancer (Wisconsin Diagnostic): all 569 rows; label 1 = malignant.
"""
import csv
import pathlib
import sys

from sklearn import datasets


def write(path, names, rows, labels):
    with open(path, "w", newline="") as f:
        w = csv.writer(f, lineterminator="\n")
        w.writerow(list(names) + ["label"])
        for row, label in zip(rows, labels):
            w.writerow([repr(float(v)) for v in row] + [int(label)])


def main(out):
    out = pathlib.Path(out)
    out.mkdir(parents=True, exist_ok=True)
    iris = datasets.load_iris()
    keep = [i for i, t in enumerate(iris.target) if t in (0, 1)]
    write(out / "iris_binary.csv", [n.replace(" (cm)", "").replace(" ", "_") for n in iris.feature_names],
          [iris.data[i] for i in keep], [iris.target[i] for i in keep])
    bc = datasets.load_breast_cancer()
    # sklearn encodes malignant as 0; flip so the positive class is malignant
    write(out / "breast_cancer.csv", [n.replace(" ", "_") for n in bc.feature_names], bc.data,
          [1 - t for t in bc.target])


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data")
