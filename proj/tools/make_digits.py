"""Write the 8x8 digits set (scikit-learn) as an FFDS file.

Pixels are rescaled from 0..16 to 0..255. Records are shuffled with a fixed
seed so that the first 80% forms a class-balanced training split.
"""

import argparse
import struct

import numpy as np
from sklearn.datasets import load_digits


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("out", nargs="?", default="data/digits8x8.ffds")
    ap.add_argument("--seed", type=int, default=7)
    args = ap.parse_args()

    digits = load_digits()
    images = np.rint(digits.images * 255.0 / 16.0).astype(np.uint8)
    labels = digits.target.astype(np.uint8)
    order = np.random.default_rng(args.seed).permutation(len(labels))

    with open(args.out, "wb") as f:
        f.write(b"FFDS")
        f.write(struct.pack("<III", len(labels), 8, 8))
        for i in order:
            f.write(images[i].tobytes(order="C"))
            f.write(bytes([labels[i]]))


if __name__ == "__main__":
    main()
