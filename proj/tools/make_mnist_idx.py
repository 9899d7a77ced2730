#!/usr/bin/env python3
"""Write a shuffled MNIST subset as IDX files (train/test split).

Source: the 5,000-image MNIST sample shipped inside the mlxtend wheel
(mlxtend/data/data/mnist_5k.csv.gz, one row per image: 784 pixels then label).

    pip download --no-deps -d /tmp/wheels mlxtend
    python3 tools/make_mnist_idx.py /tmp/wheels/mlxtend-*.whl data/mnist5k
"""
import argparse
import gzip
import pathlib
import random
import struct
import zipfile


def write_images(path, rows):
    with open(path, "wb") as f:
        f.write(struct.pack(">IIII", 0x00000803, len(rows), 28, 28))
        for pixels, _ in rows:
            f.write(bytes(pixels))


def write_labels(path, rows):
    with open(path, "wb") as f:
        f.write(struct.pack(">II", 0x00000801, len(rows)))
        f.write(bytes(label for _, label in rows))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("wheel")
    ap.add_argument("outdir")
    ap.add_argument("--n-test", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=20240601)
    args = ap.parse_args()

    with zipfile.ZipFile(args.wheel) as z:
        text = gzip.decompress(z.read("mlxtend/data/data/mnist_5k.csv.gz")).decode()

    rows = []
    for line in text.splitlines():
        vals = [int(float(v)) for v in line.split(",")]
        rows.append((vals[:784], vals[784]))

    # the csv is sorted by class
    random.Random(args.seed).shuffle(rows)
    test, train = rows[: args.n_test], rows[args.n_test :]

    out = pathlib.Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out / "train-images-idx3-ubyte", train)
    write_labels(out / "train-labels-idx1-ubyte", train)
    write_images(out / "test-images-idx3-ubyte", test)
    write_labels(out / "test-labels-idx1-ubyte", test)
    print(f"wrote {len(train)} train / {len(test)} test images to {out}")


if __name__ == "__main__":
    main()
