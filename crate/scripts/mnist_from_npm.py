#!/usr/bin/env python3
"""Rebuild IDX files from the digits bundled in the `mnist` npm package.

The npm package (MIT, https://www.npmjs.com/package/mnist) ships 10000 MNIST
digits as per-class JSON arrays of pixel intensities rounded to 3 decimals.
Rounding error is below half a grey level, so `round(v * 255)` recovers the
original bytes. Samples are interleaved round-robin across classes so that
"first n in file order" picks a balanced prefix.

usage: mnist_from_npm.py <package-dir> <out-dir>
"""
import gzip
import json
import os
import struct
import sys


def main():
    pkg, out = sys.argv[1], sys.argv[2]
    per_digit = []
    for d in range(10):
        with open(os.path.join(pkg, "src", "digits", f"{d}.json")) as f:
            raw = json.load(f)["data"]
        assert len(raw) % 784 == 0
        per_digit.append([raw[i : i + 784] for i in range(0, len(raw), 784)])

    images, labels = [], []
    longest = max(len(p) for p in per_digit)
    for i in range(longest):
        for d in range(10):
            if i < len(per_digit[d]):
                images.append(per_digit[d][i])
                labels.append(d)

    os.makedirs(out, exist_ok=True)
    n = len(images)
    img = bytearray(struct.pack(">IIII", 0x00000803, n, 28, 28))
    for im in images:
        img.extend(max(0, min(255, round(v * 255))) for v in im)
    lab = bytearray(struct.pack(">II", 0x00000801, n)) + bytes(labels)
    with gzip.GzipFile(os.path.join(out, "images-idx3-ubyte.gz"), "wb", mtime=0) as f:
        f.write(img)
    with gzip.GzipFile(os.path.join(out, "labels-idx1-ubyte.gz"), "wb", mtime=0) as f:
        f.write(lab)
    print(f"wrote {n} samples to {out}")


if __name__ == "__main__":
    main()
