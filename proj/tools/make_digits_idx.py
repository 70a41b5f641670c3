#!/usr/bin/env python3
# Copyright 2026 The prunelab Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
"""Builds the desk-scale digits IDX files from the 5000-image MNIST sample
shipped inside the mlxtend wheel (500 images per class, 28x28, uint8).

    pip download --no-deps mlxtend -d /tmp/wheels
    python3 tools/make_digits_idx.py /tmp/wheels/mlxtend-*.whl data/digits5k

Writes a stratified split (400 train / 100 test per class), shuffled with a
fixed seed so the output is byte-reproducible.
"""

import argparse
import gzip
import pathlib
import random
import struct
import zipfile

MEMBER = "mlxtend/data/data/mnist_5k.csv.gz"


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
    parser = argparse.ArgumentParser()
    parser.add_argument("wheel")
    parser.add_argument("out_dir")
    parser.add_argument("--test-per-class", type=int, default=100)
    parser.add_argument("--seed", type=int, default=20260101)
    args = parser.parse_args()

    text = gzip.decompress(zipfile.ZipFile(args.wheel).read(MEMBER)).decode()
    by_class = {}
    for line in text.splitlines():
        fields = line.split(",")
        pixels = [int(float(v)) for v in fields[:-1]]
        assert len(pixels) == 784
        by_class.setdefault(int(fields[-1]), []).append(pixels)

    rng = random.Random(args.seed)
    train, test = [], []
    for label in sorted(by_class):
        images = by_class[label]
        rng.shuffle(images)
        test += [(p, label) for p in images[: args.test_per_class]]
        train += [(p, label) for p in images[args.test_per_class :]]
    rng.shuffle(train)
    rng.shuffle(test)

    out = pathlib.Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_images(out / "train-images-idx3-ubyte", train)
    write_labels(out / "train-labels-idx1-ubyte", train)
    write_images(out / "test-images-idx3-ubyte", test)
    write_labels(out / "test-labels-idx1-ubyte", test)
    print(f"wrote {len(train)} train / {len(test)} test images to {out}")


if __name__ == "__main__":
    main()
