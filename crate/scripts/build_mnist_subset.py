"""Build the offline MNIST parity subset used by the test suite.

Input is the tarball of the `mnist` npm package (`npm pack mnist@1.1.0`),
which ships 10000 distinct digits as JSON arrays of pixel intensities in
[0, 1] rounded to three decimals; `round(v * 255)` recovers the original
bytes exactly. The digits are split 8000/2000 with a fixed permutation and
written as gzip-compressed IDX files under the canonical MNIST names.

    python3 scripts/build_mnist_subset.py mnist-1.1.0.tgz data/mnist-subset
"""

import argparse
import gzip
import json
import struct
import tarfile
from pathlib import Path

import numpy as np

SEED = 20_240_601
TRAIN = 8000


def load_digits(tgz: Path):
    images, labels = [], []
    with tarfile.open(tgz) as tar:
        for digit in range(10):
            member = tar.getmember(f"package/src/digits/{digit}.json")
            flat = np.asarray(json.load(tar.extractfile(member))["data"], dtype=np.float64)
            pixels = np.rint(flat * 255.0).astype(np.uint8).reshape(-1, 784)
            images.append(pixels)
            labels.append(np.full(len(pixels), digit, dtype=np.uint8))
    return np.concatenate(images), np.concatenate(labels)


def write_gz(path: Path, payload: bytes):
    with open(path, "wb") as raw, gzip.GzipFile(fileobj=raw, mode="wb", mtime=0, filename="") as gz:
        gz.write(payload)


def idx_images(images: np.ndarray) -> bytes:
    return struct.pack(">IIII", 0x803, len(images), 28, 28) + images.tobytes()


def idx_labels(labels: np.ndarray) -> bytes:
    return struct.pack(">II", 0x801, len(labels)) + labels.tobytes()


def main():
    parser = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("tarball", type=Path)
    parser.add_argument("out_dir", type=Path)
    args = parser.parse_args()

    images, labels = load_digits(args.tarball)
    assert len(np.unique(images, axis=0)) == len(images), "digits are expected to be distinct"
    order = np.random.default_rng(SEED).permutation(len(images))
    images, labels = images[order], labels[order]

    args.out_dir.mkdir(parents=True, exist_ok=True)
    splits = {"train": slice(0, TRAIN), "t10k": slice(TRAIN, None)}
    for name, part in splits.items():
        write_gz(args.out_dir / f"{name}-images-idx3-ubyte.gz", idx_images(images[part]))
        write_gz(args.out_dir / f"{name}-labels-idx1-ubyte.gz", idx_labels(labels[part]))
        print(f"{name}: {len(labels[part])} images, digit counts {np.bincount(labels[part], minlength=10).tolist()}")


if __name__ == "__main__":
    main()
