#!/usr/bin/env python3
#
# Copyright 2026 The fllab Authors
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
#

"""Writes the bundled 5000-image MNIST subset as gzipped IDX files.

The source is the 5k MNIST sample shipped with mlxtend (BSD-3), which is
itself drawn from the original MNIST training set. Output files follow the
standard IDX layout so the full MNIST files can be dropped in unchanged.

    pip download --no-deps mlxtend && python3 scripts/make_mnist_subset.py <wheel> data/
"""

import gzip
import io
import struct
import sys
import zipfile

import numpy as np


def main(wheel_path: str, out_dir: str) -> None:
    with zipfile.ZipFile(wheel_path) as zf:
        raw = zf.read("mlxtend/data/data/mnist_5k.csv.gz")
    table = np.loadtxt(io.BytesIO(gzip.decompress(raw)), delimiter=",", dtype=np.int64)
    pixels = table[:, :-1].astype(np.uint8)
    labels = table[:, -1].astype(np.uint8)
    n = pixels.shape[0]

    images = struct.pack(">IIII", 0x00000803, n, 28, 28) + pixels.tobytes()
    label_bytes = struct.pack(">II", 0x00000801, n) + labels.tobytes()
    # mtime=0 keeps the archives byte-reproducible.
    for name, payload in (("mnist5k-images-idx3-ubyte.gz", images),
                          ("mnist5k-labels-idx1-ubyte.gz", label_bytes)):
        with open(f"{out_dir}/{name}", "wb") as fh:
            with gzip.GzipFile(fileobj=fh, mode="wb", mtime=0) as gz:
                gz.write(payload)
    print(f"wrote {n} images to {out_dir}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
