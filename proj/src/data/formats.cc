//
// Copyright 2026 The fllab Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
//

#include "fllab/data/formats.h"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <fmt/format.h>
#include <zlib.h>

#include "fllab/util/error.h"

#ifndef FLLAB_DEFAULT_DATA_DIR
#define FLLAB_DEFAULT_DATA_DIR "data"
#endif

namespace fllab {
namespace {

uint32_t ReadBe32(std::span<const uint8_t> b, size_t at) {
  return (uint32_t{b[at]} << 24) | (uint32_t{b[at + 1]} << 16) | (uint32_t{b[at + 2]} << 8) |
         uint32_t{b[at + 3]};
}

void WriteBe32(std::vector<uint8_t>& out, uint32_t v) {
  for (int shift = 24; shift >= 0; shift -= 8) out.push_back(static_cast<uint8_t>(v >> shift));
}

uint8_t ToByte(double v) {
  const double scaled = std::round(v * 255.0);
  if (!(scaled >= 0.0 && scaled <= 255.0)) {
    throw InvalidArgument(fmt::format("pixel value {} outside [0, 1]", v));
  }
  return static_cast<uint8_t>(scaled);
}

}  // namespace

Tensor IdxArray::ToImages() const {
  if (!is_images()) throw InvalidArgument("IDX array does not hold images");
  Tensor t(dims);
  for (size_t i = 0; i < payload.size(); ++i) t[static_cast<int64_t>(i)] = payload[i] / 255.0;
  return t;
}

std::vector<int> IdxArray::ToLabels() const {
  if (magic != kIdxLabelsMagic) throw InvalidArgument("IDX array does not hold labels");
  return std::vector<int>(payload.begin(), payload.end());
}

IdxArray ParseIdx(std::span<const uint8_t> bytes) {
  if (bytes.size() < 4) throw InvalidArgument("truncated IDX header");
  IdxArray out;
  out.magic = ReadBe32(bytes, 0);
  int rank = 0;
  if (out.magic == kIdxImagesMagic) {
    rank = 3;
  } else if (out.magic == kIdxLabelsMagic) {
    rank = 1;
  } else {
    throw InvalidArgument(fmt::format("unknown IDX magic 0x{:08x}", out.magic));
  }
  const size_t header = 4 + 4 * static_cast<size_t>(rank);
  if (bytes.size() < header) throw InvalidArgument("truncated IDX header");
  for (int i = 0; i < rank; ++i) out.dims.push_back(ReadBe32(bytes, 4 + 4 * static_cast<size_t>(i)));
  const auto count = static_cast<size_t>(NumElements(out.dims));
  if (bytes.size() - header != count) {
    throw InvalidArgument(fmt::format("IDX payload has {} bytes, header promises {}",
                                      bytes.size() - header, count));
  }
  out.payload.assign(bytes.begin() + static_cast<int64_t>(header), bytes.end());
  return out;
}

std::vector<uint8_t> SerializeIdx(const IdxArray& array) {
  if (array.magic != kIdxImagesMagic && array.magic != kIdxLabelsMagic) {
    throw InvalidArgument(fmt::format("unknown IDX magic 0x{:08x}", array.magic));
  }
  if (static_cast<size_t>(NumElements(array.dims)) != array.payload.size()) {
    throw InvalidArgument("IDX dims do not match payload size");
  }
  std::vector<uint8_t> out;
  WriteBe32(out, array.magic);
  for (int64_t d : array.dims) WriteBe32(out, static_cast<uint32_t>(d));
  out.insert(out.end(), array.payload.begin(), array.payload.end());
  return out;
}

Dataset ParseCifar10(std::span<const uint8_t> bytes) {
  if (bytes.size() % kCifarRecordBytes != 0) {
    throw InvalidArgument(fmt::format("CIFAR-10 data of {} bytes is not a whole number of {}-byte records",
                                      bytes.size(), kCifarRecordBytes));
  }
  const auto n = static_cast<int64_t>(bytes.size()) / kCifarRecordBytes;
  Dataset out{Tensor({n, 3, 32, 32}), std::vector<int>(static_cast<size_t>(n)), 10,
              kCifar10EntropyBits};
  for (int64_t i = 0; i < n; ++i) {
    const uint8_t* rec = bytes.data() + i * kCifarRecordBytes;
    if (rec[0] > 9) throw InvalidArgument(fmt::format("CIFAR-10 record {} has label {}", i, rec[0]));
    out.labels[static_cast<size_t>(i)] = rec[0];
    for (int64_t j = 0; j < kCifarRecordBytes - 1; ++j) {
      out.images[i * (kCifarRecordBytes - 1) + j] = rec[1 + j] / 255.0;
    }
  }
  return out;
}

std::vector<uint8_t> SerializeCifar10(const Dataset& data) {
  if (data.sample_size() != kCifarRecordBytes - 1) {
    throw InvalidArgument("CIFAR-10 serialization needs 3x32x32 samples");
  }
  std::vector<uint8_t> out;
  out.reserve(static_cast<size_t>(data.size() * kCifarRecordBytes));
  for (int64_t i = 0; i < data.size(); ++i) {
    const int y = data.labels[static_cast<size_t>(i)];
    if (y < 0 || y > 9) throw InvalidArgument(fmt::format("label {} is not a CIFAR-10 class", y));
    out.push_back(static_cast<uint8_t>(y));
    for (double v : data.sample(i)) out.push_back(ToByte(v));
  }
  return out;
}

std::vector<uint8_t> ReadFileBytes(const std::string& path) {
  if (path.size() > 3 && path.ends_with(".gz")) {
    gzFile f = gzopen(path.c_str(), "rb");
    if (f == nullptr) throw Error(fmt::format("cannot open {}", path));
    std::vector<uint8_t> out;
    uint8_t buf[1 << 16];
    int got = 0;
    while ((got = gzread(f, buf, sizeof(buf))) > 0) out.insert(out.end(), buf, buf + got);
    const bool failed = got < 0;
    gzclose(f);
    if (failed) throw Error(fmt::format("corrupt gzip stream in {}", path));
    return out;
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(fmt::format("cannot open {}", path));
  return std::vector<uint8_t>(std::istreambuf_iterator<char>(in), {});
}

Dataset LoadMnist(const std::string& images_path, const std::string& labels_path) {
  IdxArray images = ParseIdx(ReadFileBytes(images_path));
  IdxArray labels = ParseIdx(ReadFileBytes(labels_path));
  if (!images.is_images() || labels.magic != kIdxLabelsMagic) {
    throw InvalidArgument("expected an IDX image file and an IDX label file");
  }
  Tensor t = images.ToImages();
  Dataset out{t.Reshaped({t.dim(0), 1, t.dim(1), t.dim(2)}), labels.ToLabels(), 10,
              kMnistEntropyBits};
  out.Validate();
  return out;
}

Dataset LoadBundledMnist(const std::string& dir) {
  const std::string root = dir.empty() ? std::string(FLLAB_DEFAULT_DATA_DIR) : dir;
  // Full MNIST under its usual names takes precedence over the subset.
  for (const char* ext : {".gz", ""}) {
    const std::string images = root + "/train-images-idx3-ubyte" + ext;
    const std::string labels = root + "/train-labels-idx1-ubyte" + ext;
    if (std::filesystem::exists(images) && std::filesystem::exists(labels)) return LoadMnist(images, labels);
  }
  return LoadMnist(root + "/mnist5k-images-idx3-ubyte.gz", root + "/mnist5k-labels-idx1-ubyte.gz");
}

}  // namespace fllab
