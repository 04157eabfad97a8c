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

#ifndef FLLAB_DATA_FORMATS_H_
#define FLLAB_DATA_FORMATS_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fllab/data/dataset.h"
#include "fllab/nn/tensor.h"

namespace fllab {

inline constexpr uint32_t kIdxImagesMagic = 0x00000803;
inline constexpr uint32_t kIdxLabelsMagic = 0x00000801;
inline constexpr int64_t kCifarRecordBytes = 3073;

// An unsigned-byte IDX array: 0x803 with 3 dims (images) or 0x801 with 1 dim
// (labels).
struct IdxArray {
  uint32_t magic = 0;
  Shape dims;
  std::vector<uint8_t> payload;

  bool is_images() const { return magic == kIdxImagesMagic; }
  Tensor ToImages() const;  // bytes / 255
  std::vector<int> ToLabels() const;
};

IdxArray ParseIdx(std::span<const uint8_t> bytes);
std::vector<uint8_t> SerializeIdx(const IdxArray& array);

// CIFAR-10 binary batch: records of 1 label byte + 3072 channel-major pixels.
Dataset ParseCifar10(std::span<const uint8_t> bytes);
std::vector<uint8_t> SerializeCifar10(const Dataset& data);

// Reads a whole file; transparently gunzips paths ending in ".gz".
std::vector<uint8_t> ReadFileBytes(const std::string& path);

// Images [n, 1, 28, 28] and labels from a pair of IDX files.
Dataset LoadMnist(const std::string& images_path, const std::string& labels_path);

// The bundled 5000-image MNIST sample, or the files under `dir` when given.
Dataset LoadBundledMnist(const std::string& dir = "");

}  // namespace fllab

#endif  // FLLAB_DATA_FORMATS_H_
