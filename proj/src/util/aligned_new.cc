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

// Global allocation functions that hand out 64-byte aligned blocks.
//
// Vectorized Eigen reductions over mapped buffers peel a prefix up to the
// first packet-aligned element, so the summation order depends on the buffer
// address. With every block on a 64-byte boundary the same inputs give the
// same bits no matter where they live.

#include <cstdlib>
#include <new>

namespace {

constexpr std::size_t kAlign = 64;

void* AlignedOrNull(std::size_t n) noexcept {
  if (n == 0) n = 1;
  const std::size_t rounded = (n + kAlign - 1) & ~(kAlign - 1);
  if (rounded < n) return nullptr;
  return std::aligned_alloc(kAlign, rounded);
}

void* AlignedOrThrow(std::size_t n) {
  for (;;) {
    if (void* p = AlignedOrNull(n)) return p;
    std::new_handler h = std::get_new_handler();
    if (h == nullptr) throw std::bad_alloc();
    h();
  }
}

}  // namespace

void* operator new(std::size_t n) { return AlignedOrThrow(n); }
void* operator new[](std::size_t n) { return AlignedOrThrow(n); }
void* operator new(std::size_t n, const std::nothrow_t&) noexcept { return AlignedOrNull(n); }
void* operator new[](std::size_t n, const std::nothrow_t&) noexcept { return AlignedOrNull(n); }

void operator delete(void* p) noexcept { std::free(p); }
void operator delete[](void* p) noexcept { std::free(p); }
void operator delete(void* p, std::size_t) noexcept { std::free(p); }
void operator delete[](void* p, std::size_t) noexcept { std::free(p); }
void operator delete(void* p, const std::nothrow_t&) noexcept { std::free(p); }
void operator delete[](void* p, const std::nothrow_t&) noexcept { std::free(p); }
