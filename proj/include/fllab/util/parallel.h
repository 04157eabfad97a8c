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

#ifndef FLLAB_UTIL_PARALLEL_H_
#define FLLAB_UTIL_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace fllab {

// Runs fn(0) .. fn(n - 1) on up to `jobs` threads. Each index must write only
// its own output slot; results are then independent of scheduling. The first
// exception thrown by any call is rethrown after all threads join.
void ParallelFor(int64_t n, int jobs, const std::function<void(int64_t)>& fn);

}  // namespace fllab

#endif  // FLLAB_UTIL_PARALLEL_H_
