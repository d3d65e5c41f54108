// Copyright 2026 The disagg Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DISAGG_PARALLEL_HPP_
#define DISAGG_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace disagg {

// Worker count: DISAGG_THREADS when set and positive, else the hardware
// concurrency (at least 1).
std::size_t worker_count();

// Runs body(begin, end) over contiguous chunks of [0, n). Chunks are disjoint
// so bodies writing to per-index slots need no locking. The first exception
// (by chunk order) is rethrown after all workers join. Small ranges run
// inline on the calling thread.
void parallel_for(std::size_t n,
                  const std::function<void(std::size_t, std::size_t)>& body,
                  std::size_t min_chunk = 256);

}  // namespace disagg

#endif  // DISAGG_PARALLEL_HPP_
