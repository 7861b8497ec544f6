// Copyright 2026 The Privsel Authors
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

// Minimal deterministic fork-join helper.

#ifndef PRIVSEL_PARALLEL_H_
#define PRIVSEL_PARALLEL_H_

#include <cstdint>
#include <functional>

namespace privsel {

// Name of the environment variable that overrides the worker count.
inline constexpr char kThreadsEnvVar[] = "PRIVSEL_THREADS";

// Worker count: PRIVSEL_THREADS when set to a positive integer, otherwise the
// number of logical cores.
int DefaultThreadCount();

// Splits [0, n) into contiguous chunks and calls body(begin, end) for each,
// on up to `threads` workers (0 means DefaultThreadCount()). The chunk
// boundaries depend only on n and the thread count, never on timing.
void ParallelFor(int64_t n, const std::function<void(int64_t, int64_t)>& body,
                 int threads = 0);

}  // namespace privsel

#endif  // PRIVSEL_PARALLEL_H_
