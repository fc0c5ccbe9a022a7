/*
 * Copyright 2026 The rramfda Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef RRAMFDA_PARALLEL_HPP_
#define RRAMFDA_PARALLEL_HPP_

#include <cstddef>
#include <functional>

namespace rramfda {

/// Environment variable that overrides the worker count.
inline constexpr const char* kThreadsEnv = "RRAMFDA_THREADS";

/// Worker count: RRAMFDA_THREADS if set to a positive integer, otherwise
/// the hardware concurrency.
int worker_count();

/// Runs body(i) for i in [0, n) over contiguous blocks on worker threads.
/// Each index is visited exactly once, so results written to per-index
/// slots do not depend on scheduling. If any call throws, the exception of
/// the lowest failing index is rethrown after all workers finish.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

}  // namespace rramfda

#endif  // RRAMFDA_PARALLEL_HPP_
