// Copyright 2026 The herdsynth Authors. All Rights Reserved.
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

// Index-parallel loop over a fixed pool of std::threads. Work items write to
// their own slots, so results do not depend on the job count.

#ifndef HERDSYNTH_PARALLEL_H_
#define HERDSYNTH_PARALLEL_H_

#include <cstddef>
#include <functional>

namespace herdsynth {

// requested > 0 is returned as is. Otherwise HERDSYNTH_JOBS if set and
// positive, else the hardware concurrency (at least 1).
int ResolveJobs(int requested);

// Calls fn(i) for i in [0, n). If any call throws, the exception from the
// lowest failing index is rethrown after all workers stop.
void ParallelFor(std::size_t n, int jobs, const std::function<void(std::size_t)>& fn);

}  // namespace herdsynth

#endif  // HERDSYNTH_PARALLEL_H_
