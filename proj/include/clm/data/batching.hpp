// Copyright 2026 The ConceptLM Authors.
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

#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace clm {

// Groups of item indices.
using BatchPlan = std::vector<std::vector<std::size_t>>;

// First-fit in arrival order: each item goes into the earliest batch that
// still has room for its `sizes[i]` sentences. Throws InvalidConfig for a
// zero budget or an item larger than the budget.
BatchPlan batch_by_budget(std::span<const std::size_t> sizes, std::size_t budget);

// Consecutive groups of `per_batch` items; the last may be smaller.
BatchPlan batch_by_count(std::size_t items, std::size_t per_batch);

}  // namespace clm
