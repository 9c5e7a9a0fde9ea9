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

#include "clm/data/batching.hpp"

#include "clm/common/error.hpp"

namespace clm {

BatchPlan batch_by_budget(std::span<const std::size_t> sizes, std::size_t budget) {
  if (budget == 0) fail(ErrorCode::kInvalidConfig, "batch budget must be >= 1");
  BatchPlan plan;
  std::vector<std::size_t> used;
  for (std::size_t i = 0; i < sizes.size(); ++i) {
    if (sizes[i] > budget) {
      fail(ErrorCode::kInvalidConfig, "item " + std::to_string(i) + " holds " + std::to_string(sizes[i]) +
                                          " sentences, more than the batch budget " + std::to_string(budget));
    }
    std::size_t b = 0;
    while (b < plan.size() && used[b] + sizes[i] > budget) ++b;
    if (b == plan.size()) {
      plan.emplace_back();
      used.push_back(0);
    }
    plan[b].push_back(i);
    used[b] += sizes[i];
  }
  return plan;
}

BatchPlan batch_by_count(std::size_t items, std::size_t per_batch) {
  if (per_batch == 0) fail(ErrorCode::kInvalidConfig, "instances per batch must be >= 1");
  BatchPlan plan;
  for (std::size_t start = 0; start < items; start += per_batch) {
    auto& b = plan.emplace_back();
    for (std::size_t i = start; i < items && i < start + per_batch; ++i) b.push_back(i);
  }
  return plan;
}

}  // namespace clm
