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
#include <functional>
#include <vector>

#include "clm/nn/tensor.hpp"

namespace clm::nn {

struct GradCheckResult {
  double max_relative_error = 0.0;
  std::size_t elements_checked = 0;
};

// Compares analytic gradients of loss_fn() with central finite differences
// for every element of every input. Relative error per element is
// |analytic - numeric| / max(|analytic|, |numeric|, abs_floor); the floor
// keeps near-zero gradients from turning rounding noise into huge ratios.
// Runs single-threaded and mutates the inputs only transiently.
GradCheckResult check_gradients(const std::function<Tensor<double>()>& loss_fn,
                                std::vector<Tensor<double>> inputs, double step = 1e-5,
                                double abs_floor = 1e-6);

}  // namespace clm::nn
