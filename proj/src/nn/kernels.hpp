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

// Dense kernels shared by the ops. Every output row is produced with the
// same sequence of floating-point operations regardless of how many rows
// are processed together, so results are bitwise independent of batch
// composition.

#include <cstddef>

namespace clm::nn::kernels {

// C[m,n] += A[m,k] * B[k,n]
template <typename T>
void gemm_acc(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  std::size_t i = 0;
  for (; i + 4 <= m; i += 4) {
    const T* a0 = a + (i + 0) * k;
    const T* a1 = a + (i + 1) * k;
    const T* a2 = a + (i + 2) * k;
    const T* a3 = a + (i + 3) * k;
    T* c0 = c + (i + 0) * n;
    T* c1 = c + (i + 1) * n;
    T* c2 = c + (i + 2) * n;
    T* c3 = c + (i + 3) * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      const T x0 = a0[p], x1 = a1[p], x2 = a2[p], x3 = a3[p];
      for (std::size_t j = 0; j < n; ++j) {
        const T bj = brow[j];
        c0[j] += x0 * bj;
        c1[j] += x1 * bj;
        c2[j] += x2 * bj;
        c3[j] += x3 * bj;
      }
    }
  }
  for (; i < m; ++i) {
    const T* arow = a + i * k;
    T* crow = c + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T* brow = b + p * n;
      const T x = arow[p];
      for (std::size_t j = 0; j < n; ++j) crow[j] += x * brow[j];
    }
  }
}

// C[k,n] += A[m,k]^T * B[m,n]
template <typename T>
void gemm_tn_acc(std::size_t m, std::size_t k, std::size_t n, const T* a, const T* b, T* c) {
  std::size_t i = 0;
  // Four input rows per sweep over C; the per-element summation order is
  // still i = 0, 1, 2, ...
  for (; i + 4 <= m; i += 4) {
    const T* b0 = b + (i + 0) * n;
    const T* b1 = b + (i + 1) * n;
    const T* b2 = b + (i + 2) * n;
    const T* b3 = b + (i + 3) * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T x0 = a[(i + 0) * k + p], x1 = a[(i + 1) * k + p];
      const T x2 = a[(i + 2) * k + p], x3 = a[(i + 3) * k + p];
      T* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) {
        T acc = crow[j];
        acc += x0 * b0[j];
        acc += x1 * b1[j];
        acc += x2 * b2[j];
        acc += x3 * b3[j];
        crow[j] = acc;
      }
    }
  }
  for (; i < m; ++i) {
    const T* arow = a + i * k;
    const T* brow = b + i * n;
    for (std::size_t p = 0; p < k; ++p) {
      const T x = arow[p];
      T* crow = c + p * n;
      for (std::size_t j = 0; j < n; ++j) crow[j] += x * brow[j];
    }
  }
}

// out[n,m] = in[m,n]^T
template <typename T>
void transpose(std::size_t m, std::size_t n, const T* in, T* out) {
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = in[i * n + j];
  }
}

template <typename T>
T dot(std::size_t n, const T* x, const T* y) {
  T s = T(0);
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

}  // namespace clm::nn::kernels
