// Copyright 2026 The caplab Authors
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
#include <stdexcept>
#include <string>
#include <vector>

namespace caplab {

using Vector = std::vector<double>;

/// Small dense row-major matrix. Everything the toy model needs fits in a
/// handful of loops, so parameters stay in flat storage that the optimizer
/// and checkpoint writer can walk directly.
struct Matrix {
  size_t rows = 0;
  size_t cols = 0;
  Vector data;

  Matrix() = default;
  Matrix(size_t r, size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& at(size_t r, size_t c) { return data[r * cols + c]; }
  double at(size_t r, size_t c) const { return data[r * cols + c]; }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

inline Vector matvec(const Matrix& m, const Vector& x) {
  if (x.size() != m.cols) {
    throw std::invalid_argument("matvec shape mismatch: " + std::to_string(m.rows) +
                                "x" + std::to_string(m.cols) + " * " +
                                std::to_string(x.size()));
  }
  Vector y(m.rows, 0.0);
  for (size_t r = 0; r < m.rows; ++r) {
    double acc = 0.0;
    for (size_t c = 0; c < m.cols; ++c) acc += m.at(r, c) * x[c];
    y[r] = acc;
  }
  return y;
}

}  // namespace caplab
