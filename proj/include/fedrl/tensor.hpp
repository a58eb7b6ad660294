#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "fedrl/common.hpp"
#include "fedrl/rng.hpp"

namespace fedrl {

// Dense row-major matrix of doubles. Vectors are represented as n x 1 or
// 1 x n depending on context. All training math runs in double; the wire
// format narrows to 32-bit floats (see coord/wire).
struct Tensor {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Tensor() = default;
  Tensor(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c, 0.0) {}

  static Tensor zeros(int r, int c) { return Tensor(r, c); }
  static Tensor full(int r, int c, double v) {
    Tensor t(r, c);
    std::fill(t.data.begin(), t.data.end(), v);
    return t;
  }
  static Tensor from_rows(std::initializer_list<std::initializer_list<double>> rows);
  static Tensor uniform(int r, int c, double lo, double hi, RngStream& rng);

  double& at(int r, int c) { return data[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return data[static_cast<std::size_t>(r) * cols + c]; }
  double* row_ptr(int r) { return data.data() + static_cast<std::size_t>(r) * cols; }
  const double* row_ptr(int r) const { return data.data() + static_cast<std::size_t>(r) * cols; }

  int numel() const { return rows * cols; }
  bool same_shape(const Tensor& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
  void fill(double v) { std::fill(data.begin(), data.end(), v); }

  // Scalar accessor for 1x1 tensors.
  double item() const {
    if (numel() != 1) throw DimensionError("item() on tensor with numel != 1");
    return data[0];
  }
};

// C = A * B
Tensor matmul(const Tensor& a, const Tensor& b);
// C = A^T * B
Tensor matmul_tn(const Tensor& a, const Tensor& b);
// C = A * B^T
Tensor matmul_nt(const Tensor& a, const Tensor& b);

// Round every element to the nearest 32-bit float. State that crosses an
// epoch boundary is quantized like this so checkpoints (which store f32)
// restore training bit-exactly.
void quantize_to_f32(Tensor& t);
void quantize_to_f32(std::vector<double>& v);

}  // namespace fedrl
