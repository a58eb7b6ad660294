#include "fedrl/tensor.hpp"

#include <Eigen/Core>
#include <cmath>

namespace fedrl {

namespace {

using EigenMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapMat = Eigen::Map<const EigenMat>;
using MapMatMut = Eigen::Map<EigenMat>;

MapMat map(const Tensor& t) { return MapMat(t.data.data(), t.rows, t.cols); }

}  // namespace

Tensor Tensor::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Tensor t(static_cast<int>(rows.size()), rows.size() ? static_cast<int>(rows.begin()->size()) : 0);
  int r = 0;
  for (const auto& row : rows) {
    if (static_cast<int>(row.size()) != t.cols) throw DimensionError("ragged initializer");
    int c = 0;
    for (double v : row) t.at(r, c++) = v;
    ++r;
  }
  return t;
}

Tensor Tensor::uniform(int r, int c, double lo, double hi, RngStream& rng) {
  Tensor t(r, c);
  for (double& v : t.data) v = rng.uniform(lo, hi);
  return t;
}

bool Tensor::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

Tensor matmul(const Tensor& a, const Tensor& b) {
  if (a.cols != b.rows) throw DimensionError("matmul: inner dimensions disagree");
  Tensor c(a.rows, b.cols);
  MapMatMut(c.data.data(), c.rows, c.cols).noalias() = map(a) * map(b);
  return c;
}

Tensor matmul_tn(const Tensor& a, const Tensor& b) {
  if (a.rows != b.rows) throw DimensionError("matmul_tn: inner dimensions disagree");
  Tensor c(a.cols, b.cols);
  MapMatMut(c.data.data(), c.rows, c.cols).noalias() = map(a).transpose() * map(b);
  return c;
}

Tensor matmul_nt(const Tensor& a, const Tensor& b) {
  if (a.cols != b.cols) throw DimensionError("matmul_nt: inner dimensions disagree");
  Tensor c(a.rows, b.rows);
  MapMatMut(c.data.data(), c.rows, c.cols).noalias() = map(a) * map(b).transpose();
  return c;
}

void quantize_to_f32(std::vector<double>& v) {
  for (double& x : v) x = static_cast<double>(static_cast<float>(x));
}

void quantize_to_f32(Tensor& t) { quantize_to_f32(t.data); }

}  // namespace fedrl
