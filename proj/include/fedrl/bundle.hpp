#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "fedrl/common.hpp"
#include "fedrl/tensor.hpp"

namespace fedrl {

// Named, ordered collection of tensors: one network's parameters, or any
// other state blob that travels through the wire format. Names are unique;
// order is part of the structure and is preserved by serialization.
class TensorBundle {
 public:
  struct Entry {
    std::string name;
    std::vector<std::uint32_t> shape;
    std::vector<double> data;

    std::size_t numel() const {
      std::size_t n = 1;
      for (auto d : shape) n *= d;
      return n;
    }
  };

  TensorBundle() = default;

  void add(std::string name, std::vector<std::uint32_t> shape, std::vector<double> data);
  void add_matrix(const std::string& name, const Tensor& t);
  void add_vector(const std::string& name, const std::vector<double>& v);
  void add_scalar(const std::string& name, double v);

  const Entry* find(const std::string& name) const;
  const Entry& at(const std::string& name) const;
  Tensor matrix(const std::string& name) const;

  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const std::vector<Entry>& entries() const { return entries_; }

  std::size_t param_count() const;

  // Same names, same order, same shapes.
  bool structural_match(const TensorBundle& o) const;
  bool all_finite() const;

  // Exact elementwise equality (shape and bits).
  bool operator==(const TensorBundle& o) const;

  // Prefixes every entry name; used when packing several components into one
  // wire payload (e.g. "policy/l0.w").
  static TensorBundle prefixed(const std::string& prefix, const TensorBundle& b);
  // Extracts the entries under a prefix, stripping it.
  TensorBundle strip_prefix(const std::string& prefix) const;

  void quantize_f32();

 private:
  std::vector<Entry> entries_;
};

// Elementwise weighted mean of structurally identical bundles. Weights are
// applied in input order; callers pass participants in a fixed order so the
// floating-point summation order is reproducible.
TensorBundle weighted_mean(const std::vector<const TensorBundle*>& bundles,
                           const std::vector<double>& weights);

}  // namespace fedrl
