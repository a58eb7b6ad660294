#include "fedrl/bundle.hpp"

#include <algorithm>
#include <cmath>

namespace fedrl {

void TensorBundle::add(std::string name, std::vector<std::uint32_t> shape,
                       std::vector<double> data) {
  if (find(name)) throw CompatibilityError("duplicate bundle entry: " + name);
  std::size_t n = 1;
  for (auto d : shape) n *= d;
  if (n != data.size())
    throw DimensionError("bundle entry '" + name + "': shape does not match data length");
  entries_.push_back(Entry{std::move(name), std::move(shape), std::move(data)});
}

void TensorBundle::add_matrix(const std::string& name, const Tensor& t) {
  add(name, {static_cast<std::uint32_t>(t.rows), static_cast<std::uint32_t>(t.cols)}, t.data);
}

void TensorBundle::add_vector(const std::string& name, const std::vector<double>& v) {
  add(name, {static_cast<std::uint32_t>(v.size())}, v);
}

void TensorBundle::add_scalar(const std::string& name, double v) { add(name, {1u}, {v}); }

const TensorBundle::Entry* TensorBundle::find(const std::string& name) const {
  for (const auto& e : entries_)
    if (e.name == name) return &e;
  return nullptr;
}

const TensorBundle::Entry& TensorBundle::at(const std::string& name) const {
  const Entry* e = find(name);
  if (!e) throw CompatibilityError("bundle entry not found: " + name);
  return *e;
}

Tensor TensorBundle::matrix(const std::string& name) const {
  const Entry& e = at(name);
  Tensor t;
  if (e.shape.size() == 2) {
    t.rows = static_cast<int>(e.shape[0]);
    t.cols = static_cast<int>(e.shape[1]);
  } else if (e.shape.size() == 1) {
    t.rows = 1;
    t.cols = static_cast<int>(e.shape[0]);
  } else {
    throw DimensionError("bundle entry '" + name + "' is not rank 1 or 2");
  }
  t.data = e.data;
  return t;
}

std::size_t TensorBundle::param_count() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.numel();
  return n;
}

bool TensorBundle::structural_match(const TensorBundle& o) const {
  if (entries_.size() != o.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].name != o.entries_[i].name) return false;
    if (entries_[i].shape != o.entries_[i].shape) return false;
  }
  return true;
}

bool TensorBundle::all_finite() const {
  for (const auto& e : entries_)
    for (double v : e.data)
      if (!std::isfinite(v)) return false;
  return true;
}

bool TensorBundle::operator==(const TensorBundle& o) const {
  if (!structural_match(o)) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i)
    if (entries_[i].data != o.entries_[i].data) return false;
  return true;
}

TensorBundle TensorBundle::prefixed(const std::string& prefix, const TensorBundle& b) {
  TensorBundle out;
  for (const auto& e : b.entries_) out.add(prefix + e.name, e.shape, e.data);
  return out;
}

TensorBundle TensorBundle::strip_prefix(const std::string& prefix) const {
  TensorBundle out;
  for (const auto& e : entries_)
    if (e.name.rfind(prefix, 0) == 0) out.add(e.name.substr(prefix.size()), e.shape, e.data);
  return out;
}

void TensorBundle::quantize_f32() {
  for (auto& e : entries_) quantize_to_f32(e.data);
}

TensorBundle weighted_mean(const std::vector<const TensorBundle*>& bundles,
                           const std::vector<double>& weights) {
  if (bundles.empty()) throw CompatibilityError("weighted_mean: no participants");
  if (bundles.size() != weights.size())
    throw DimensionError("weighted_mean: weight count does not match participant count");
  const TensorBundle& head = *bundles.front();
  for (const TensorBundle* b : bundles)
    if (!b->structural_match(head))
      throw CompatibilityError("weighted_mean: structurally mismatched bundles");

  TensorBundle out;
  for (std::size_t ei = 0; ei < head.entries().size(); ++ei) {
    const auto& ref = head.entries()[ei];
    std::vector<double> acc(ref.data.size(), 0.0);
    for (std::size_t bi = 0; bi < bundles.size(); ++bi) {
      const auto& src = bundles[bi]->entries()[ei].data;
      const double w = weights[bi];
      for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += w * src[k];
    }
    out.add(ref.name, ref.shape, std::move(acc));
  }
  return out;
}

}  // namespace fedrl
