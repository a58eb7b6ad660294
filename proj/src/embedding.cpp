#include "fedrl/embedding.hpp"

#include "fedrl/mlp.hpp"

namespace fedrl {

EmbeddingTable::EmbeddingTable(std::string name, int num_ids, int dim, RngStream& init)
    : rows_(name + ".id", fan_in_init(num_ids, dim, dim, init)),
      cls_(name + ".cls", fan_in_init(1, dim, dim, init)) {
  if (num_ids < 1 || dim < 1) throw DimensionError("EmbeddingTable: bad dimensions");
}

ValueId EmbeddingTable::id_row(Tape& t, int id, bool train_params) {
  if (id < 0 || id >= rows_.value.rows)
    throw DimensionError("EmbeddingTable: id " + std::to_string(id) + " out of range");
  return t.slice_rows(t.param(rows_, train_params), id, id + 1);
}

ValueId EmbeddingTable::cls_row(Tape& t, bool train_params) {
  return t.param(cls_, train_params);
}

TensorBundle EmbeddingTable::bundle() const {
  TensorBundle b;
  b.add_matrix("id", rows_.value);
  b.add_matrix("cls", cls_.value);
  return b;
}

void EmbeddingTable::load(const TensorBundle& b) {
  Tensor id = b.matrix("id");
  Tensor cls = b.matrix("cls");
  if (!id.same_shape(rows_.value) || !cls.same_shape(cls_.value))
    throw CompatibilityError("EmbeddingTable: bundle shape mismatch");
  rows_.value = std::move(id);
  cls_.value = std::move(cls);
}

}  // namespace fedrl
