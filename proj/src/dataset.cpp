#include "plrsq/dataset.hpp"

#include <string>

namespace plrsq {

void LabeledDataset::add(SpdMatrix x, ClassId y) {
  points.push_back(std::move(x));
  labels.push_back(y);
}

void LabeledDataset::validate() const {
  if (points.size() != labels.size()) {
    throw ValidationError("dataset: " + std::to_string(points.size()) + " points but " +
                          std::to_string(labels.size()) + " labels");
  }
  if (dim <= 0) throw ValidationError("dataset: dimension must be positive");
  if (num_classes <= 0) throw ValidationError("dataset: class count must be positive");
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].dim() != dim) {
      throw ValidationError("dataset: sample " + std::to_string(i) + " has dimension " +
                            std::to_string(points[i].dim()) + ", expected " +
                            std::to_string(dim));
    }
    if (labels[i] < 1 || labels[i] > num_classes) {
      throw ValidationError("dataset: sample " + std::to_string(i) + " has label " +
                            std::to_string(labels[i]) + " outside 1.." +
                            std::to_string(num_classes));
    }
  }
}

std::vector<std::size_t> LabeledDataset::class_counts() const {
  std::vector<std::size_t> counts(static_cast<std::size_t>(num_classes), 0);
  for (ClassId y : labels) ++counts.at(static_cast<std::size_t>(y - 1));
  return counts;
}

std::vector<SpdMatrix> LabeledDataset::class_points(ClassId y) const {
  std::vector<SpdMatrix> out;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (labels[i] == y) out.push_back(points[i]);
  }
  return out;
}

LabeledDataset LabeledDataset::subset(std::span<const std::size_t> indices) const {
  LabeledDataset out;
  out.dim = dim;
  out.num_classes = num_classes;
  out.points.reserve(indices.size());
  out.labels.reserve(indices.size());
  for (std::size_t i : indices) out.add(points.at(i), labels.at(i));
  return out;
}

LabeledDataset LabeledDataset::concat(const LabeledDataset& a, const LabeledDataset& b) {
  if (a.dim != b.dim || a.num_classes != b.num_classes) {
    throw ValidationError("dataset concat: dimension or class count mismatch");
  }
  LabeledDataset out = a;
  out.points.insert(out.points.end(), b.points.begin(), b.points.end());
  out.labels.insert(out.labels.end(), b.labels.begin(), b.labels.end());
  return out;
}

}  // namespace plrsq
