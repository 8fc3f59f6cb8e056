#pragma once

#include <span>
#include <vector>

#include "plrsq/spd.hpp"

namespace plrsq {

/// Class ids are 1-based throughout: labels lie in {1, ..., num_classes}.
using ClassId = int;

/// SPD samples with class labels, sharing one dimension and class count.
struct LabeledDataset {
  std::vector<SpdMatrix> points;
  std::vector<ClassId> labels;
  Eigen::Index dim = 0;
  int num_classes = 0;

  std::size_t size() const noexcept { return points.size(); }
  bool empty() const noexcept { return points.empty(); }

  void add(SpdMatrix x, ClassId y);

  /// Throws ValidationError on mismatched sizes, dims or out-of-range labels.
  void validate() const;

  /// Sample count per class; index 0 is class 1.
  std::vector<std::size_t> class_counts() const;

  /// Points carrying label `y`.
  std::vector<SpdMatrix> class_points(ClassId y) const;

  LabeledDataset subset(std::span<const std::size_t> indices) const;

  /// Concatenation; both sides must agree on dim and num_classes.
  static LabeledDataset concat(const LabeledDataset& a, const LabeledDataset& b);
};

}  // namespace plrsq
