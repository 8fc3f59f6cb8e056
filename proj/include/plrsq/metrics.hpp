#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "plrsq/dataset.hpp"

namespace plrsq {

/// Chance-corrected accuracy for balanced classes:
/// (accuracy - 1/C) / (1 - 1/C).
/// Throws ConfigError if num_classes < 2, ValidationError if accuracy is
/// outside [0, 1].
double kappa(double accuracy, int num_classes);

/// C x C counts; rows are true classes, columns predicted classes.
class ConfusionMatrix {
 public:
  explicit ConfusionMatrix(int num_classes);

  void add(ClassId truth, ClassId predicted);

  int num_classes() const noexcept { return c_; }
  std::size_t at(ClassId truth, ClassId predicted) const;
  std::size_t row_sum(ClassId truth) const;
  std::size_t total() const noexcept { return total_; }
  std::size_t trace() const;

 private:
  int c_;
  std::vector<std::size_t> counts_;
  std::size_t total_ = 0;
};

struct MetricsReport {
  double accuracy = 0.0;
  double kappa = 0.0;
  ConfusionMatrix confusion{2};
};

/// Throws ValidationError on length mismatch, empty input or labels out of
/// range.
MetricsReport compute_metrics(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                              int num_classes);

struct Summary {
  double mean = 0.0;
  double stddev = 0.0;  // sample standard deviation, 0 for a single value
  std::size_t count = 0;
};

Summary summarize(std::span<const double> values);

}  // namespace plrsq
