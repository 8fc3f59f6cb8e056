#include "plrsq/metrics.hpp"

#include <cmath>
#include <string>

#include "plrsq/error.hpp"

namespace plrsq {

double kappa(double accuracy, int num_classes) {
  if (num_classes < 2) throw ConfigError("kappa: need at least two classes");
  if (!(accuracy >= 0.0 && accuracy <= 1.0)) {
    throw ValidationError("kappa: accuracy must lie in [0, 1]");
  }
  const double chance = 1.0 / static_cast<double>(num_classes);
  return (accuracy - chance) / (1.0 - chance);
}

ConfusionMatrix::ConfusionMatrix(int num_classes) : c_(num_classes) {
  if (num_classes < 1) throw ConfigError("confusion matrix: need at least one class");
  counts_.assign(static_cast<std::size_t>(c_) * static_cast<std::size_t>(c_), 0);
}

void ConfusionMatrix::add(ClassId truth, ClassId predicted) {
  if (truth < 1 || truth > c_ || predicted < 1 || predicted > c_) {
    throw ValidationError("confusion matrix: label out of range");
  }
  ++counts_[static_cast<std::size_t>((truth - 1) * c_ + (predicted - 1))];
  ++total_;
}

std::size_t ConfusionMatrix::at(ClassId truth, ClassId predicted) const {
  if (truth < 1 || truth > c_ || predicted < 1 || predicted > c_) {
    throw ValidationError("confusion matrix: label out of range");
  }
  return counts_[static_cast<std::size_t>((truth - 1) * c_ + (predicted - 1))];
}

std::size_t ConfusionMatrix::row_sum(ClassId truth) const {
  std::size_t s = 0;
  for (ClassId p = 1; p <= c_; ++p) s += at(truth, p);
  return s;
}

std::size_t ConfusionMatrix::trace() const {
  std::size_t s = 0;
  for (ClassId k = 1; k <= c_; ++k) s += at(k, k);
  return s;
}

MetricsReport compute_metrics(std::span<const ClassId> truth, std::span<const ClassId> predicted,
                              int num_classes) {
  if (truth.size() != predicted.size()) {
    throw ValidationError("compute_metrics: " + std::to_string(truth.size()) + " labels but " +
                          std::to_string(predicted.size()) + " predictions");
  }
  if (truth.empty()) throw ValidationError("compute_metrics: no samples");
  MetricsReport report;
  report.confusion = ConfusionMatrix(num_classes);
  for (std::size_t i = 0; i < truth.size(); ++i) report.confusion.add(truth[i], predicted[i]);
  report.accuracy =
      static_cast<double>(report.confusion.trace()) / static_cast<double>(report.confusion.total());
  report.kappa = num_classes >= 2 ? kappa(report.accuracy, num_classes) : 1.0;
  return report;
}

Summary summarize(std::span<const double> values) {
  Summary s;
  s.count = values.size();
  if (values.empty()) return s;
  for (double v : values) s.mean += v;
  s.mean /= static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return s;
}

}  // namespace plrsq
