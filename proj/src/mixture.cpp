#include "plrsq/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace plrsq {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double log_sum_exp(std::span<const double> logits, auto&& keep) {
  double peak = kNegInf;
  for (std::size_t l = 0; l < logits.size(); ++l) {
    if (keep(l)) peak = std::max(peak, logits[l]);
  }
  if (peak == kNegInf) return kNegInf;
  double sum = 0.0;
  for (std::size_t l = 0; l < logits.size(); ++l) {
    if (keep(l)) sum += std::exp(logits[l] - peak);
  }
  return peak + std::log(sum);
}

}  // namespace

std::vector<double> mixture_logits(const MixtureView& mix, std::span<const double> dist_sq) {
  if (dist_sq.size() != mix.labels.size() || mix.priors.size() != mix.labels.size()) {
    throw ValidationError("mixture: prototype count mismatch");
  }
  std::vector<double> logits(dist_sq.size());
  for (std::size_t l = 0; l < dist_sq.size(); ++l) {
    const double log_prior = mix.priors[l] > 0.0 ? std::log(mix.priors[l]) : kNegInf;
    logits[l] = log_prior - dist_sq[l] / (2.0 * mix.sigma_sq);
  }
  return logits;
}

Posteriors mixture_posteriors(const MixtureView& mix, std::span<const double> dist_sq,
                              ClassId y) {
  const auto logits = mixture_logits(mix, dist_sq);
  const std::size_t m = logits.size();
  if (std::find(mix.labels.begin(), mix.labels.end(), y) == mix.labels.end()) {
    throw ValidationError("mixture: class " + std::to_string(y) + " has no prototypes");
  }

  // One shared shift so the in-class and global weights come from identical
  // exponentials; with a single class the two vectors are then bitwise equal.
  double peak = kNegInf;
  for (double a : logits) peak = std::max(peak, a);
  std::vector<double> weight(m);
  double total = 0.0;
  double in_class = 0.0;
  for (std::size_t l = 0; l < m; ++l) {
    weight[l] = std::exp(logits[l] - peak);
    total += weight[l];
    if (mix.labels[l] == y) in_class += weight[l];
  }

  if (in_class == 0.0) {
    // The correct class underflowed against the peak; renormalize within it.
    double class_peak = kNegInf;
    for (std::size_t l = 0; l < m; ++l) {
      if (mix.labels[l] == y) class_peak = std::max(class_peak, logits[l]);
    }
    Posteriors out{std::vector<double>(m, 0.0), std::vector<double>(m)};
    double class_sum = 0.0;
    for (std::size_t l = 0; l < m; ++l) {
      if (mix.labels[l] == y) {
        out.in_class[l] = std::exp(logits[l] - class_peak);
        class_sum += out.in_class[l];
      }
    }
    for (std::size_t l = 0; l < m; ++l) {
      out.in_class[l] /= class_sum;
      out.all[l] = weight[l] / total;
    }
    return out;
  }

  Posteriors out{std::vector<double>(m, 0.0), std::vector<double>(m)};
  for (std::size_t l = 0; l < m; ++l) {
    out.all[l] = weight[l] / total;
    if (mix.labels[l] == y) out.in_class[l] = weight[l] / in_class;
  }
  return out;
}

PosteriorReport mixture_report(const MixtureView& mix, std::span<const double> dist_sq) {
  const auto logits = mixture_logits(mix, dist_sq);
  double peak = kNegInf;
  for (double a : logits) peak = std::max(peak, a);
  PosteriorReport report;
  report.prototype_probs.resize(logits.size());
  report.class_probs.assign(static_cast<std::size_t>(mix.num_classes), 0.0);
  double total = 0.0;
  for (std::size_t l = 0; l < logits.size(); ++l) {
    report.prototype_probs[l] = std::exp(logits[l] - peak);
    total += report.prototype_probs[l];
  }
  for (std::size_t l = 0; l < logits.size(); ++l) {
    report.prototype_probs[l] /= total;
    report.class_probs.at(static_cast<std::size_t>(mix.labels[l] - 1)) +=
        report.prototype_probs[l];
  }
  report.predicted = static_cast<ClassId>(argmax_lowest(report.class_probs)) + 1;
  return report;
}

double mixture_nll(const MixtureView& mix, std::span<const double> dist_sq, ClassId y) {
  const auto logits = mixture_logits(mix, dist_sq);
  const double all = log_sum_exp(logits, [](std::size_t) { return true; });
  const double own = log_sum_exp(logits, [&](std::size_t l) { return mix.labels[l] == y; });
  if (own == kNegInf) {
    throw ValidationError("mixture: class " + std::to_string(y) + " has no prototypes");
  }
  return std::max(0.0, all - own);
}

std::size_t argmax_lowest(std::span<const double> values) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < values.size(); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace plrsq
