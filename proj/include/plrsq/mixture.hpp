#pragma once

// Posterior arithmetic of the labeled Gaussian-like mixture, shared by the
// Riemannian classifier and the Euclidean baseline. Inputs are squared
// distances from one sample to every prototype; the geometry that produced
// them does not matter here.

#include <span>
#include <vector>

#include "plrsq/dataset.hpp"

namespace plrsq {

/// Per-prototype assignment probabilities for a labeled sample.
struct Posteriors {
  /// P(l | X, y): normalized over prototypes of class y, zero elsewhere.
  std::vector<double> in_class;
  /// P(l | X): normalized over all prototypes.
  std::vector<double> all;
};

struct PosteriorReport {
  std::vector<double> class_probs;      // index k is class k + 1
  std::vector<double> prototype_probs;  // P(l | X)
  ClassId predicted = 0;                // argmax of class_probs, ties to lowest id
};

/// Mixture view over prototype labels and priors.
struct MixtureView {
  std::span<const ClassId> labels;
  std::span<const double> priors;
  double sigma_sq;
  int num_classes;
};

/// Exponents log P(l) - d_l / (2 sigma^2).
std::vector<double> mixture_logits(const MixtureView& mix, std::span<const double> dist_sq);

/// Throws ValidationError if no prototype carries label `y`.
Posteriors mixture_posteriors(const MixtureView& mix, std::span<const double> dist_sq,
                              ClassId y);

PosteriorReport mixture_report(const MixtureView& mix, std::span<const double> dist_sq);

/// -log p(y | X), evaluated with log-sum-exp.
double mixture_nll(const MixtureView& mix, std::span<const double> dist_sq, ClassId y);

/// Argmax with ties resolved to the lowest index.
std::size_t argmax_lowest(std::span<const double> values);

}  // namespace plrsq
