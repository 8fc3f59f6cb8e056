#pragma once

// Synthetic SPD datasets built from prescribed spectra and eigenbases, and
// covariance descriptors of multichannel signal trials.

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "plrsq/dataset.hpp"
#include "plrsq/rng.hpp"
#include "plrsq/spd.hpp"

namespace plrsq {

/// Spectrum with mean exactly 1 (up to rounding).
struct EigenProfile {
  int id = 0;
  Vector values;
};

/// Profiles 1..4 for j = 1..n, normalized to mean 1:
///   1: 13 - j   2: 1 + 100 exp(-j/2)   3: 13 - j/2   4: 1/j
EigenProfile eigen_profile(int profile_id, Eigen::Index n);

struct OrthoBasis {
  Matrix columns;  // orthonormal columns
};

/// Modified Gram-Schmidt on the columns of `a`, in column order. A column
/// whose residual norm falls below 1e-10 is replaced by redraw(j) and
/// processed again.
template <typename Redraw>
OrthoBasis gram_schmidt(Matrix a, Redraw&& redraw) {
  const Eigen::Index n = a.cols();
  for (Eigen::Index j = 0; j < n; ++j) {
    for (;;) {
      Vector v = a.col(j);
      for (Eigen::Index k = 0; k < j; ++k) v -= a.col(k).dot(v) * a.col(k);
      const double len = v.norm();
      if (len > 1e-10) {
        a.col(j) = v / len;
        break;
      }
      a.col(j) = redraw(j);
    }
  }
  return {std::move(a)};
}

/// Gram-Schmidt of an n x n standard-normal matrix.
OrthoBasis random_orthonormal_basis(Eigen::Index n, Rng& rng);
OrthoBasis random_orthonormal_basis(Eigen::Index n, std::uint64_t seed);

/// X = sum_j lambda_j u_j u_j^T with lambda_j ~ U(eta_j - epsilon, eta_j + epsilon)
/// and u = GramSchmidt(basis + N(0, nu^2)) column by column.
/// Throws ConfigError unless 0 <= epsilon < min eta.
SpdMatrix sample_instance(const EigenProfile& profile, const OrthoBasis& basis, double epsilon,
                          double nu, Rng& rng);

enum class SynthName { syn1, syn2 };

std::string to_string(SynthName name);
SynthName synth_name_from_string(const std::string& s);

struct SynthSpec {
  SynthName name = SynthName::syn1;
  Eigen::Index n = 10;
  int num_classes = 4;
  /// (profile id, basis id) per class, class 1 first. Basis ids are 1-based.
  std::vector<std::pair<int, int>> class_pairs;
  double epsilon = 0.1;
  double nu = 0.3;
  int instances_per_class = 250;
  std::uint64_t seed = 0;

  static SynthSpec make(SynthName name, std::uint64_t seed);
  void validate() const;
};

struct SynthSplits {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
};

/// Draws the shared bases, then three independent splits. Each instance has
/// its own stream derived from (seed, split, class, instance).
SynthSplits gen_dataset(const SynthSpec& spec);

/// X = E_c E_c^T / (l - 1) where E_c is E with each row centered.
/// Throws DomainError if the result is not positive definite above
/// tol::eig_floor.
SpdMatrix covariance_from_trial(const Matrix& trial);

}  // namespace plrsq
