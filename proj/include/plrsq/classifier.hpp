#pragma once

// Probabilistic learning vector quantization on the SPD manifold: a labeled
// Gaussian-like mixture whose components are centered on SPD prototypes and
// scored by squared geodesic distance, trained by stochastic Riemannian
// gradient descent on the negative log likelihood of the true labels.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "plrsq/dataset.hpp"
#include "plrsq/mixture.hpp"
#include "plrsq/rng.hpp"
#include "plrsq/spd.hpp"

namespace plrsq {

struct Prototype {
  SpdMatrix matrix;
  ClassId label;
};

struct Model {
  std::vector<Prototype> prototypes;
  double sigma_sq = 1.0;
  std::vector<double> priors;
  Eigen::Index dim = 0;
  int num_classes = 0;

  /// Uniform priors 1/M.
  static Model with_uniform_priors(std::vector<Prototype> prototypes, double sigma_sq,
                                   int num_classes);

  std::size_t size() const noexcept { return prototypes.size(); }
  std::vector<ClassId> labels() const;
  MixtureView view(const std::vector<ClassId>& labels) const {
    return {labels, priors, sigma_sq, num_classes};
  }

  /// Checks M >= C, every class owned, priors summing to 1, dims and sigma.
  void validate() const;
};

enum class Annealing {
  none,           // sigma^2 held at sigma_sq_opt
  geometric,      // beta(t) = beta(t-1)^anneal_exponent
  constant_beta,  // beta(t) = beta0 (slower decay)
};

std::string to_string(Annealing a);
Annealing annealing_from_string(const std::string& s);

struct TrainConfig {
  double sigma_sq_opt = 1.0;
  int prototypes_per_class = 1;
  int epochs = 100;
  Annealing annealing = Annealing::none;
  double beta0 = 0.99;
  double anneal_exponent = 1.1;
  double anneal_stop_offset = 0.4;
  double lr_numerator_divisor = 100.0;
  double lr_decay_base = 0.01;
  double init_perturb_scale = 0.01;
  std::uint64_t rng_seed = 0;
  KarcherOptions karcher;
  /// Evaluate cost and training error after every epoch. When false the
  /// history carries only sigma^2 and alpha.
  bool track_history = true;

  /// Throws ConfigError.
  void validate() const;
};

/// -dist^2(X, W) / (2 sigma^2)
double f_score(const SpdMatrix& x, const SpdMatrix& w, double sigma_sq);

/// Squared distances from `x` to every prototype.
std::vector<double> prototype_distances_sq(const Model& model, const SpdMatrix& x);

Posteriors posteriors(const Model& model, const SpdMatrix& x, ClassId y);

/// p(y | X) for every class and the winner-takes-all prediction.
PosteriorReport class_posterior(const Model& model, const SpdMatrix& x);
inline PosteriorReport predict(const Model& model, const SpdMatrix& x) {
  return class_posterior(model, x);
}

/// Negative log likelihood of the labels, sum over samples.
double cost(const Model& model, const LabeledDataset& data);

/// Riemannian gradient of the single-sample cost with respect to each
/// prototype, assembled from dist_sq_gradient.
std::vector<TangentVector> cost_gradient(const Model& model, const SpdMatrix& x, ClassId y);

/// Tangent step V_l applied to each prototype by sgd_step; equals
/// -alpha * cost_gradient.
std::vector<TangentVector> update_directions(const Model& model, const SpdMatrix& x,
                                             ClassId y, double alpha);

/// One stochastic update: all posteriors from the pre-step model, then
/// W_l <- Exp_{W_l}(V_l) for every prototype.
Model sgd_step(const Model& model, const SpdMatrix& x, ClassId y, double alpha);

/// In-place variant used by the trainer.
void sgd_step_inplace(Model& model, const SpdMatrix& x, ClassId y, double alpha);

/// (n * xi / divisor) * decay_base^(t / T), t in 1..T.
double learning_rate(int t, Eigen::Index n, int xi, int epochs, double divisor = 100.0,
                     double decay_base = 0.01);

struct AnnealState {
  double sigma_sq;
  double beta;
  bool active;
};

/// State before the first epoch: sigma^2 = sigma_sq_opt, beta = beta0.
AnnealState anneal_start(const TrainConfig& config);

/// One epoch of the cooling schedule. Once sigma^2 falls below
/// sigma_sq_opt - anneal_stop_offset the state becomes inactive and is
/// returned unchanged from then on.
AnnealState anneal_sigma(const AnnealState& state, const TrainConfig& config);

/// Class Karcher means, each expanded to `xi` perturbed copies. Prototype
/// order is class-major: class 1 copies first.
std::vector<Prototype> init_prototypes(const LabeledDataset& data, int xi, double perturb,
                                       std::uint64_t seed, const KarcherOptions& karcher = {});

/// Random symmetric matrix with N(0, scale^2) entries, symmetrized.
Matrix random_symmetric(Eigen::Index n, double scale, Rng& rng);

struct EpochRecord {
  int epoch = 0;
  double cost = 0.0;
  double train_error = 0.0;
  double sigma_sq = 0.0;
  double alpha = 0.0;
};

struct TrainResult {
  Model model;
  std::vector<EpochRecord> history;
};

using EpochCallback = std::function<void(const EpochRecord&, const Model&)>;

/// Thrown when a step breaks a prototype invariant.
class TrainingError : public NumericalError {
 public:
  TrainingError(const std::string& what, int epoch, std::size_t sample)
      : NumericalError(what + " (epoch " + std::to_string(epoch) + ", sample " +
                       std::to_string(sample) + ")"),
        epoch_(epoch),
        sample_(sample) {}

  int epoch() const noexcept { return epoch_; }
  std::size_t sample() const noexcept { return sample_; }

 private:
  int epoch_;
  std::size_t sample_;
};

/// Runs `config.epochs` sweeps over a fresh seeded permutation of the data.
/// The learning rate is fixed within an epoch; sigma^2 is annealed between
/// epochs. Deterministic given config.rng_seed.
TrainResult train(const LabeledDataset& data, const TrainConfig& config,
                  const EpochCallback& on_epoch = {});

/// Training-set cost and error of a model (one distance pass).
struct Evaluation {
  double cost = 0.0;
  double error = 0.0;
  std::vector<ClassId> predicted;
};
Evaluation evaluate(const Model& model, const LabeledDataset& data);

}  // namespace plrsq
