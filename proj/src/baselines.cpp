#include "plrsq/baselines.hpp"

#include <cmath>
#include <limits>
#include <numeric>

namespace plrsq {

namespace {

constexpr std::uint64_t kInitStream = 0x1A;
constexpr std::uint64_t kEpochStream = 0x2B;

}  // namespace

void MdrmModel::validate() const {
  if (num_classes < 1 || class_means.size() != static_cast<std::size_t>(num_classes)) {
    throw ValidationError("mdrm model: need exactly one mean per class");
  }
  for (const auto& m : class_means) {
    if (m.dim() != dim) throw ValidationError("mdrm model: mean dimension mismatch");
  }
}

MdrmModel mdrm_train(const LabeledDataset& data, const KarcherOptions& karcher) {
  data.validate();
  MdrmModel model;
  model.dim = data.dim;
  model.num_classes = data.num_classes;
  for (ClassId k = 1; k <= data.num_classes; ++k) {
    const auto members = data.class_points(k);
    if (members.empty()) {
      throw ValidationError("mdrm_train: class " + std::to_string(k) + " has no samples");
    }
    model.class_means.push_back(karcher_mean(members, karcher));
  }
  return model;
}

ClassId mdrm_predict(const MdrmModel& model, const SpdMatrix& x) {
  if (x.dim() != model.dim) throw ValidationError("mdrm_predict: dimension mismatch");
  // Distances are computed from the sample's chart: one decomposition for X
  // plus eigenvalues-only per class.
  const Chart chart(x);
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < model.class_means.size(); ++k) {
    const double d = geo_distance_sq(chart, model.class_means[k]);
    if (d < best_d) {
      best_d = d;
      best = k;
    }
  }
  return static_cast<ClassId>(best) + 1;
}

SpdMatrix project_to_spd(const Matrix& w, double tau) {
  if (!(tau > 0.0)) throw ConfigError("project_to_spd: tau must be positive");
  if (!is_symmetric(w)) throw ValidationError("project_to_spd: matrix is not symmetric");
  // A successful Cholesky of W - tau I certifies every eigenvalue exceeds tau.
  const Eigen::LLT<Matrix> shifted(w - tau * Matrix::Identity(w.rows(), w.cols()));
  if (shifted.info() == Eigen::Success) return SpdMatrix::unchecked(w);
  const auto eig = sym_eig(w);
  return SpdMatrix::unchecked(spectral_apply(eig, [tau](double l) { return std::max(l, tau); }));
}

// ---------------------------------------------------------------------------

std::vector<ClassId> EuclideanRslvqModel::labels() const {
  std::vector<ClassId> out;
  for (const auto& p : prototypes) out.push_back(p.label);
  return out;
}

void EuclideanRslvqModel::validate() const {
  Model shadow;
  shadow.prototypes = prototypes;
  shadow.sigma_sq = sigma_sq;
  shadow.priors = priors;
  shadow.dim = dim;
  shadow.num_classes = num_classes;
  shadow.validate();
  if (!(tau > 0.0)) throw ValidationError("rslvq model: tau must be positive");
}

std::vector<double> euclidean_distances_sq(const EuclideanRslvqModel& model, const Matrix& x) {
  std::vector<double> d2;
  d2.reserve(model.prototypes.size());
  for (const auto& p : model.prototypes) d2.push_back((x - p.matrix.matrix()).squaredNorm());
  return d2;
}

PosteriorReport rslvq_predict(const EuclideanRslvqModel& model, const SpdMatrix& x) {
  if (x.dim() != model.dim) throw ValidationError("rslvq_predict: dimension mismatch");
  const auto labels = model.labels();
  return mixture_report(model.view(labels), euclidean_distances_sq(model, x.matrix()));
}

void rslvq_step_inplace(EuclideanRslvqModel& model, const SpdMatrix& x, ClassId y,
                        double alpha) {
  if (x.dim() != model.dim) throw ValidationError("rslvq_step: dimension mismatch");
  const auto labels = model.labels();
  const Posteriors post =
      mixture_posteriors(model.view(labels), euclidean_distances_sq(model, x.matrix()), y);
  for (std::size_t l = 0; l < model.prototypes.size(); ++l) {
    const double weight = labels[l] == y ? post.in_class[l] - post.all[l] : -post.all[l];
    if (weight == 0.0) continue;
    auto& w = model.prototypes[l].matrix;
    const Matrix moved = w.matrix() + (alpha / model.sigma_sq * weight) * (x.matrix() - w.matrix());
    w = project_to_spd(symmetrize(moved), model.tau);
  }
}

Evaluation rslvq_evaluate(const EuclideanRslvqModel& model, const LabeledDataset& data) {
  const auto labels = model.labels();
  const auto mix = model.view(labels);
  Evaluation eval;
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto d2 = euclidean_distances_sq(model, data.points[i].matrix());
    eval.cost += mixture_nll(mix, d2, data.labels[i]);
    const ClassId pred = mixture_report(mix, d2).predicted;
    eval.predicted.push_back(pred);
    if (pred != data.labels[i]) ++wrong;
  }
  eval.error = data.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(data.size());
  return eval;
}

RslvqTrainResult euclidean_rslvq_train(const LabeledDataset& data, const TrainConfig& config,
                                       double tau, const RslvqEpochCallback& on_epoch) {
  config.validate();
  data.validate();
  if (data.empty()) throw ValidationError("euclidean_rslvq_train: empty dataset");
  if (!(tau > 0.0)) throw ConfigError("euclidean_rslvq_train: tau must be positive");

  RslvqTrainResult result;
  EuclideanRslvqModel& model = result.model;
  model.dim = data.dim;
  model.num_classes = data.num_classes;
  model.tau = tau;
  model.sigma_sq = config.sigma_sq_opt;
  for (ClassId k = 1; k <= data.num_classes; ++k) {
    const auto members = data.class_points(k);
    if (members.empty()) {
      throw ValidationError("euclidean_rslvq_train: class " + std::to_string(k) +
                            " has no samples");
    }
    Matrix mean = Matrix::Zero(data.dim, data.dim);
    for (const auto& p : members) mean += p.matrix();
    mean /= static_cast<double>(members.size());
    for (int j = 0; j < config.prototypes_per_class; ++j) {
      Matrix start = mean;
      if (config.init_perturb_scale > 0.0) {
        Rng rng = Rng::derive(config.rng_seed, {kInitStream, static_cast<std::uint64_t>(k),
                                                static_cast<std::uint64_t>(j)});
        start += random_symmetric(data.dim, config.init_perturb_scale, rng);
      }
      model.prototypes.push_back({project_to_spd(symmetrize(start), tau), k});
    }
  }
  model.priors.assign(model.prototypes.size(), 1.0 / static_cast<double>(model.prototypes.size()));
  model.validate();

  AnnealState anneal = anneal_start(config);
  std::vector<std::size_t> order(data.size());
  for (int t = 1; t <= config.epochs; ++t) {
    model.sigma_sq = anneal.sigma_sq;
    const double alpha = learning_rate(t, data.dim, config.prototypes_per_class, config.epochs,
                                       config.lr_numerator_divisor, config.lr_decay_base);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::derive(config.rng_seed, {kEpochStream, static_cast<std::uint64_t>(t)});
    rng.shuffle(order);
    for (std::size_t i : order) {
      try {
        rslvq_step_inplace(model, data.points[i], data.labels[i], alpha);
      } catch (const Error& e) {
        throw TrainingError(e.what(), t, i);
      }
    }
    EpochRecord record{t, 0.0, 0.0, model.sigma_sq, alpha};
    if (config.track_history) {
      const Evaluation eval = rslvq_evaluate(model, data);
      record.cost = eval.cost;
      record.train_error = eval.error;
    }
    result.history.push_back(record);
    if (on_epoch) on_epoch(record, model);
    if (anneal.active && t < config.epochs) anneal = anneal_sigma(anneal, config);
  }
  return result;
}

}  // namespace plrsq
