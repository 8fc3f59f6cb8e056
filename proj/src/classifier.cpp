#include "plrsq/classifier.hpp"

#include <cassert>
#include <cmath>
#include <numeric>
#include <sstream>

namespace plrsq {

namespace {

// Stream tags for Rng::derive.
constexpr std::uint64_t kInitStream = 0x1A;
constexpr std::uint64_t kEpochStream = 0x2B;

// W = A A^T with A^-1 kept alongside. Any such factor gives the same
// distances and geodesics as the symmetric square root: if A = W^1/2 Q with Q
// orthogonal, A^-1 X A^-T = Q^T (W^-1/2 X W^-1/2) Q, so the spectrum agrees and
// the eigenvectors rotate by Q^T, which the update undoes.
struct Factor {
  Matrix a;
  Matrix a_inv;
};

Factor symmetric_factor(const SpdMatrix& w) {
  const Chart chart(w);
  return {chart.sqrt(), chart.invsqrt()};
}

// Spectrum of A^-1 X A^-T for one prototype.
struct StepFrame {
  EigenDecomposition whitened;
  double dist_sq;
};

StepFrame make_frame(const Factor& f, const SpdMatrix& x) {
  auto eig = sym_eig(symmetrize(f.a_inv * x.matrix() * f.a_inv.transpose()));
  if (eig.values.minCoeff() <= tol::eig_floor) {
    throw DomainError("sgd_step: whitened sample is not positive definite");
  }
  const double d2 = eig.values.array().log().square().sum();
  return {std::move(eig), d2};
}

// Exp_W(c Log_W(X)) = A U diag(mu^c) U^T A^T where mu, U is the spectrum of
// A^-1 X A^-T. The factor advances to A U diag(mu^(c/2)).
SpdMatrix advance_factor(Factor& f, const StepFrame& frame, double c) {
  const Vector half = frame.whitened.values.array().pow(0.5 * c);
  const Matrix a_next = f.a * frame.whitened.vectors * half.asDiagonal();
  f.a_inv = half.cwiseInverse().asDiagonal() * frame.whitened.vectors.transpose() * f.a_inv;
  f.a = a_next;
  return SpdMatrix::unchecked(a_next * a_next.transpose());
}

void step_with_factors(Model& model, std::vector<Factor>& factors, const SpdMatrix& x,
                       ClassId y, double alpha) {
  const std::size_t m = model.size();
  std::vector<StepFrame> frames;
  frames.reserve(m);
  std::vector<double> d2(m);
  for (std::size_t l = 0; l < m; ++l) {
    frames.push_back(make_frame(factors[l], x));
    d2[l] = frames.back().dist_sq;
  }
  const auto labels = model.labels();
  const Posteriors post = mixture_posteriors(model.view(labels), d2, y);

  for (std::size_t l = 0; l < m; ++l) {
    const bool same = labels[l] == y;
    const double weight = same ? post.in_class[l] - post.all[l] : -post.all[l];
    assert(same ? weight >= -1e-15 : weight <= 0.0);
    if (weight == 0.0) continue;
    SpdMatrix next = advance_factor(factors[l], frames[l], alpha / model.sigma_sq * weight);
    Eigen::LLT<Matrix> llt(next.matrix());
    if (llt.info() != Eigen::Success || !next.matrix().allFinite()) {
      throw NumericalError("sgd_step: prototype " + std::to_string(l) + " left the SPD cone");
    }
    model.prototypes[l].matrix = std::move(next);
  }
}

void check_sample(const Model& model, const SpdMatrix& x, ClassId y) {
  if (x.dim() != model.dim) {
    throw ValidationError("sample dimension " + std::to_string(x.dim()) +
                          " does not match model dimension " + std::to_string(model.dim));
  }
  if (y < 1 || y > model.num_classes) {
    throw ValidationError("label " + std::to_string(y) + " outside 1.." +
                          std::to_string(model.num_classes));
  }
}

// Signed coefficient of Log_W(X) in the update, divided by alpha / sigma^2.
// Non-negative for the sample's own class, non-positive otherwise.
double update_weight(const Posteriors& post, std::size_t l, bool same_class) {
  return same_class ? post.in_class[l] - post.all[l] : -post.all[l];
}

}  // namespace

// ---------------------------------------------------------------------------

Model Model::with_uniform_priors(std::vector<Prototype> prototypes, double sigma_sq,
                                 int num_classes) {
  Model model;
  const std::size_t m = prototypes.size();
  model.dim = m == 0 ? 0 : prototypes.front().matrix.dim();
  model.prototypes = std::move(prototypes);
  model.sigma_sq = sigma_sq;
  model.priors.assign(m, m == 0 ? 0.0 : 1.0 / static_cast<double>(m));
  model.num_classes = num_classes;
  return model;
}

std::vector<ClassId> Model::labels() const {
  std::vector<ClassId> out;
  out.reserve(prototypes.size());
  for (const auto& p : prototypes) out.push_back(p.label);
  return out;
}

void Model::validate() const {
  if (num_classes < 1) throw ValidationError("model: class count must be positive");
  if (prototypes.size() < static_cast<std::size_t>(num_classes)) {
    throw ValidationError("model: fewer prototypes than classes");
  }
  if (!(sigma_sq > 0.0) || !std::isfinite(sigma_sq)) {
    throw ValidationError("model: sigma^2 must be positive");
  }
  if (priors.size() != prototypes.size()) throw ValidationError("model: one prior per prototype");
  double total = 0.0;
  for (double p : priors) {
    if (!(p >= 0.0)) throw ValidationError("model: negative prior");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-12) throw ValidationError("model: priors do not sum to 1");
  std::vector<bool> owned(static_cast<std::size_t>(num_classes), false);
  for (const auto& p : prototypes) {
    if (p.label < 1 || p.label > num_classes) {
      throw ValidationError("model: prototype label " + std::to_string(p.label) +
                            " out of range");
    }
    if (p.matrix.dim() != dim) throw ValidationError("model: prototype dimension mismatch");
    owned[static_cast<std::size_t>(p.label - 1)] = true;
  }
  for (std::size_t k = 0; k < owned.size(); ++k) {
    if (!owned[k]) {
      throw ValidationError("model: class " + std::to_string(k + 1) + " has no prototype");
    }
  }
}

std::string to_string(Annealing a) {
  switch (a) {
    case Annealing::none: return "none";
    case Annealing::geometric: return "geometric";
    case Annealing::constant_beta: return "constant-beta";
  }
  return "none";
}

Annealing annealing_from_string(const std::string& s) {
  if (s == "none") return Annealing::none;
  if (s == "geometric") return Annealing::geometric;
  if (s == "constant-beta") return Annealing::constant_beta;
  throw ConfigError("unknown annealing mode '" + s + "'");
}

void TrainConfig::validate() const {
  auto fail = [](const std::string& msg) { throw ConfigError("train config: " + msg); };
  if (!(sigma_sq_opt > 0.0)) fail("sigma_sq_opt must be positive");
  if (prototypes_per_class < 1) fail("prototypes_per_class must be at least 1");
  if (epochs < 1) fail("epochs must be at least 1");
  if (!(lr_numerator_divisor > 0.0)) fail("lr_numerator_divisor must be positive");
  if (!(lr_decay_base > 0.0)) fail("lr_decay_base must be positive");
  if (!(init_perturb_scale >= 0.0)) fail("init_perturb_scale must be nonnegative");
  if (annealing != Annealing::none) {
    if (!(beta0 > 0.0 && beta0 < 1.0)) fail("beta0 must lie in (0, 1)");
    if (!(anneal_exponent > 0.0)) fail("anneal_exponent must be positive");
    if (!(anneal_stop_offset >= 0.0)) fail("anneal_stop_offset must be nonnegative");
    if (sigma_sq_opt <= anneal_stop_offset) {
      std::ostringstream os;
      os << "sigma_sq_opt (" << sigma_sq_opt << ") must exceed anneal_stop_offset ("
         << anneal_stop_offset << ") when annealing is enabled";
      fail(os.str());
    }
  }
}

// ---------------------------------------------------------------------------

double f_score(const SpdMatrix& x, const SpdMatrix& w, double sigma_sq) {
  if (!(sigma_sq > 0.0)) throw ConfigError("f_score: sigma^2 must be positive");
  const double d = geo_distance(x, w);
  return -d * d / (2.0 * sigma_sq);
}

std::vector<double> prototype_distances_sq(const Model& model, const SpdMatrix& x) {
  std::vector<double> d2;
  d2.reserve(model.size());
  for (const auto& p : model.prototypes) d2.push_back(geo_distance_sq(Chart(p.matrix), x));
  return d2;
}

Posteriors posteriors(const Model& model, const SpdMatrix& x, ClassId y) {
  check_sample(model, x, y);
  const auto labels = model.labels();
  return mixture_posteriors(model.view(labels), prototype_distances_sq(model, x), y);
}

PosteriorReport class_posterior(const Model& model, const SpdMatrix& x) {
  if (x.dim() != model.dim) throw ValidationError("class_posterior: dimension mismatch");
  const auto labels = model.labels();
  return mixture_report(model.view(labels), prototype_distances_sq(model, x));
}

Evaluation evaluate(const Model& model, const LabeledDataset& data) {
  const auto labels = model.labels();
  const auto mix = model.view(labels);
  std::vector<Chart> charts;
  charts.reserve(model.size());
  for (const auto& p : model.prototypes) charts.emplace_back(p.matrix);

  Evaluation eval;
  eval.predicted.reserve(data.size());
  std::vector<double> d2(model.size());
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    for (std::size_t l = 0; l < charts.size(); ++l) d2[l] = geo_distance_sq(charts[l], data.points[i]);
    eval.cost += mixture_nll(mix, d2, data.labels[i]);
    const ClassId pred = mixture_report(mix, d2).predicted;
    eval.predicted.push_back(pred);
    if (pred != data.labels[i]) ++wrong;
  }
  eval.error = data.empty() ? 0.0 : static_cast<double>(wrong) / static_cast<double>(data.size());
  return eval;
}

double cost(const Model& model, const LabeledDataset& data) {
  if (data.empty()) throw ValidationError("cost: empty dataset");
  return evaluate(model, data).cost;
}

std::vector<TangentVector> cost_gradient(const Model& model, const SpdMatrix& x, ClassId y) {
  const Posteriors post = posteriors(model, x, y);
  std::vector<TangentVector> grads;
  grads.reserve(model.size());
  for (std::size_t l = 0; l < model.size(); ++l) {
    const auto& proto = model.prototypes[l];
    const double weight = update_weight(post, l, proto.label == y);
    grads.push_back(dist_sq_gradient(proto.matrix, x) * (weight / (2.0 * model.sigma_sq)));
  }
  return grads;
}

std::vector<TangentVector> update_directions(const Model& model, const SpdMatrix& x, ClassId y,
                                             double alpha) {
  const Posteriors post = posteriors(model, x, y);
  std::vector<TangentVector> dirs;
  dirs.reserve(model.size());
  for (std::size_t l = 0; l < model.size(); ++l) {
    const auto& proto = model.prototypes[l];
    const double weight = update_weight(post, l, proto.label == y);
    dirs.push_back(log_map(proto.matrix, x) * (alpha / model.sigma_sq * weight));
  }
  return dirs;
}

void sgd_step_inplace(Model& model, const SpdMatrix& x, ClassId y, double alpha) {
  check_sample(model, x, y);
  std::vector<Factor> factors;
  factors.reserve(model.size());
  for (const auto& p : model.prototypes) factors.push_back(symmetric_factor(p.matrix));
  step_with_factors(model, factors, x, y, alpha);
}

Model sgd_step(const Model& model, const SpdMatrix& x, ClassId y, double alpha) {
  Model next = model;
  sgd_step_inplace(next, x, y, alpha);
  return next;
}

// ---------------------------------------------------------------------------

double learning_rate(int t, Eigen::Index n, int xi, int epochs, double divisor,
                     double decay_base) {
  if (epochs < 1 || t < 0 || t > epochs) {
    throw ConfigError("learning_rate: epoch index " + std::to_string(t) + " outside 1.." +
                      std::to_string(epochs));
  }
  const double start = static_cast<double>(n) * static_cast<double>(xi) / divisor;
  return start * std::pow(decay_base, static_cast<double>(t) / static_cast<double>(epochs));
}

AnnealState anneal_start(const TrainConfig& config) {
  return {config.sigma_sq_opt, config.beta0, config.annealing != Annealing::none};
}

AnnealState anneal_sigma(const AnnealState& state, const TrainConfig& config) {
  if (config.annealing == Annealing::none) {
    throw ConfigError("anneal_sigma: annealing is disabled");
  }
  if (config.sigma_sq_opt <= config.anneal_stop_offset) {
    throw ConfigError("anneal_sigma: sigma_sq_opt must exceed the stop offset " +
                      std::to_string(config.anneal_stop_offset));
  }
  if (!state.active) return state;
  AnnealState next = state;
  if (config.annealing == Annealing::geometric) {
    next.beta = std::pow(state.beta, config.anneal_exponent);
  }
  next.sigma_sq = state.sigma_sq * next.beta;
  if (next.sigma_sq < config.sigma_sq_opt - config.anneal_stop_offset) next.active = false;
  return next;
}

Matrix random_symmetric(Eigen::Index n, double scale, Rng& rng) {
  Matrix a(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) a(i, j) = rng.normal(0.0, scale);
  }
  return symmetrize(a);
}

std::vector<Prototype> init_prototypes(const LabeledDataset& data, int xi, double perturb,
                                       std::uint64_t seed, const KarcherOptions& karcher) {
  if (xi < 1) throw ConfigError("init_prototypes: prototypes per class must be >= 1");
  std::vector<Prototype> out;
  out.reserve(static_cast<std::size_t>(xi * data.num_classes));
  for (ClassId k = 1; k <= data.num_classes; ++k) {
    const auto members = data.class_points(k);
    if (members.empty()) {
      throw ValidationError("init_prototypes: class " + std::to_string(k) + " has no samples");
    }
    const SpdMatrix mean = karcher_mean(members, karcher);
    const Chart chart(mean);
    for (int j = 0; j < xi; ++j) {
      if (perturb == 0.0) {
        out.push_back({mean, k});
        continue;
      }
      Rng rng = Rng::derive(seed, {kInitStream, static_cast<std::uint64_t>(k),
                                   static_cast<std::uint64_t>(j)});
      const TangentVector p = TangentVector::unchecked(random_symmetric(data.dim, perturb, rng));
      out.push_back({exp_map(chart, p), k});
    }
  }
  return out;
}

TrainResult train(const LabeledDataset& data, const TrainConfig& config,
                  const EpochCallback& on_epoch) {
  config.validate();
  data.validate();
  if (data.empty()) throw ValidationError("train: empty dataset");

  TrainResult result;
  result.model = Model::with_uniform_priors(
      init_prototypes(data, config.prototypes_per_class, config.init_perturb_scale,
                      config.rng_seed, config.karcher),
      config.sigma_sq_opt, data.num_classes);
  result.model.validate();
  Model& model = result.model;

  AnnealState anneal = anneal_start(config);
  std::vector<std::size_t> order(data.size());
  result.history.reserve(static_cast<std::size_t>(config.epochs));

  for (int t = 1; t <= config.epochs; ++t) {
    model.sigma_sq = anneal.sigma_sq;
    const double alpha = learning_rate(t, data.dim, config.prototypes_per_class, config.epochs,
                                       config.lr_numerator_divisor, config.lr_decay_base);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng = Rng::derive(config.rng_seed, {kEpochStream, static_cast<std::uint64_t>(t)});
    rng.shuffle(order);

    // Factors restart from the symmetric square root every epoch so that
    // round-off in the running products stays bounded.
    std::vector<Factor> factors;
    factors.reserve(model.size());
    for (const auto& p : model.prototypes) factors.push_back(symmetric_factor(p.matrix));
    for (std::size_t i : order) {
      try {
        step_with_factors(model, factors, data.points[i], data.labels[i], alpha);
      } catch (const Error& e) {
        throw TrainingError(e.what(), t, i);
      }
    }

    EpochRecord record{t, 0.0, 0.0, model.sigma_sq, alpha};
    if (config.track_history) {
      const Evaluation eval = evaluate(model, data);
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
