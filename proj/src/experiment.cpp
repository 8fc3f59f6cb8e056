#include "plrsq/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

namespace plrsq {

namespace {

constexpr std::uint64_t kDataStream = 0xD0;
constexpr std::uint64_t kTrainStream = 0xD1;
constexpr std::uint64_t kFoldStream = 0xF0;
constexpr std::uint64_t kCvTrainStream = 0xCF;

[[noreturn]] void rethrow_in_context(const Error& e, const std::string& context) {
  const std::string what = context + ": " + e.what();
  switch (e.category()) {
    case ErrorCategory::validation: throw ValidationError(what);
    case ErrorCategory::numerical: throw NumericalError(what);
    case ErrorCategory::domain: throw DomainError(what);
    case ErrorCategory::config: throw ConfigError(what);
    case ErrorCategory::parse: throw ParseError(what, 0);
    case ErrorCategory::io: throw IoError(what);
  }
  throw NumericalError(what);
}

bool uses_prototypes(Method m) { return m != Method::mdrm; }

template <typename T>
std::vector<T> sorted_unique(std::vector<T> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

TrainConfig resolve_train_config(Method method, TrainConfig config) {
  switch (method) {
    case Method::plrsq_const:
      if (config.annealing != Annealing::none) {
        throw ConfigError("plrsq-const trains with a fixed sigma^2; annealing must be none");
      }
      break;
    case Method::plrsq_an:
    case Method::rslvq_euclidean:
      if (config.annealing == Annealing::none) config.annealing = Annealing::geometric;
      break;
    case Method::mdrm:
      break;
  }
  return config;
}

std::string history_to_string(const std::vector<HistoryRow>& rows) {
  std::ostringstream os;
  os << "epoch cost train_err test_err sigma_sq alpha\n";
  for (const auto& r : rows) {
    os << r.epoch << ' ' << format_real(r.cost) << ' ' << format_real(r.train_err) << ' '
       << (std::isnan(r.test_err) ? std::string("nan") : format_real(r.test_err)) << ' '
       << format_real(r.sigma_sq) << ' ' << format_real(r.alpha) << '\n';
  }
  return os.str();
}

FitResult fit(Method method, const LabeledDataset& train_set, const TrainConfig& raw_config,
              double tau, const LabeledDataset* monitor) {
  const TrainConfig config = resolve_train_config(method, raw_config);
  FitResult out;
  out.saved.method = method;
  out.saved.seed = config.rng_seed;
  out.saved.config_hash = config_hash(config, tau);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  switch (method) {
    case Method::plrsq_const:
    case Method::plrsq_an: {
      auto result = train(train_set, config, [&](const EpochRecord& r, const Model& m) {
        out.history.push_back({r.epoch, r.cost, r.train_error,
                               monitor ? evaluate(m, *monitor).error : nan, r.sigma_sq, r.alpha});
      });
      out.saved.model = std::move(result.model);
      break;
    }
    case Method::rslvq_euclidean: {
      auto result = euclidean_rslvq_train(
          train_set, config, tau, [&](const EpochRecord& r, const EuclideanRslvqModel& m) {
            out.history.push_back({r.epoch, r.cost, r.train_error,
                                   monitor ? rslvq_evaluate(m, *monitor).error : nan, r.sigma_sq,
                                   r.alpha});
          });
      out.saved.model = std::move(result.model);
      break;
    }
    case Method::mdrm:
      out.saved.model = mdrm_train(train_set, config.karcher);
      break;
  }
  return out;
}

PosteriorReport predict_report(const AnyModel& model, const SpdMatrix& x) {
  return std::visit(
      [&](const auto& m) -> PosteriorReport {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, Model>) {
          return predict(m, x);
        } else if constexpr (std::is_same_v<T, EuclideanRslvqModel>) {
          return rslvq_predict(m, x);
        } else {
          PosteriorReport r;
          r.predicted = mdrm_predict(m, x);
          r.class_probs.assign(static_cast<std::size_t>(m.num_classes), 0.0);
          r.class_probs[static_cast<std::size_t>(r.predicted - 1)] = 1.0;
          return r;
        }
      },
      model);
}

std::vector<ClassId> predict_labels(const AnyModel& model, const LabeledDataset& data) {
  std::vector<ClassId> out;
  out.reserve(data.size());
  if (const auto* m = std::get_if<MdrmModel>(&model)) {
    for (const auto& x : data.points) out.push_back(mdrm_predict(*m, x));
    return out;
  }
  for (const auto& x : data.points) out.push_back(predict_report(model, x).predicted);
  return out;
}

MetricsReport evaluate_model(const AnyModel& model, const LabeledDataset& data) {
  const int c = std::visit([](const auto& m) { return m.num_classes; }, model);
  if (data.num_classes != c) {
    throw ValidationError("evaluate: dataset has " + std::to_string(data.num_classes) +
                          " classes, model has " + std::to_string(c));
  }
  const auto predicted = predict_labels(model, data);
  return compute_metrics(data.labels, predicted, c);
}

Selection select_sigma(Method method, const LabeledDataset& train_set,
                       const LabeledDataset* validation, const TrainConfig& config, double tau,
                       const std::vector<double>& grid, const LabeledDataset* monitor) {
  const std::vector<double> values =
      grid.empty() ? std::vector<double>{config.sigma_sq_opt} : sorted_unique(grid);
  if (values.size() > 1 && !validation) {
    throw ConfigError("selecting sigma^2 from a grid needs a validation split");
  }
  Selection best;
  double best_acc = -1.0;
  TrainConfig tc = config;
  for (double s2 : values) {
    tc.sigma_sq_opt = s2;
    FitResult f = fit(method, train_set, tc, tau, monitor);
    double acc = 0.0;
    if (validation) {
      acc = evaluate_model(f.saved.model, *validation).accuracy;
      best.scores.emplace_back(s2, acc);
    }
    if (acc > best_acc) {
      best_acc = acc;
      best.sigma_sq = s2;
      best.fit = std::move(f);
    }
  }
  return best;
}

void ExperimentConfig::validate() const {
  if (repetitions < 1) throw ConfigError("experiment: repetitions must be at least 1");
  if (!(tau > 0.0)) throw ConfigError("experiment: tau must be positive");
  for (double s : sigma_grid) {
    if (!(s > 0.0)) throw ConfigError("experiment: sigma grid values must be positive");
  }
  resolve_train_config(method, train).validate();
}

SplitSource synthetic_source(SynthName name) {
  return [name](int, std::uint64_t data_seed) {
    SynthSplits s = gen_dataset(SynthSpec::make(name, data_seed));
    return Splits{std::move(s.train), std::move(s.validation), std::move(s.test)};
  };
}

SplitSource fixed_source(Splits splits) {
  return [splits = std::move(splits)](int, std::uint64_t) { return splits; };
}

RunResult run_once(const ExperimentConfig& config, const Splits& splits, int run,
                   std::uint64_t data_seed) {
  config.validate();
  RunResult r;
  r.run = run;
  r.data_seed = data_seed;
  r.train_seed = config.train.rng_seed;
  const LabeledDataset* monitor = config.record_history ? &splits.test : nullptr;
  TrainConfig tc = config.train;
  tc.track_history = config.record_history;

  if (!uses_prototypes(config.method)) {
    const LabeledDataset pooled = splits.validation
                                      ? LabeledDataset::concat(splits.train, *splits.validation)
                                      : splits.train;
    FitResult f = fit(config.method, pooled, tc, config.tau, monitor);
    r.model = std::move(f.saved);
    r.test = evaluate_model(r.model.model, splits.test);
    return r;
  }

  Selection sel = select_sigma(config.method, splits.train,
                               splits.validation ? &*splits.validation : nullptr, tc, config.tau,
                               config.sigma_grid, monitor);
  r.selected_sigma_sq = sel.sigma_sq;
  r.validation_scores = std::move(sel.scores);
  r.model = std::move(sel.fit.saved);
  r.history = std::move(sel.fit.history);
  r.test = evaluate_model(r.model.model, splits.test);
  return r;
}

ExperimentReport run_experiment(const ExperimentConfig& config, const SplitSource& source) {
  config.validate();
  ExperimentReport report;
  for (int run = 0; run < config.repetitions; ++run) {
    const auto k = static_cast<std::uint64_t>(run);
    ExperimentConfig rc = config;
    const std::uint64_t data_seed = Rng::derive_seed(config.seed, {kDataStream, k});
    rc.train.rng_seed = Rng::derive_seed(config.seed, {kTrainStream, k});
    try {
      report.runs.push_back(run_once(rc, source(run, data_seed), run, data_seed));
    } catch (const Error& e) {
      rethrow_in_context(e, "run " + std::to_string(run));
    }
  }
  std::vector<double> acc, kap;
  for (const auto& r : report.runs) {
    acc.push_back(r.test.accuracy);
    kap.push_back(r.test.kappa);
  }
  report.accuracy = summarize(acc);
  report.kappa = summarize(kap);
  return report;
}

// ---- cross-validation ------------------------------------------------------

std::vector<int> stratified_folds(const LabeledDataset& data, int folds, std::uint64_t seed) {
  if (folds < 2) throw ConfigError("cross-validation needs at least two folds");
  data.validate();
  const auto counts = data.class_counts();
  for (std::size_t k = 0; k < counts.size(); ++k) {
    if (counts[k] < static_cast<std::size_t>(folds)) {
      throw ValidationError("class " + std::to_string(k + 1) + " has " +
                            std::to_string(counts[k]) + " samples, fewer than " +
                            std::to_string(folds) + " folds");
    }
  }
  std::vector<int> fold(data.size(), -1);
  std::size_t dealt = 0;
  for (ClassId k = 1; k <= data.num_classes; ++k) {
    std::vector<std::size_t> members;
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (data.labels[i] == k) members.push_back(i);
    }
    Rng rng = Rng::derive(seed, {kFoldStream, static_cast<std::uint64_t>(k)});
    rng.shuffle(members);
    // The deal continues across classes so overall fold sizes also stay
    // within one of each other.
    for (std::size_t i : members) fold[i] = static_cast<int>(dealt++ % static_cast<std::size_t>(folds));
  }
  return fold;
}

CvResult run_cv(const LabeledDataset& data, Method method, const TrainConfig& base, double tau,
                const CvGrid& grid, int folds, std::uint64_t seed) {
  CvGrid g = grid;
  if (!uses_prototypes(method)) {
    g = {{base.sigma_sq_opt}, {base.prototypes_per_class}, {base.epochs}};
  }
  if (g.sigma_sq.empty() || g.prototypes_per_class.empty() || g.epochs.empty()) {
    throw ConfigError("cross-validation grid must be nonempty in every axis");
  }
  g.sigma_sq = sorted_unique(g.sigma_sq);
  g.prototypes_per_class = sorted_unique(g.prototypes_per_class);
  g.epochs = sorted_unique(g.epochs);

  const auto fold = stratified_folds(data, folds, seed);
  std::vector<LabeledDataset> fit_sets, held_out;
  for (int f = 0; f < folds; ++f) {
    std::vector<std::size_t> in, out;
    for (std::size_t i = 0; i < data.size(); ++i) (fold[i] == f ? out : in).push_back(i);
    fit_sets.push_back(data.subset(in));
    held_out.push_back(data.subset(out));
  }

  CvResult result;
  double best = -1.0;
  for (double s2 : g.sigma_sq) {
    for (int xi : g.prototypes_per_class) {
      for (int epochs : g.epochs) {
        CvRow row{s2, xi, epochs, {}, 0.0};
        TrainConfig tc = base;
        tc.sigma_sq_opt = s2;
        tc.prototypes_per_class = xi;
        tc.epochs = epochs;
        tc.track_history = false;
        for (int f = 0; f < folds; ++f) {
          tc.rng_seed = Rng::derive_seed(seed, {kCvTrainStream, static_cast<std::uint64_t>(f)});
          try {
            const FitResult fr = fit(method, fit_sets[f], tc, tau);
            row.fold_accuracy.push_back(evaluate_model(fr.saved.model, held_out[f]).accuracy);
          } catch (const Error& e) {
            rethrow_in_context(e, "fold " + std::to_string(f));
          }
        }
        row.mean_accuracy =
            std::accumulate(row.fold_accuracy.begin(), row.fold_accuracy.end(), 0.0) /
            static_cast<double>(folds);
        if (row.mean_accuracy > best) {
          best = row.mean_accuracy;
          result.best = row;
        }
        result.table.push_back(std::move(row));
      }
    }
  }
  return result;
}

}  // namespace plrsq
