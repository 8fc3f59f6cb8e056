#pragma once

// Experiment orchestration: fitting any of the four methods, hold-out
// selection of sigma^2 on a validation split, repeated runs with derived
// seeds, and stratified k-fold grid search.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "plrsq/datagen.hpp"
#include "plrsq/io.hpp"
#include "plrsq/metrics.hpp"

namespace plrsq {

/// Sets the annealing mode implied by the method: plrsq-const trains with a
/// fixed sigma^2, plrsq-an and rslvq-euclidean anneal (geometric unless
/// constant_beta was requested). Throws ConfigError on a contradiction.
TrainConfig resolve_train_config(Method method, TrainConfig config);

struct HistoryRow {
  int epoch = 0;
  double cost = 0.0;
  double train_err = 0.0;
  double test_err = 0.0;  // NaN when no monitor set was given
  double sigma_sq = 0.0;
  double alpha = 0.0;
};

/// Header `epoch cost train_err test_err sigma_sq alpha`, one row per epoch.
std::string history_to_string(const std::vector<HistoryRow>& rows);

struct FitResult {
  SavedModel saved;
  std::vector<HistoryRow> history;
};

/// Trains `method` on `train`. When `monitor` is given, the test_err column
/// of the history is its error after every epoch. `config` is resolved with
/// resolve_train_config first.
FitResult fit(Method method, const LabeledDataset& train, const TrainConfig& config, double tau,
              const LabeledDataset* monitor = nullptr);

struct Selection {
  FitResult fit;
  double sigma_sq = 0.0;
  /// (sigma^2, validation accuracy) per grid point; empty without validation.
  std::vector<std::pair<double, double>> scores;
};

/// Fits one model per sigma^2 in `grid` (config.sigma_sq_opt if empty) and
/// keeps the one with the best validation accuracy, ties to the smaller
/// sigma^2. A grid of more than one value needs `validation`.
Selection select_sigma(Method method, const LabeledDataset& train,
                       const LabeledDataset* validation, const TrainConfig& config, double tau,
                       const std::vector<double>& grid, const LabeledDataset* monitor = nullptr);

/// Class posteriors for prototype models; MDRM reports a one-hot vector and
/// no prototype probabilities.
PosteriorReport predict_report(const AnyModel& model, const SpdMatrix& x);
std::vector<ClassId> predict_labels(const AnyModel& model, const LabeledDataset& data);
MetricsReport evaluate_model(const AnyModel& model, const LabeledDataset& data);

struct Splits {
  LabeledDataset train;
  std::optional<LabeledDataset> validation;
  LabeledDataset test;
};

struct ExperimentConfig {
  Method method = Method::plrsq_an;
  TrainConfig train;
  double tau = kDefaultProjectionFloor;
  /// Candidate sigma^2 values chosen on the validation split. Empty means
  /// train.sigma_sq_opt alone.
  std::vector<double> sigma_grid;
  int repetitions = 1;
  std::uint64_t seed = 0;
  bool record_history = false;

  void validate() const;
};

struct RunResult {
  int run = 0;
  std::uint64_t data_seed = 0;
  std::uint64_t train_seed = 0;
  double selected_sigma_sq = 0.0;
  /// (sigma^2, validation accuracy) per grid point; empty without selection.
  std::vector<std::pair<double, double>> validation_scores;
  MetricsReport test;
  std::vector<HistoryRow> history;
  SavedModel model;
};

struct ExperimentReport {
  std::vector<RunResult> runs;  // sorted by run index
  Summary accuracy;
  Summary kappa;
};

/// Supplies the splits of run `run`; `data_seed` is derived from the
/// experiment seed and the run index.
using SplitSource = std::function<Splits(int run, std::uint64_t data_seed)>;

SplitSource synthetic_source(SynthName name);
SplitSource fixed_source(Splits splits);

/// One run: selection on validation (prototype methods), MDRM fitted on
/// train + validation, metrics on test.
RunResult run_once(const ExperimentConfig& config, const Splits& splits, int run = 0,
                   std::uint64_t data_seed = 0);

/// Runs config.repetitions runs. Errors are rethrown with the run index.
ExperimentReport run_experiment(const ExperimentConfig& config, const SplitSource& source);

// ---- cross-validation ------------------------------------------------------

struct CvGrid {
  std::vector<double> sigma_sq;
  std::vector<int> prototypes_per_class;
  std::vector<int> epochs;
};

struct CvRow {
  double sigma_sq = 0.0;
  int prototypes_per_class = 0;
  int epochs = 0;
  std::vector<double> fold_accuracy;
  double mean_accuracy = 0.0;
};

struct CvResult {
  std::vector<CvRow> table;  // ascending (sigma^2, xi, epochs)
  CvRow best;
};

/// Fold index of every sample. Each class is shuffled and dealt round robin,
/// so per-fold class counts differ by at most one. Throws ValidationError if
/// a class has fewer samples than folds.
std::vector<int> stratified_folds(const LabeledDataset& data, int folds, std::uint64_t seed);

/// Mean validation accuracy per grid point over `folds` stratified folds.
/// Best by accuracy; ties go to smaller sigma^2, then smaller xi, then fewer
/// epochs. For MDRM the grid is ignored and a single row is produced.
CvResult run_cv(const LabeledDataset& data, Method method, const TrainConfig& base, double tau,
                const CvGrid& grid, int folds, std::uint64_t seed);

}  // namespace plrsq
