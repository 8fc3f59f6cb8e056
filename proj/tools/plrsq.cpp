// Command-line front end: synthetic data generation, training, prediction,
// evaluation, cross-validation and micro-benchmarks.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "plrsq/experiment.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace plrsq;

namespace {

struct TrainFlags {
  TrainConfig config;
  std::string annealing;  // empty: implied by the method
  double tau = kDefaultProjectionFloor;
  std::vector<double> sigma_grid;

  void attach(CLI::App* app) {
    app->add_option("--sigma_sq_opt", config.sigma_sq_opt, "mixture scale sigma^2")
        ->capture_default_str();
    app->add_option("--prototypes_per_class", config.prototypes_per_class, "xi")
        ->capture_default_str();
    app->add_option("--epochs", config.epochs, "training sweeps T")->capture_default_str();
    app->add_option("--annealing", annealing, "none | geometric | constant-beta");
    app->add_option("--beta0", config.beta0)->capture_default_str();
    app->add_option("--anneal_exponent", config.anneal_exponent)->capture_default_str();
    app->add_option("--anneal_stop_offset", config.anneal_stop_offset)->capture_default_str();
    app->add_option("--lr_numerator_divisor", config.lr_numerator_divisor)->capture_default_str();
    app->add_option("--lr_decay_base", config.lr_decay_base)->capture_default_str();
    app->add_option("--init_perturb_scale", config.init_perturb_scale)->capture_default_str();
    app->add_option("--karcher_tol", config.karcher.tol)->capture_default_str();
    app->add_option("--karcher_max_iter", config.karcher.max_iter)->capture_default_str();
    app->add_option("--tau", tau, "projection floor for rslvq-euclidean")->capture_default_str();
    app->add_option("--sigma_grid", sigma_grid,
                    "sigma^2 candidates selected on the validation split")
        ->delimiter(',');
  }

  TrainConfig resolved(Method method) const {
    TrainConfig c = config;
    if (!annealing.empty()) {
      c.annealing = annealing_from_string(annealing);
      if (method == Method::plrsq_an && c.annealing == Annealing::none) {
        throw ConfigError("plrsq-an needs annealing geometric or constant-beta");
      }
    }
    return resolve_train_config(method, c);
  }
};

json confusion_json(const ConfusionMatrix& cm) {
  json rows = json::array();
  for (ClassId t = 1; t <= cm.num_classes(); ++t) {
    json row = json::array();
    for (ClassId p = 1; p <= cm.num_classes(); ++p) row.push_back(cm.at(t, p));
    rows.push_back(row);
  }
  return rows;
}

json metrics_json(const MetricsReport& m) {
  return {{"accuracy", m.accuracy}, {"kappa", m.kappa}, {"confusion", confusion_json(m.confusion)}};
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_file_atomic(path, text);
  }
}

// ---- subcommands -----------------------------------------------------------

struct GenSynth {
  std::string name;
  std::uint64_t seed = 0;
  std::string out_dir;
  SynthSpec spec;

  void attach(CLI::App* app) {
    app->add_option("--name", name, "SynI or SynII")->required();
    app->add_option("--seed", seed)->required();
    app->add_option("--out_dir", out_dir, "writes train.spd, validation.spd, test.spd")
        ->required();
    app->add_option("--n", spec.n)->capture_default_str();
    app->add_option("--instances_per_class", spec.instances_per_class)->capture_default_str();
    app->add_option("--epsilon", spec.epsilon)->capture_default_str();
    app->add_option("--nu", spec.nu)->capture_default_str();
  }

  void run() {
    SynthSpec s = SynthSpec::make(synth_name_from_string(name), seed);
    s.n = spec.n;
    s.instances_per_class = spec.instances_per_class;
    s.epsilon = spec.epsilon;
    s.nu = spec.nu;
    const SynthSplits splits = gen_dataset(s);
    save_dataset(fs::path(out_dir) / "train.spd", splits.train);
    save_dataset(fs::path(out_dir) / "validation.spd", splits.validation);
    save_dataset(fs::path(out_dir) / "test.spd", splits.test);
    std::cout << to_string(s.name) << " seed " << seed << ": 3 x " << splits.train.size()
              << " samples written to " << out_dir << '\n';
  }
};

struct TrainCmd {
  std::string method;
  std::string train_path, validation_path, test_path, model_path, history_path;
  std::uint64_t seed = 0;
  TrainFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--method", method, "plrsq-const | plrsq-an | mdrm | rslvq-euclidean")
        ->required();
    app->add_option("--train", train_path)->required()->check(CLI::ExistingFile);
    app->add_option("--validation", validation_path)->check(CLI::ExistingFile);
    app->add_option("--test", test_path, "monitored for the test_err history column")
        ->check(CLI::ExistingFile);
    app->add_option("--model", model_path, "output model file")->required();
    app->add_option("--history", history_path, "per-epoch history output");
    app->add_option("--seed", seed)->required();
    flags.attach(app);
  }

  void run() {
    const Method m = method_from_string(method);
    TrainConfig c = flags.resolved(m);
    c.rng_seed = seed;
    const LabeledDataset train_set = load_dataset(train_path);
    std::optional<LabeledDataset> validation, test;
    if (!validation_path.empty()) validation = load_dataset(validation_path);
    if (!test_path.empty()) test = load_dataset(test_path);
    c.track_history = !history_path.empty();

    Selection sel = select_sigma(m, train_set, validation ? &*validation : nullptr, c, flags.tau,
                                 flags.sigma_grid, test ? &*test : nullptr);
    save_model(model_path, sel.fit.saved);
    if (!history_path.empty()) emit(history_to_string(sel.fit.history), history_path);
    for (const auto& [s2, acc] : sel.scores) {
      std::cout << "sigma_sq " << format_real(s2) << " validation accuracy " << acc << '\n';
    }
    std::cout << "trained " << method << " (sigma_sq_opt " << format_real(sel.sigma_sq)
              << ") -> " << model_path << '\n';
  }
};

struct PredictCmd {
  std::string model_path, data_path, out_path;

  void attach(CLI::App* app) {
    app->add_option("--model", model_path)->required()->check(CLI::ExistingFile);
    app->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
    app->add_option("--out", out_path, "default stdout");
  }

  void run() {
    const SavedModel saved = load_model(model_path);
    const LabeledDataset data = load_dataset(data_path);
    std::ostringstream os;
    os << "index predicted";
    const int c = std::visit([](const auto& m) { return m.num_classes; }, saved.model);
    for (int k = 1; k <= c; ++k) os << " p" << k;
    os << '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
      const PosteriorReport r = predict_report(saved.model, data.points[i]);
      os << i << ' ' << r.predicted;
      for (double p : r.class_probs) os << ' ' << format_real(p);
      os << '\n';
    }
    emit(os.str(), out_path);
  }
};

struct EvalCmd {
  // Saved-model mode.
  std::string model_path, data_path;
  // Protocol mode.
  std::string method, train_path, validation_path, test_path, synth;
  int repetitions = 1;
  std::uint64_t seed = 0;
  std::string history_dir;
  TrainFlags flags;
  std::string report_path;

  void attach(CLI::App* app) {
    app->add_option("--model", model_path, "evaluate a saved model on --data")
        ->check(CLI::ExistingFile);
    app->add_option("--data", data_path)->check(CLI::ExistingFile);
    app->add_option("--method", method, "train and test with explicit or generated splits");
    app->add_option("--train", train_path)->check(CLI::ExistingFile);
    app->add_option("--validation", validation_path)->check(CLI::ExistingFile);
    app->add_option("--test", test_path)->check(CLI::ExistingFile);
    app->add_option("--synth", synth, "SynI or SynII: regenerate the splits for every run");
    app->add_option("--repetitions", repetitions)->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--history_dir", history_dir, "one history file per run");
    app->add_option("--report", report_path, "JSON report, default stdout");
    flags.attach(app);
  }

  void run() {
    if (!model_path.empty()) {
      if (data_path.empty()) throw ConfigError("eval --model needs --data");
      const SavedModel saved = load_model(model_path);
      const MetricsReport m = evaluate_model(saved.model, load_dataset(data_path));
      json j = {{"method", to_string(saved.method)}, {"seed", saved.seed}};
      j.update(metrics_json(m));
      emit(j.dump(2) + "\n", report_path);
      return;
    }
    if (method.empty()) throw ConfigError("eval needs either --model or --method");

    ExperimentConfig ec;
    ec.method = method_from_string(method);
    ec.train = flags.resolved(ec.method);
    ec.tau = flags.tau;
    ec.sigma_grid = flags.sigma_grid;
    ec.repetitions = repetitions;
    ec.seed = seed;
    ec.record_history = !history_dir.empty();

    SplitSource source;
    if (!synth.empty()) {
      if (!train_path.empty() || !test_path.empty()) {
        throw ConfigError("--synth and explicit split files are mutually exclusive");
      }
      source = synthetic_source(synth_name_from_string(synth));
    } else {
      if (train_path.empty() || test_path.empty()) {
        throw ConfigError("eval --method needs --train and --test, or --synth");
      }
      Splits s{load_dataset(train_path), std::nullopt, load_dataset(test_path)};
      if (!validation_path.empty()) s.validation = load_dataset(validation_path);
      source = fixed_source(std::move(s));
    }

    const ExperimentReport report = run_experiment(ec, source);
    json runs = json::array();
    for (const auto& r : report.runs) {
      json jr = {{"run", r.run},
                 {"data_seed", r.data_seed},
                 {"train_seed", r.train_seed},
                 {"sigma_sq_opt", r.selected_sigma_sq}};
      jr.update(metrics_json(r.test));
      json scores = json::array();
      for (const auto& [s2, acc] : r.validation_scores) scores.push_back({s2, acc});
      jr["validation_scores"] = scores;
      runs.push_back(jr);
      if (!history_dir.empty()) {
        write_file_atomic(fs::path(history_dir) / ("history_run" + std::to_string(r.run) + ".txt"),
                          history_to_string(r.history));
      }
    }
    json j = {{"method", method},
              {"repetitions", repetitions},
              {"seed", seed},
              {"config", describe(ec.train)},
              {"accuracy", {{"mean", report.accuracy.mean}, {"std", report.accuracy.stddev}}},
              {"kappa", {{"mean", report.kappa.mean}, {"std", report.kappa.stddev}}},
              {"runs", runs}};
    emit(j.dump(2) + "\n", report_path);
  }
};

struct CvCmd {
  std::string method, data_path, table_path;
  int folds = 5;
  std::uint64_t seed = 0;
  std::vector<int> xi_grid, epochs_grid;
  TrainFlags flags;

  void attach(CLI::App* app) {
    app->add_option("--method", method)->required();
    app->add_option("--data", data_path)->required()->check(CLI::ExistingFile);
    app->add_option("--folds", folds)->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
    app->add_option("--xi_grid", xi_grid)->delimiter(',');
    app->add_option("--epochs_grid", epochs_grid)->delimiter(',');
    app->add_option("--table", table_path, "grid table output, default stdout");
    flags.attach(app);
  }

  void run() {
    const Method m = method_from_string(method);
    const TrainConfig base = flags.resolved(m);
    CvGrid grid;
    grid.sigma_sq = flags.sigma_grid.empty() ? std::vector<double>{base.sigma_sq_opt}
                                             : flags.sigma_grid;
    grid.prototypes_per_class =
        xi_grid.empty() ? std::vector<int>{base.prototypes_per_class} : xi_grid;
    grid.epochs = epochs_grid.empty() ? std::vector<int>{base.epochs} : epochs_grid;
    const CvResult cv = run_cv(load_dataset(data_path), m, base, flags.tau, grid, folds, seed);

    std::ostringstream os;
    os << "sigma_sq prototypes_per_class epochs mean_accuracy";
    for (int f = 0; f < folds; ++f) os << " fold" << f;
    os << '\n';
    for (const auto& row : cv.table) {
      os << format_real(row.sigma_sq) << ' ' << row.prototypes_per_class << ' ' << row.epochs
         << ' ' << format_real(row.mean_accuracy);
      for (double a : row.fold_accuracy) os << ' ' << format_real(a);
      os << '\n';
    }
    emit(os.str(), table_path);
    std::cerr << "best: sigma_sq " << format_real(cv.best.sigma_sq) << " prototypes_per_class "
              << cv.best.prototypes_per_class << " epochs " << cv.best.epochs << " accuracy "
              << cv.best.mean_accuracy << '\n';
  }
};

struct BenchCmd {
  Eigen::Index n = 10;
  int reps = 200;
  std::uint64_t seed = 1;

  void attach(CLI::App* app) {
    app->add_option("--n", n, "matrix dimension")->capture_default_str();
    app->add_option("--reps", reps)->capture_default_str();
    app->add_option("--seed", seed)->capture_default_str();
  }

  template <typename F>
  static double per_call_us(int reps, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    for (int i = 0; i < reps; ++i) f(i);
    const auto t1 = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::micro>(t1 - t0).count() / reps;
  }

  void run() {
    if (n < 1 || reps < 1) throw ConfigError("bench: n and reps must be positive");
    Rng rng(seed);
    std::vector<SpdMatrix> pts;
    for (int i = 0; i < 64; ++i) {
      const Matrix a = random_symmetric(n, 0.25, rng);
      pts.push_back(mat_exp(TangentVector::unchecked(a)));
    }
    const auto pick = [&](int i) -> const SpdMatrix& { return pts[static_cast<std::size_t>(i) % pts.size()]; };
    volatile double sink = 0.0;
    std::printf("operation               n   us/call\n");
    const auto row = [&](const char* name, double us) { std::printf("%-22s %3ld %9.2f\n", name, static_cast<long>(n), us); };
    row("sym_eig", per_call_us(reps, [&](int i) { sink = sink + sym_eig(pick(i).matrix()).values(0); }));
    row("geo_distance", per_call_us(reps, [&](int i) { sink = sink + geo_distance(pick(i), pick(i + 1)); }));
    row("log_map", per_call_us(reps, [&](int i) { sink = sink + log_map(pick(i), pick(i + 1)).matrix()(0, 0); }));
    row("exp_map", per_call_us(reps, [&](int i) {
      sink = sink + exp_map(pick(i), TangentVector::unchecked(0.1 * pick(i + 1).matrix())).matrix()(0, 0);
    }));
    row("karcher_mean(64)", per_call_us(std::max(1, reps / 50), [&](int) { sink = sink + karcher_mean(pts).matrix()(0, 0); }));

    LabeledDataset data;
    data.dim = n;
    data.num_classes = 4;
    for (std::size_t i = 0; i < pts.size(); ++i) data.add(pts[i], static_cast<ClassId>(i % 4) + 1);
    Model model = Model::with_uniform_priors(init_prototypes(data, 1, 0.01, seed), 1.0, 4);
    row("sgd_step (M=4)", per_call_us(reps, [&](int i) {
      sgd_step_inplace(model, pick(i), static_cast<ClassId>(i % 4) + 1, 1e-3);
    }));
    TrainConfig c;
    c.epochs = 1;
    c.track_history = false;
    row("train epoch (m=64)", per_call_us(std::max(1, reps / 50), [&](int) { train(data, c); }));
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PLRSQ: probabilistic learning vector quantization on SPD matrices"};
  app.require_subcommand(1);

  GenSynth gen;
  TrainCmd train_cmd;
  PredictCmd predict_cmd;
  EvalCmd eval_cmd;
  CvCmd cv_cmd;
  BenchCmd bench_cmd;
  auto* gen_app = app.add_subcommand("gen-synth", "generate SynI / SynII splits");
  auto* train_app = app.add_subcommand("train", "train a model and save it");
  auto* predict_app = app.add_subcommand("predict", "class probabilities for a dataset");
  auto* eval_app = app.add_subcommand("eval", "metrics of a saved model or a full protocol run");
  auto* cv_app = app.add_subcommand("cv", "stratified k-fold grid search");
  auto* bench_app = app.add_subcommand("bench", "time the geometry kernels and a training epoch");
  gen.attach(gen_app);
  train_cmd.attach(train_app);
  predict_cmd.attach(predict_app);
  eval_cmd.attach(eval_app);
  cv_cmd.attach(cv_app);
  bench_cmd.attach(bench_app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_code(ErrorCategory::config);
  }

  try {
    if (gen_app->parsed()) gen.run();
    if (train_app->parsed()) train_cmd.run();
    if (predict_app->parsed()) predict_cmd.run();
    if (eval_app->parsed()) eval_cmd.run();
    if (cv_app->parsed()) cv_cmd.run();
    if (bench_app->parsed()) bench_cmd.run();
  } catch (const Error& e) {
    std::cerr << "plrsq: " << to_string(e.category()) << " error: " << e.what() << '\n';
    return exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "plrsq: error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
