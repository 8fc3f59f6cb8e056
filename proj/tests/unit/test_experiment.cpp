#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "plrsq/experiment.hpp"

using namespace plrsq;
using namespace plrsq::testing;

namespace {

Splits small_splits(std::uint64_t seed, SynthName name = SynthName::syn1) {
  SynthSpec spec = SynthSpec::make(name, seed);
  spec.n = 4;
  spec.instances_per_class = 10;
  auto s = gen_dataset(spec);
  return {std::move(s.train), std::move(s.validation), std::move(s.test)};
}

TrainConfig quick_config() {
  TrainConfig c;
  c.epochs = 4;
  c.sigma_sq_opt = 1.0;
  return c;
}

}  // namespace

TEST_SUITE("config resolution") {
  TEST_CASE("method implies annealing") {
    TrainConfig c;
    CHECK(resolve_train_config(Method::plrsq_const, c).annealing == Annealing::none);
    CHECK(resolve_train_config(Method::plrsq_an, c).annealing == Annealing::geometric);
    CHECK(resolve_train_config(Method::rslvq_euclidean, c).annealing == Annealing::geometric);
    c.annealing = Annealing::constant_beta;
    CHECK(resolve_train_config(Method::plrsq_an, c).annealing == Annealing::constant_beta);
    CHECK_THROWS_AS(resolve_train_config(Method::plrsq_const, c), ConfigError);
  }
}

TEST_SUITE("stratified_folds") {
  TEST_CASE("balanced and deterministic") {
    for_all(20, 1, [](Rng& rng, int) {
      LabeledDataset d;
      d.dim = 2;
      d.num_classes = 3;
      for (int k = 1; k <= 3; ++k) {
        const int count = 5 + static_cast<int>(rng.below(20));
        for (int i = 0; i < count; ++i) d.add(SpdMatrix::identity(2), k);
      }
      const int folds = 2 + static_cast<int>(rng.below(4));
      const std::uint64_t seed = rng.next_u64();
      const auto f = stratified_folds(d, folds, seed);
      CHECK(f == stratified_folds(d, folds, seed));
      for (int k = 1; k <= 3; ++k) {
        std::vector<int> per_fold(static_cast<std::size_t>(folds), 0);
        for (std::size_t i = 0; i < d.size(); ++i) {
          if (d.labels[i] == k) ++per_fold[static_cast<std::size_t>(f[i])];
        }
        const auto [lo, hi] = std::minmax_element(per_fold.begin(), per_fold.end());
        CHECK(*hi - *lo <= 1);
      }
    });
  }

  TEST_CASE("errors") {
    LabeledDataset d;
    d.dim = 2;
    d.num_classes = 2;
    for (int i = 0; i < 5; ++i) d.add(SpdMatrix::identity(2), 1);
    d.add(SpdMatrix::identity(2), 2);
    CHECK_THROWS_WITH_AS(stratified_folds(d, 3, 0), doctest::Contains("class 2"), ValidationError);
    CHECK_THROWS_AS(stratified_folds(d, 1, 0), ConfigError);
  }
}

TEST_SUITE("selection") {
  TEST_CASE("a single grid point needs no validation split") {
    const Splits s = small_splits(1);
    const auto sel = select_sigma(Method::plrsq_const, s.train, nullptr, quick_config(), 1e-4, {2.0});
    CHECK(sel.sigma_sq == 2.0);
    CHECK(std::get<Model>(sel.fit.saved.model).sigma_sq == 2.0);
    CHECK_THROWS_AS(
        select_sigma(Method::plrsq_const, s.train, nullptr, quick_config(), 1e-4, {1.0, 2.0}),
        ConfigError);
  }

  TEST_CASE("ties go to the smallest sigma") {
    // Well-separated classes: every grid point classifies the validation
    // split perfectly.
    LabeledDataset train, val;
    train.dim = val.dim = 2;
    train.num_classes = val.num_classes = 2;
    Rng rng(2);
    const SpdMatrix c1 = SpdMatrix::identity(2);
    Matrix far = Matrix::Identity(2, 2) * std::exp(6.0);
    const SpdMatrix c2(far);
    for (int i = 0; i < 6; ++i) {
      train.add(exp_map(c1, random_tangent(2, rng, 0.05)), 1);
      train.add(exp_map(c2, random_tangent(2, rng, 0.05)), 2);
      val.add(exp_map(c1, random_tangent(2, rng, 0.05)), 1);
      val.add(exp_map(c2, random_tangent(2, rng, 0.05)), 2);
    }
    const auto sel =
        select_sigma(Method::plrsq_const, train, &val, quick_config(), 1e-4, {3.0, 0.7, 1.5, 0.7});
    CHECK(sel.sigma_sq == 0.7);
    REQUIRE(sel.scores.size() == 3);
    for (const auto& [sigma, acc] : sel.scores) CHECK(acc == 1.0);
    CHECK(sel.scores.front().first == 0.7);
  }

  TEST_CASE("history has one row per epoch with a monitor column") {
    const Splits s = small_splits(3);
    const auto r = fit(Method::plrsq_an, s.train, quick_config(), 1e-4, &s.test);
    REQUIRE(r.history.size() == 4);
    CHECK(!std::isnan(r.history.back().test_err));
    const auto bare = fit(Method::rslvq_euclidean, s.train, quick_config(), 1e-4);
    CHECK(std::isnan(bare.history.front().test_err));
    const std::string text = history_to_string(r.history);
    CHECK(text.rfind("epoch cost train_err test_err sigma_sq alpha\n", 0) == 0);
    CHECK(std::count(text.begin(), text.end(), '\n') == 5);
  }
}

TEST_SUITE("experiments") {
  TEST_CASE("reruns are bit-identical") {
    ExperimentConfig c;
    c.method = Method::plrsq_an;
    c.train = quick_config();
    c.sigma_grid = {0.8, 1.6};
    c.repetitions = 2;
    c.seed = 17;
    const auto source = [](int, std::uint64_t seed) { return small_splits(seed); };
    const auto a = run_experiment(c, source);
    const auto b = run_experiment(c, source);
    REQUIRE(a.runs.size() == 2);
    for (std::size_t r = 0; r < 2; ++r) {
      CHECK(a.runs[r].test.accuracy == b.runs[r].test.accuracy);
      CHECK(model_to_string(a.runs[r].model) == model_to_string(b.runs[r].model));
      CHECK(a.runs[r].validation_scores.size() == 2);
    }
    CHECK(a.runs[0].data_seed != a.runs[1].data_seed);
    CHECK(a.accuracy.count == 2);
  }

  TEST_CASE("MDRM uses train and validation together") {
    const Splits s = small_splits(4);
    ExperimentConfig c;
    c.method = Method::mdrm;
    const auto r = run_once(c, s);
    const auto pooled = mdrm_train(LabeledDataset::concat(s.train, *s.validation));
    const auto& m = std::get<MdrmModel>(r.model.model);
    for (int k = 0; k < 4; ++k) CHECK(m.class_means[k] == pooled.class_means[k]);
  }

  TEST_CASE("errors carry the run index and category") {
    ExperimentConfig c;
    c.method = Method::plrsq_const;
    c.train = quick_config();
    c.repetitions = 1;
    const auto broken = [](int, std::uint64_t) {
      Splits s = small_splits(1);
      s.test.num_classes = 3;
      return s;
    };
    CHECK_THROWS_WITH_AS(run_experiment(c, broken), doctest::Contains("run 0"), ValidationError);
    c.repetitions = 0;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
}

TEST_SUITE("cross-validation") {
  TEST_CASE("table order, best row and determinism") {
    const Splits s = small_splits(5);
    CvGrid grid{{1.0, 0.5}, {1}, {2, 3}};
    const auto a = run_cv(s.train, Method::plrsq_const, quick_config(), 1e-4, grid, 3, 9);
    const auto b = run_cv(s.train, Method::plrsq_const, quick_config(), 1e-4, grid, 3, 9);
    REQUIRE(a.table.size() == 4);
    CHECK(a.table[0].sigma_sq == 0.5);
    CHECK(a.table[0].epochs == 2);
    CHECK(a.table[3].sigma_sq == 1.0);
    double best = 0;
    for (const auto& row : a.table) {
      CHECK(row.fold_accuracy.size() == 3);
      best = std::max(best, row.mean_accuracy);
    }
    CHECK(a.best.mean_accuracy == best);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a.table[i].fold_accuracy == b.table[i].fold_accuracy);
  }

  TEST_CASE("MDRM collapses the grid") {
    const Splits s = small_splits(6);
    CvGrid grid{{1.0, 0.5}, {1, 2}, {2}};
    CHECK(run_cv(s.train, Method::mdrm, quick_config(), 1e-4, grid, 2, 1).table.size() == 1);
  }
}
