#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "plrsq/metrics.hpp"

using namespace plrsq;
using namespace plrsq::testing;

TEST_SUITE("kappa") {
  TEST_CASE("reference values for four classes") {
    CHECK(kappa(0.25, 4) == doctest::Approx(0.0));
    CHECK(kappa(1.0, 4) == doctest::Approx(1.0));
    CHECK(kappa(0.6925, 4) == doctest::Approx(0.59));
    CHECK(kappa(0.5, 2) == doctest::Approx(0.0));
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(kappa(0.5, 1), ConfigError);
    CHECK_THROWS_AS(kappa(1.2, 4), ValidationError);
    CHECK_THROWS_AS(kappa(-0.1, 4), ValidationError);
  }
}

TEST_SUITE("confusion") {
  TEST_CASE("counts agree with accuracy on random labels") {
    for_all(50, 1, [](Rng& rng, int) {
      const int c = 2 + static_cast<int>(rng.below(5));
      std::vector<ClassId> truth, pred;
      std::size_t hits = 0;
      for (int i = 0; i < 200; ++i) {
        truth.push_back(1 + static_cast<int>(rng.below(c)));
        pred.push_back(1 + static_cast<int>(rng.below(c)));
        if (truth.back() == pred.back()) ++hits;
      }
      const auto r = compute_metrics(truth, pred, c);
      CHECK(r.confusion.total() == 200);
      CHECK(r.confusion.trace() == hits);
      CHECK(r.accuracy == static_cast<double>(hits) / 200.0);
      CHECK(r.kappa == doctest::Approx(kappa(r.accuracy, c)));
      std::size_t rows = 0;
      for (int k = 1; k <= c; ++k) rows += r.confusion.row_sum(k);
      CHECK(rows == 200);
    });
  }

  TEST_CASE("cell layout is truth by prediction") {
    const std::vector<ClassId> truth = {1, 1, 2};
    const std::vector<ClassId> pred = {2, 1, 2};
    const auto r = compute_metrics(truth, pred, 2);
    CHECK(r.confusion.at(1, 2) == 1);
    CHECK(r.confusion.at(2, 1) == 0);
    CHECK(r.confusion.at(2, 2) == 1);
  }

  TEST_CASE("errors") {
    const std::vector<ClassId> a = {1, 2}, b = {1}, bad = {1, 3}, none;
    CHECK_THROWS_AS(compute_metrics(a, b, 2), ValidationError);
    CHECK_THROWS_AS(compute_metrics(a, bad, 2), ValidationError);
    CHECK_THROWS_AS(compute_metrics(none, none, 2), ValidationError);
  }
}

TEST_SUITE("summarize") {
  TEST_CASE("mean and sample deviation") {
    const std::vector<double> v = {1, 2, 3, 4};
    const auto s = summarize(v);
    CHECK(s.mean == doctest::Approx(2.5));
    CHECK(s.stddev == doctest::Approx(std::sqrt(5.0 / 3.0)));
    CHECK(s.count == 4);
    const std::vector<double> one = {7};
    CHECK(summarize(one).stddev == 0.0);
  }
}
