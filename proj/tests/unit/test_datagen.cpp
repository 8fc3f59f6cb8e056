#include <doctest.h>

#include <cmath>
#include <set>

#include "generators.hpp"
#include "plrsq/datagen.hpp"

using namespace plrsq;
using namespace plrsq::testing;

TEST_SUITE("eigen_profile") {
  TEST_CASE("profile 1 at n = 10") {
    // raw values 12..3 sum to 75, so eta_1 = 12 * 10 / 75.
    const auto p = eigen_profile(1, 10);
    CHECK(p.values(0) == doctest::Approx(1.6));
    CHECK(p.values(9) == doctest::Approx(0.4));
  }

  TEST_CASE("profile 4 keeps the ratio of first to last") {
    const auto p = eigen_profile(4, 10);
    CHECK(p.values(0) / p.values(9) == doctest::Approx(10.0));
  }

  TEST_CASE("every profile has mean one and is positive") {
    for (int id = 1; id <= 4; ++id) {
      for (Eigen::Index n : kDims) {
        const auto p = eigen_profile(id, n);
        CHECK(p.values.mean() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(p.values.minCoeff() > 0.0);
      }
    }
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(eigen_profile(5, 10), ConfigError);
    CHECK_THROWS_AS(eigen_profile(1, 0), ConfigError);
    CHECK_THROWS_AS(eigen_profile(1, 13), ConfigError);
  }
}

TEST_SUITE("bases") {
  TEST_CASE("orthonormal and seed-determined") {
    for (Eigen::Index n : kDims) {
      for (std::uint64_t seed = 0; seed < 25; ++seed) {
        const Matrix q = random_orthonormal_basis(n, seed).columns;
        CHECK((q.transpose() * q - Matrix::Identity(n, n)).norm() <= 1e-12);
        CHECK(q == random_orthonormal_basis(n, seed).columns);
      }
    }
  }

  TEST_CASE("degenerate columns are redrawn") {
    Matrix a = Matrix::Identity(3, 3);
    a.col(1) = a.col(0);
    int redraws = 0;
    const auto b = gram_schmidt(a, [&](Eigen::Index j) -> Vector {
      ++redraws;
      return Matrix::Identity(3, 3).col(j);
    });
    CHECK(redraws == 1);
    CHECK((b.columns - Matrix::Identity(3, 3)).norm() <= 1e-15);
  }
}

TEST_SUITE("sample_instance") {
  TEST_CASE("no noise reproduces the profile on the basis") {
    Rng rng(1);
    const auto p = eigen_profile(2, 5);
    const auto b = random_orthonormal_basis(5, rng);
    const SpdMatrix x = sample_instance(p, b, 0.0, 0.0, rng);
    const Matrix oracle = b.columns * p.values.asDiagonal() * b.columns.transpose();
    CHECK(rel_diff(x.matrix(), oracle) <= 1e-12);
  }

  TEST_CASE("spectrum stays within epsilon of the profile") {
    const auto p = eigen_profile(1, 10);
    for_all(100, 2, [&p](Rng& rng, int) {
      const auto b = random_orthonormal_basis(10, rng);
      const Vector eig = sym_eigenvalues(sample_instance(p, b, 0.1, 0.3, rng).matrix());
      // Both sorted ascending.
      const Vector eta = p.values.reverse();
      for (Eigen::Index j = 0; j < 10; ++j) CHECK(std::abs(eig(j) - eta(j)) <= 0.1 + 1e-10);
    });
  }

  TEST_CASE("errors") {
    Rng rng(3);
    const auto p = eigen_profile(1, 10);
    const auto b = random_orthonormal_basis(10, rng);
    CHECK_THROWS_AS(sample_instance(p, b, 0.4, 0.3, rng), ConfigError);
    CHECK_THROWS_AS(sample_instance(p, b, -0.1, 0.3, rng), ConfigError);
    CHECK_THROWS_AS(sample_instance(p, b, 0.1, -1.0, rng), ConfigError);
    CHECK_THROWS_AS(sample_instance(p, random_orthonormal_basis(5, rng), 0.1, 0.3, rng),
                    ValidationError);
  }
}

TEST_SUITE("gen_dataset") {
  TEST_CASE("sizes, balance and labels") {
    for (SynthName name : {SynthName::syn1, SynthName::syn2}) {
      const auto s = gen_dataset(SynthSpec::make(name, 5));
      for (const LabeledDataset* d : {&s.train, &s.validation, &s.test}) {
        CHECK(d->size() == 1000);
        CHECK(d->dim == 10);
        CHECK(d->class_counts() == std::vector<std::size_t>(4, 250));
        CHECK_NOTHROW(d->validate());
      }
    }
  }

  TEST_CASE("bit-identical regeneration and distinct seeds") {
    SynthSpec spec = SynthSpec::make(SynthName::syn1, 11);
    spec.instances_per_class = 5;
    const auto a = gen_dataset(spec);
    const auto b = gen_dataset(spec);
    for (std::size_t i = 0; i < a.test.size(); ++i) CHECK(a.test.points[i] == b.test.points[i]);

    std::set<double> first_entries;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      spec.seed = seed;
      const auto s = gen_dataset(spec);
      for (const auto& x : s.train.points) first_entries.insert(x.matrix()(0, 0));
      for (const auto& x : s.test.points) first_entries.insert(x.matrix()(0, 0));
    }
    CHECK(first_entries.size() == 20u * 2u * 20u);
  }

  TEST_CASE("SynI classes are tighter than the gaps between them") {
    SynthSpec spec = SynthSpec::make(SynthName::syn1, 2);
    spec.instances_per_class = 20;
    const auto s = gen_dataset(spec);
    double intra = 0, inter = 0;
    int n_intra = 0, n_inter = 0;
    for (std::size_t i = 0; i < s.train.size(); ++i) {
      for (std::size_t j = i + 1; j < s.train.size(); ++j) {
        const double d = geo_distance(s.train.points[i], s.train.points[j]);
        if (s.train.labels[i] == s.train.labels[j]) {
          intra += d;
          ++n_intra;
        } else {
          inter += d;
          ++n_inter;
        }
      }
    }
    CHECK(intra / n_intra < inter / n_inter);
  }

  TEST_CASE("class pairs") {
    CHECK(SynthSpec::make(SynthName::syn1, 0).class_pairs ==
          std::vector<std::pair<int, int>>{{1, 1}, {1, 2}, {2, 1}, {2, 2}});
    CHECK(SynthSpec::make(SynthName::syn2, 0).class_pairs ==
          std::vector<std::pair<int, int>>{{1, 1}, {2, 1}, {3, 1}, {4, 1}});
    CHECK(synth_name_from_string("SynII") == SynthName::syn2);
    CHECK_THROWS_AS(synth_name_from_string("SynIII"), ConfigError);
    SynthSpec bad = SynthSpec::make(SynthName::syn1, 0);
    bad.instances_per_class = 0;
    CHECK_THROWS_AS(gen_dataset(bad), ConfigError);
  }
}

TEST_SUITE("covariance_from_trial") {
  TEST_CASE("single channel variance") {
    Matrix e(1, 4);
    e << 1, -1, 1, -1;
    CHECK(covariance_from_trial(e).matrix()(0, 0) == doctest::Approx(4.0 / 3.0));
  }

  TEST_CASE("centering removes channel offsets") {
    Rng rng(4);
    Matrix e = random_matrix(3, 50, rng);
    Matrix shifted = e;
    shifted.row(1).array() += 7.0;
    CHECK(rel_diff(covariance_from_trial(shifted).matrix(), covariance_from_trial(e).matrix()) <=
          1e-12);
  }

  TEST_CASE("orthogonal unit rows give a scaled identity") {
    // Rows of a centered Hadamard-like pattern, orthogonal with equal norm.
    Matrix e(2, 4);
    e << 1, -1, 1, -1,
         1, 1, -1, -1;
    CHECK(rel_diff(covariance_from_trial(e).matrix(), (4.0 / 3.0) * Matrix::Identity(2, 2)) <=
          1e-15);
  }

  TEST_CASE("rank deficiency and short trials are rejected") {
    Matrix e(3, 2);
    e << 1, 2, 3, 4, 5, 6;
    CHECK_THROWS_AS(covariance_from_trial(e), DomainError);
    CHECK_THROWS_AS(covariance_from_trial(Matrix::Ones(2, 1)), ValidationError);
  }
}
