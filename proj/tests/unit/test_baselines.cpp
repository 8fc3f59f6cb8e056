#include <doctest.h>

#include <cmath>

#include "generators.hpp"
#include "plrsq/baselines.hpp"

using namespace plrsq;
using namespace plrsq::testing;

namespace {

SpdMatrix diag2(double a, double b) {
  Matrix m = Matrix::Zero(2, 2);
  m(0, 0) = a;
  m(1, 1) = b;
  return SpdMatrix(m);
}

LabeledDataset random_labeled(Eigen::Index n, int classes, int per_class, Rng& rng) {
  LabeledDataset d;
  d.dim = n;
  d.num_classes = classes;
  for (int i = 0; i < per_class; ++i) {
    for (int k = 1; k <= classes; ++k) d.add(random_spd(n, rng), k);
  }
  return d;
}

}  // namespace

TEST_SUITE("mdrm") {
  TEST_CASE("one sample per class reproduces the samples") {
    Rng rng(1);
    const LabeledDataset d = random_labeled(3, 3, 1, rng);
    const MdrmModel m = mdrm_train(d);
    for (int k = 0; k < 3; ++k) CHECK(m.class_means[k] == d.points[k]);
    for (int k = 0; k < 3; ++k) CHECK(mdrm_predict(m, d.points[k]) == k + 1);
  }

  TEST_CASE("two samples give the geodesic midpoint") {
    LabeledDataset d;
    d.dim = 2;
    d.num_classes = 1;
    d.add(diag2(1, 4), 1);
    d.add(diag2(4, 1), 1);
    const MdrmModel m = mdrm_train(d);
    CHECK(rel_diff(m.class_means[0].matrix(), diag2(2, 2).matrix()) <= 1e-6);
  }

  TEST_CASE("equidistant means tie to the lowest class") {
    MdrmModel m;
    m.dim = 2;
    m.num_classes = 2;
    m.class_means = {diag2(1, std::exp(1.0)), diag2(std::exp(1.0), 1)};
    CHECK(mdrm_predict(m, SpdMatrix::identity(2)) == 1);
    m.class_means = {diag2(std::exp(1.0), 1), diag2(1, std::exp(1.0))};
    CHECK(mdrm_predict(m, SpdMatrix::identity(2)) == 1);
  }

  TEST_CASE("prediction is the brute-force nearest mean") {
    for_all(100, 2, [](Rng& rng, int c) {
      const Eigen::Index n = kDims[static_cast<std::size_t>(c) % kDims.size()];
      MdrmModel m;
      m.dim = n;
      m.num_classes = 4;
      for (int k = 0; k < 4; ++k) m.class_means.push_back(random_spd(n, rng));
      const SpdMatrix x = random_spd(n, rng);
      int best = 0;
      for (int k = 1; k < 4; ++k) {
        if (geo_distance(x, m.class_means[k]) < geo_distance(x, m.class_means[best])) best = k;
      }
      CHECK(mdrm_predict(m, x) == best + 1);
    });
  }

  TEST_CASE("predictions are invariant under congruence") {
    for_all(20, 3, [](Rng& rng, int) {
      const LabeledDataset d = random_labeled(3, 3, 4, rng);
      const Matrix a = random_invertible(3, rng);
      LabeledDataset moved;
      moved.dim = d.dim;
      moved.num_classes = d.num_classes;
      for (std::size_t i = 0; i < d.size(); ++i) {
        moved.add(SpdMatrix(symmetrize(a * d.points[i].matrix() * a.transpose())), d.labels[i]);
      }
      const MdrmModel m1 = mdrm_train(d), m2 = mdrm_train(moved);
      for (int t = 0; t < 10; ++t) {
        const SpdMatrix x = random_spd(3, rng);
        const SpdMatrix ax(symmetrize(a * x.matrix() * a.transpose()));
        CHECK(mdrm_predict(m1, x) == mdrm_predict(m2, ax));
      }
    });
  }

  TEST_CASE("errors") {
    LabeledDataset d;
    d.dim = 2;
    d.num_classes = 2;
    d.add(SpdMatrix::identity(2), 1);
    CHECK_THROWS_AS(mdrm_train(d), ValidationError);
    d.add(SpdMatrix::identity(2), 2);
    CHECK_THROWS_AS(mdrm_predict(mdrm_train(d), SpdMatrix::identity(3)), ValidationError);
  }
}

TEST_SUITE("project_to_spd") {
  TEST_CASE("negative eigenvalues are raised to tau") {
    Matrix w = Matrix::Zero(2, 2);
    w(0, 0) = 1.0;
    w(1, 1) = -0.5;
    const SpdMatrix p = project_to_spd(w, 1e-4);
    CHECK(p.matrix()(0, 0) == doctest::Approx(1.0));
    CHECK(p.matrix()(1, 1) == doctest::Approx(1e-4));
    CHECK(std::abs(p.matrix()(0, 1)) <= 1e-15);
  }

  TEST_CASE("well-conditioned input is returned unchanged") {
    for_all(50, 4, [](Rng& rng, int) {
      const SpdMatrix x = random_spd(4, rng);
      CHECK(project_to_spd(x.matrix(), 1e-4) == x);
    });
  }

  TEST_CASE("random symmetric input ends up with eigenvalues at least tau") {
    for_all(100, 5, [](Rng& rng, int c) {
      const Eigen::Index n = kDims[static_cast<std::size_t>(c) % kDims.size()];
      const Matrix w = random_symmetric(n, 1.0, rng);
      const double tau = 1e-3;
      const Vector eig = sym_eigenvalues(project_to_spd(w, tau).matrix());
      CHECK(eig.minCoeff() >= tau * (1 - 1e-9));
      // Eigenvalues already above tau are kept.
      const Vector before = sym_eigenvalues(w);
      for (Eigen::Index i = 0; i < n; ++i) {
        CHECK(std::abs(eig(i) - std::max(before(i), tau)) <= 1e-9 * (1 + std::abs(before(i))));
      }
    });
  }

  TEST_CASE("errors") {
    CHECK_THROWS_AS(project_to_spd(Matrix::Identity(2, 2), 0.0), ConfigError);
    Matrix a(2, 2);
    a << 1, 2, 0, 1;
    CHECK_THROWS_AS(project_to_spd(a, 1e-4), ValidationError);
  }
}

TEST_SUITE("euclidean rslvq") {
  TEST_CASE("a prototype on its own sample does not move") {
    EuclideanRslvqModel m;
    m.dim = 2;
    m.num_classes = 2;
    m.sigma_sq = 1.0;
    m.prototypes = {{diag2(1, 2), 1}, {diag2(3, 1), 2}};
    m.priors = {0.5, 0.5};
    // With one prototype per class the in-class weight minus the overall
    // weight is nonzero, but the displacement X - w vanishes.
    const SpdMatrix x = m.prototypes[0].matrix;
    rslvq_step_inplace(m, x, 1, 0.1);
    CHECK(m.prototypes[0].matrix == x);
  }

  TEST_CASE("the step moves the correct prototype toward the sample") {
    for_all(50, 6, [](Rng& rng, int) {
      EuclideanRslvqModel m;
      m.dim = 3;
      m.num_classes = 2;
      m.sigma_sq = 1.0;
      m.prototypes = {{random_spd(3, rng), 1}, {random_spd(3, rng), 2}};
      m.priors = {0.5, 0.5};
      const EuclideanRslvqModel before = m;
      const SpdMatrix x = random_spd(3, rng);
      rslvq_step_inplace(m, x, 1, 0.01);
      CHECK((m.prototypes[0].matrix.matrix() - x.matrix()).norm() <=
            (before.prototypes[0].matrix.matrix() - x.matrix()).norm() + 1e-12);
    });
  }

  TEST_CASE("trained prototypes keep eigenvalues at least tau and reruns are identical") {
    Rng rng(7);
    const LabeledDataset d = random_labeled(3, 3, 6, rng);
    TrainConfig c;
    c.epochs = 10;
    c.sigma_sq_opt = 0.5;
    c.lr_numerator_divisor = 5.0;
    c.rng_seed = 4;
    const double tau = 0.05;
    const auto a = euclidean_rslvq_train(d, c, tau);
    const auto b = euclidean_rslvq_train(d, c, tau);
    REQUIRE(a.history.size() == 10);
    for (std::size_t l = 0; l < a.model.prototypes.size(); ++l) {
      CHECK(sym_eigenvalues(a.model.prototypes[l].matrix.matrix()).minCoeff() >= tau * (1 - 1e-9));
      CHECK(a.model.prototypes[l].matrix == b.model.prototypes[l].matrix);
    }
    const auto eval = rslvq_evaluate(a.model, d);
    CHECK(eval.predicted.size() == d.size());
    for (std::size_t i = 0; i < d.size(); ++i) {
      CHECK(eval.predicted[i] == rslvq_predict(a.model, d.points[i]).predicted);
    }
  }

  TEST_CASE("history is filled only when tracking") {
    Rng rng(8);
    const LabeledDataset d = random_labeled(2, 2, 5, rng);
    TrainConfig c;
    c.epochs = 3;
    c.track_history = false;
    const auto r = euclidean_rslvq_train(d, c);
    for (const auto& h : r.history) CHECK(h.cost == 0.0);
    c.track_history = true;
    CHECK(euclidean_rslvq_train(d, c).history.back().cost > 0.0);
  }

  TEST_CASE("errors") {
    Rng rng(9);
    const LabeledDataset d = random_labeled(2, 2, 3, rng);
    CHECK_THROWS_AS(euclidean_rslvq_train(d, TrainConfig{}, 0.0), ConfigError);
  }
}
