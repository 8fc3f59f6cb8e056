#pragma once

// Reference classifiers: nearest Riemannian class mean (MDRM) and soft LVQ
// with the Frobenius distance, whose prototypes are projected back onto the
// SPD cone after every update.

#include <functional>
#include <vector>

#include "plrsq/classifier.hpp"

namespace plrsq {

struct MdrmModel {
  std::vector<SpdMatrix> class_means;  // index k is class k + 1
  Eigen::Index dim = 0;
  int num_classes = 0;

  void validate() const;
};

MdrmModel mdrm_train(const LabeledDataset& data, const KarcherOptions& karcher = {});

/// argmin_k dist(X, mean_k), ties to the lowest class id.
ClassId mdrm_predict(const MdrmModel& model, const SpdMatrix& x);

/// Eigenvalues below tau are raised to tau.
SpdMatrix project_to_spd(const Matrix& w, double tau);

inline constexpr double kDefaultProjectionFloor = 1e-4;

struct EuclideanRslvqModel {
  std::vector<Prototype> prototypes;
  double sigma_sq = 1.0;
  double tau = kDefaultProjectionFloor;
  std::vector<double> priors;
  Eigen::Index dim = 0;
  int num_classes = 0;

  std::vector<ClassId> labels() const;
  MixtureView view(const std::vector<ClassId>& labels) const {
    return {labels, priors, sigma_sq, num_classes};
  }
  void validate() const;
};

/// Squared Frobenius distances to every prototype.
std::vector<double> euclidean_distances_sq(const EuclideanRslvqModel& model, const Matrix& x);

PosteriorReport rslvq_predict(const EuclideanRslvqModel& model, const SpdMatrix& x);

/// w_j += (alpha / sigma^2) * weight_j * (X - w_j), then project_to_spd.
void rslvq_step_inplace(EuclideanRslvqModel& model, const SpdMatrix& x, ClassId y,
                        double alpha);

Evaluation rslvq_evaluate(const EuclideanRslvqModel& model, const LabeledDataset& data);

struct RslvqTrainResult {
  EuclideanRslvqModel model;
  std::vector<EpochRecord> history;
};

using RslvqEpochCallback = std::function<void(const EpochRecord&, const EuclideanRslvqModel&)>;

/// Same schedules, permutation scheme and annealing as train(); prototypes
/// start at the arithmetic class mean plus a symmetric perturbation,
/// projected with floor `tau`.
RslvqTrainResult euclidean_rslvq_train(const LabeledDataset& data, const TrainConfig& config,
                                       double tau = kDefaultProjectionFloor,
                                       const RslvqEpochCallback& on_epoch = {});

}  // namespace plrsq
