#include "plrsq/datagen.hpp"

#include <cmath>
#include <sstream>

namespace plrsq {

namespace {

constexpr std::uint64_t kBasisStream = 0xB0;
constexpr std::uint64_t kInstanceStream = 0xC0;

Matrix standard_normal(Eigen::Index rows, Eigen::Index cols, Rng& rng) {
  Matrix a(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = rng.normal();
  }
  return a;
}

}  // namespace

EigenProfile eigen_profile(int profile_id, Eigen::Index n) {
  if (n < 1) throw ConfigError("eigen_profile: n must be at least 1");
  Vector raw(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double j = static_cast<double>(i + 1);
    switch (profile_id) {
      case 1: raw(i) = 13.0 - j; break;
      case 2: raw(i) = 1.0 + 100.0 * std::exp(-0.5 * j); break;
      case 3: raw(i) = 13.0 - 0.5 * j; break;
      case 4: raw(i) = 1.0 / j; break;
      default: throw ConfigError("eigen_profile: unknown profile id " + std::to_string(profile_id));
    }
  }
  if (raw.minCoeff() <= 0.0) {
    throw ConfigError("eigen_profile: profile " + std::to_string(profile_id) +
                      " is not positive for n = " + std::to_string(n));
  }
  return {profile_id, raw * (static_cast<double>(n) / raw.sum())};
}

OrthoBasis random_orthonormal_basis(Eigen::Index n, Rng& rng) {
  if (n < 1) throw ConfigError("random_orthonormal_basis: n must be at least 1");
  return gram_schmidt(standard_normal(n, n, rng), [&](Eigen::Index) -> Vector {
    return standard_normal(n, 1, rng).col(0);
  });
}

OrthoBasis random_orthonormal_basis(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  return random_orthonormal_basis(n, rng);
}

SpdMatrix sample_instance(const EigenProfile& profile, const OrthoBasis& basis, double epsilon,
                          double nu, Rng& rng) {
  const Eigen::Index n = profile.values.size();
  if (basis.columns.rows() != n || basis.columns.cols() != n) {
    throw ValidationError("sample_instance: basis does not match profile length");
  }
  if (!(epsilon >= 0.0) || epsilon >= profile.values.minCoeff()) {
    std::ostringstream os;
    os << "sample_instance: epsilon " << epsilon << " must be below the smallest profile value "
       << profile.values.minCoeff();
    throw ConfigError(os.str());
  }
  if (!(nu >= 0.0)) throw ConfigError("sample_instance: nu must be nonnegative");

  Vector lambda(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    lambda(j) = rng.uniform(profile.values(j) - epsilon, profile.values(j) + epsilon);
  }
  Matrix noisy = basis.columns;
  if (nu > 0.0) noisy += nu * standard_normal(n, n, rng);
  const OrthoBasis u = gram_schmidt(std::move(noisy), [&](Eigen::Index j) -> Vector {
    Vector v = basis.columns.col(j);
    for (Eigen::Index i = 0; i < n; ++i) v(i) += nu * rng.normal();
    return v;
  });
  return SpdMatrix::unchecked(u.columns * lambda.asDiagonal() * u.columns.transpose());
}

std::string to_string(SynthName name) { return name == SynthName::syn1 ? "SynI" : "SynII"; }

SynthName synth_name_from_string(const std::string& s) {
  if (s == "SynI" || s == "syn1" || s == "synI") return SynthName::syn1;
  if (s == "SynII" || s == "syn2" || s == "synII") return SynthName::syn2;
  throw ConfigError("unknown synthetic dataset '" + s + "' (expected SynI or SynII)");
}

SynthSpec SynthSpec::make(SynthName name, std::uint64_t seed) {
  SynthSpec spec;
  spec.name = name;
  spec.seed = seed;
  if (name == SynthName::syn1) {
    spec.class_pairs = {{1, 1}, {1, 2}, {2, 1}, {2, 2}};
  } else {
    spec.class_pairs = {{1, 1}, {2, 1}, {3, 1}, {4, 1}};
  }
  return spec;
}

void SynthSpec::validate() const {
  if (n < 1) throw ConfigError("synth spec: n must be positive");
  if (num_classes < 1 || class_pairs.size() != static_cast<std::size_t>(num_classes)) {
    throw ConfigError("synth spec: need one (profile, basis) pair per class");
  }
  if (instances_per_class < 1) throw ConfigError("synth spec: instances_per_class must be >= 1");
  for (const auto& [profile, basis] : class_pairs) {
    if (profile < 1 || profile > 4) throw ConfigError("synth spec: profile id out of range");
    if (basis < 1) throw ConfigError("synth spec: basis id must be >= 1");
  }
}

SynthSplits gen_dataset(const SynthSpec& spec) {
  spec.validate();
  int num_bases = 0;
  for (const auto& pair : spec.class_pairs) num_bases = std::max(num_bases, pair.second);

  std::vector<OrthoBasis> bases;
  for (int b = 1; b <= num_bases; ++b) {
    Rng rng = Rng::derive(spec.seed, {kBasisStream, static_cast<std::uint64_t>(b)});
    bases.push_back(random_orthonormal_basis(spec.n, rng));
  }
  std::vector<EigenProfile> profiles;
  for (const auto& pair : spec.class_pairs) profiles.push_back(eigen_profile(pair.first, spec.n));

  SynthSplits out;
  LabeledDataset* splits[] = {&out.train, &out.validation, &out.test};
  for (std::uint64_t s = 0; s < 3; ++s) {
    LabeledDataset& split = *splits[s];
    split.dim = spec.n;
    split.num_classes = spec.num_classes;
    split.points.reserve(static_cast<std::size_t>(spec.instances_per_class * spec.num_classes));
    for (int k = 0; k < spec.num_classes; ++k) {
      const auto& basis = bases[static_cast<std::size_t>(spec.class_pairs[k].second - 1)];
      for (int i = 0; i < spec.instances_per_class; ++i) {
        Rng rng = Rng::derive(spec.seed, {kInstanceStream, s, static_cast<std::uint64_t>(k),
                                          static_cast<std::uint64_t>(i)});
        split.add(sample_instance(profiles[static_cast<std::size_t>(k)], basis, spec.epsilon,
                                  spec.nu, rng),
                  k + 1);
      }
    }
  }
  return out;
}

SpdMatrix covariance_from_trial(const Matrix& trial) {
  const Eigen::Index n = trial.rows();
  const Eigen::Index l = trial.cols();
  if (n < 1) throw ValidationError("covariance_from_trial: no channels");
  if (l < 2) throw ValidationError("covariance_from_trial: need at least two samples per channel");
  if (!trial.allFinite()) throw ValidationError("covariance_from_trial: non-finite sample");
  const Matrix centered = trial.colwise() - trial.rowwise().mean();
  const Matrix cov = symmetrize(centered * centered.transpose() / static_cast<double>(l - 1));
  const Vector eig = sym_eigenvalues(cov);
  if (eig.minCoeff() <= tol::eig_floor) {
    std::ostringstream os;
    os << "covariance_from_trial: covariance is rank deficient (smallest eigenvalue "
       << eig.minCoeff() << "); regularize the trial, e.g. by shrinkage toward the identity";
    throw DomainError(os.str());
  }
  return SpdMatrix::unchecked(cov);
}

}  // namespace plrsq
