#pragma once

// Text formats for datasets and trained models.
//
// Dataset:
//   SPDDS v1 n=<n> C=<C> m=<m>
//   then per sample a line holding the label, followed by n rows of n values.
//
// Model:
//   SPDMODEL v1 method=<tag>
//   seed <u64>
//   config_hash <16 hex digits>
//   n=<n> C=<C> M=<M>
//   sigma_sq <value>            (prototype methods)
//   tau <value>                 (rslvq-euclidean)
//   priors <M values>           (prototype methods)
//   prototype <label> | mean <class>, then n rows of n values, repeated
//   checksum <16 hex digits>    FNV-1a 64 of every preceding byte
//
// Reals are written with 17 significant digits, so a save/load round trip
// reproduces every bit.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>

#include "plrsq/baselines.hpp"
#include "plrsq/classifier.hpp"
#include "plrsq/dataset.hpp"

namespace plrsq {

enum class Method { plrsq_const, plrsq_an, mdrm, rslvq_euclidean };

std::string to_string(Method m);
/// Throws ConfigError on an unknown tag.
Method method_from_string(std::string_view s);

/// FNV-1a, 64 bit.
std::uint64_t fnv1a64(std::string_view bytes,
                      std::uint64_t basis = 0xcbf29ce484222325ULL) noexcept;

/// Canonical one-line rendering of every TrainConfig field.
std::string describe(const TrainConfig& config);
std::uint64_t config_hash(const TrainConfig& config, double tau);

/// 17 significant digits, which parse back to the same double.
std::string format_real(double v);

// ---- datasets --------------------------------------------------------------

std::string dataset_to_string(const LabeledDataset& data);
/// Throws ParseError (with byte offset) on malformed text and
/// ValidationError if a matrix is not SPD.
LabeledDataset dataset_from_string(std::string_view text);

void save_dataset(const std::filesystem::path& path, const LabeledDataset& data);
LabeledDataset load_dataset(const std::filesystem::path& path);

// ---- models ----------------------------------------------------------------

using AnyModel = std::variant<Model, MdrmModel, EuclideanRslvqModel>;

struct SavedModel {
  Method method = Method::plrsq_an;
  AnyModel model;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
};

std::string model_to_string(const SavedModel& saved);
/// Throws ParseError on malformed text, an unsupported version, an unknown
/// method tag or a checksum mismatch. If `expected` is set and differs from
/// the stored tag, throws ConfigError.
SavedModel model_from_string(std::string_view text, std::optional<Method> expected = {});

void save_model(const std::filesystem::path& path, const SavedModel& saved);
SavedModel load_model(const std::filesystem::path& path, std::optional<Method> expected = {});

// ---- files -----------------------------------------------------------------

/// Writes to a sibling temporary file, then renames it over `path`.
/// Parent directories are created. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view contents);
std::string read_file(const std::filesystem::path& path);

}  // namespace plrsq
