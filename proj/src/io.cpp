#include "plrsq/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <system_error>
#include <unistd.h>

namespace plrsq {

namespace {

constexpr std::string_view kDatasetMagic = "SPDDS";
constexpr std::string_view kModelMagic = "SPDMODEL";
constexpr std::string_view kVersion = "v1";

std::string hex16(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

// Whitespace-separated tokens with byte offsets for error reporting.
class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  std::size_t offset() const noexcept { return pos_; }

  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }

  std::string_view token(const char* what) {
    skip_space();
    if (pos_ >= text_.size()) fail(std::string("unexpected end of input, expected ") + what);
    const std::size_t start = pos_;
    while (pos_ < text_.size() && !is_space(text_[pos_])) ++pos_;
    last_ = start;
    return text_.substr(start, pos_ - start);
  }

  void expect(std::string_view literal) {
    const std::string what = "'" + std::string(literal) + "'";
    const auto t = token(what.c_str());
    if (t != literal) fail("expected " + what + ", found '" + std::string(t) + "'", last_);
  }

  /// Token of the form key=value; returns value.
  std::string_view keyed(std::string_view key) {
    const std::string what = std::string(key) + "=<value>";
    const auto t = token(what.c_str());
    if (t.size() <= key.size() || t.substr(0, key.size()) != key || t[key.size()] != '=') {
      fail("expected " + what + ", found '" + std::string(t) + "'", last_);
    }
    value_offset_ = last_ + key.size() + 1;
    return t.substr(key.size() + 1);
  }

  template <typename T>
  T integer(const char* what) {
    return parse_integer<T>(token(what), what, last_);
  }

  template <typename T>
  T keyed_integer(std::string_view key) {
    const auto v = keyed(key);
    return parse_integer<T>(v, std::string(key).c_str(), value_offset_);
  }

  double real(const char* what) {
    const auto t = token(what);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      fail(std::string("malformed ") + what + " '" + std::string(t) + "'", last_);
    }
    return v;
  }

  std::uint64_t hex(const char* what) {
    const auto t = token(what);
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v, 16);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      fail(std::string("malformed ") + what + " '" + std::string(t) + "'", last_);
    }
    return v;
  }

  Matrix matrix(Eigen::Index n) {
    Matrix m(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = 0; j < n; ++j) m(i, j) = real("matrix entry");
    }
    return m;
  }

  std::size_t last_offset() const noexcept { return last_; }

  [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, pos_); }
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    throw ParseError(msg, at);
  }

 private:
  static bool is_space(char c) { return c == ' ' || c == '\n' || c == '\t' || c == '\r'; }

  void skip_space() {
    while (pos_ < text_.size() && is_space(text_[pos_])) ++pos_;
  }

  template <typename T>
  T parse_integer(std::string_view t, const char* what, std::size_t at) const {
    T v{};
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
    if (ec != std::errc() || ptr != t.data() + t.size()) {
      fail(std::string("malformed ") + what + " '" + std::string(t) + "'", at);
    }
    return v;
  }

  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t last_ = 0;
  std::size_t value_offset_ = 0;
};

void write_matrix(std::ostringstream& os, const Matrix& m) {
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) os << ' ';
      os << format_real(m(i, j));
    }
    os << '\n';
  }
}

SpdMatrix checked_spd(Matrix m, const std::string& where) {
  try {
    return SpdMatrix(std::move(m));
  } catch (const ValidationError& e) {
    throw ValidationError(where + ": " + e.what());
  }
}

}  // namespace

std::string to_string(Method m) {
  switch (m) {
    case Method::plrsq_const: return "plrsq-const";
    case Method::plrsq_an: return "plrsq-an";
    case Method::mdrm: return "mdrm";
    case Method::rslvq_euclidean: return "rslvq-euclidean";
  }
  return "unknown";
}

Method method_from_string(std::string_view s) {
  if (s == "plrsq-const") return Method::plrsq_const;
  if (s == "plrsq-an") return Method::plrsq_an;
  if (s == "mdrm") return Method::mdrm;
  if (s == "rslvq-euclidean") return Method::rslvq_euclidean;
  throw ConfigError("unknown method '" + std::string(s) +
                    "' (expected plrsq-const, plrsq-an, mdrm or rslvq-euclidean)");
}

std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t basis) noexcept {
  std::uint64_t h = basis;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string format_real(double v) {
  char buf[40];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, ec == std::errc() ? ptr : buf);
}

std::string describe(const TrainConfig& c) {
  std::ostringstream os;
  os << "sigma_sq_opt=" << format_real(c.sigma_sq_opt)
     << " prototypes_per_class=" << c.prototypes_per_class << " epochs=" << c.epochs
     << " annealing=" << to_string(c.annealing) << " beta0=" << format_real(c.beta0)
     << " anneal_exponent=" << format_real(c.anneal_exponent)
     << " anneal_stop_offset=" << format_real(c.anneal_stop_offset)
     << " lr_numerator_divisor=" << format_real(c.lr_numerator_divisor)
     << " lr_decay_base=" << format_real(c.lr_decay_base)
     << " init_perturb_scale=" << format_real(c.init_perturb_scale) << " rng_seed=" << c.rng_seed
     << " karcher_tol=" << format_real(c.karcher.tol)
     << " karcher_max_iter=" << c.karcher.max_iter;
  return os.str();
}

std::uint64_t config_hash(const TrainConfig& config, double tau) {
  return fnv1a64(describe(config) + " tau=" + format_real(tau));
}

// ---- datasets --------------------------------------------------------------

std::string dataset_to_string(const LabeledDataset& data) {
  data.validate();
  std::ostringstream os;
  os << kDatasetMagic << ' ' << kVersion << " n=" << data.dim << " C=" << data.num_classes
     << " m=" << data.size() << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    os << data.labels[i] << '\n';
    write_matrix(os, data.points[i].matrix());
  }
  return os.str();
}

LabeledDataset dataset_from_string(std::string_view text) {
  Cursor in(text);
  in.expect(kDatasetMagic);
  const auto version = in.token("version");
  if (version != kVersion) {
    in.fail("unsupported dataset version '" + std::string(version) + "'", in.last_offset());
  }
  const auto n = in.keyed_integer<long>("n");
  const auto c = in.keyed_integer<int>("C");
  const auto m = in.keyed_integer<std::size_t>("m");
  if (n < 1) in.fail("dimension must be positive", in.last_offset());
  if (c < 1) in.fail("class count must be positive", in.last_offset());

  LabeledDataset data;
  data.dim = n;
  data.num_classes = c;
  data.points.reserve(m);
  data.labels.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int y = in.integer<int>("label");
    if (y < 1 || y > c) {
      in.fail("label " + std::to_string(y) + " outside 1.." + std::to_string(c),
              in.last_offset());
    }
    Matrix x = in.matrix(n);
    data.add(checked_spd(std::move(x), "sample " + std::to_string(i)), y);
  }
  if (!in.at_end()) in.fail("trailing content after " + std::to_string(m) + " samples");
  return data;
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& data) {
  write_file_atomic(path, dataset_to_string(data));
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_string(read_file(path));
}

// ---- models ----------------------------------------------------------------

std::string model_to_string(const SavedModel& saved) {
  std::ostringstream os;
  os << kModelMagic << ' ' << kVersion << " method=" << to_string(saved.method) << '\n';
  os << "seed " << saved.seed << '\n';
  os << "config_hash " << hex16(saved.config_hash) << '\n';

  const auto write_prototypes = [&os](const std::vector<Prototype>& protos,
                                      const std::vector<double>& priors, double sigma_sq) {
    os << "sigma_sq " << format_real(sigma_sq) << '\n';
    os << "priors";
    for (double p : priors) os << ' ' << format_real(p);
    os << '\n';
    for (const auto& p : protos) {
      os << "prototype " << p.label << '\n';
      write_matrix(os, p.matrix.matrix());
    }
  };

  std::visit(
      [&](const auto& model) {
        using T = std::decay_t<decltype(model)>;
        model.validate();
        if constexpr (std::is_same_v<T, Model>) {
          if (saved.method != Method::plrsq_const && saved.method != Method::plrsq_an) {
            throw ConfigError("save_model: PLRSQ model tagged as " + to_string(saved.method));
          }
          os << "n=" << model.dim << " C=" << model.num_classes << " M=" << model.size() << '\n';
          write_prototypes(model.prototypes, model.priors, model.sigma_sq);
        } else if constexpr (std::is_same_v<T, MdrmModel>) {
          if (saved.method != Method::mdrm) {
            throw ConfigError("save_model: MDRM model tagged as " + to_string(saved.method));
          }
          os << "n=" << model.dim << " C=" << model.num_classes
             << " M=" << model.class_means.size() << '\n';
          for (std::size_t k = 0; k < model.class_means.size(); ++k) {
            os << "mean " << k + 1 << '\n';
            write_matrix(os, model.class_means[k].matrix());
          }
        } else {
          if (saved.method != Method::rslvq_euclidean) {
            throw ConfigError("save_model: RSLVQ model tagged as " + to_string(saved.method));
          }
          os << "n=" << model.dim << " C=" << model.num_classes
             << " M=" << model.prototypes.size() << '\n';
          os << "tau " << format_real(model.tau) << '\n';
          write_prototypes(model.prototypes, model.priors, model.sigma_sq);
        }
      },
      saved.model);

  std::string body = os.str();
  body += "checksum " + hex16(fnv1a64(body)) + '\n';
  return body;
}

SavedModel model_from_string(std::string_view text, std::optional<Method> expected) {
  // The checksum covers every byte up to the start of the checksum line.
  const std::size_t mark = text.rfind("checksum ");
  if (mark == std::string_view::npos || (mark > 0 && text[mark - 1] != '\n')) {
    throw ParseError("model file has no checksum line", text.size());
  }
  {
    Cursor tail(text.substr(mark));
    tail.expect("checksum");
    const std::uint64_t stored = tail.hex("checksum");
    if (!tail.at_end()) tail.fail("trailing content after checksum");
    if (stored != fnv1a64(text.substr(0, mark))) {
      throw ParseError("model checksum mismatch: file is corrupted", mark);
    }
  }

  Cursor in(text.substr(0, mark));
  in.expect(kModelMagic);
  const auto version = in.token("version");
  if (version != kVersion) {
    in.fail("unsupported model version '" + std::string(version) + "'", in.last_offset());
  }
  SavedModel saved;
  const auto tag = in.keyed("method");
  try {
    saved.method = method_from_string(tag);
  } catch (const ConfigError&) {
    in.fail("unknown method tag '" + std::string(tag) + "'", in.last_offset());
  }
  if (expected && *expected != saved.method) {
    throw ConfigError("model file holds method " + to_string(saved.method) + ", expected " +
                      to_string(*expected));
  }
  in.expect("seed");
  saved.seed = in.integer<std::uint64_t>("seed");
  in.expect("config_hash");
  saved.config_hash = in.hex("config hash");
  const auto n = in.keyed_integer<long>("n");
  const auto c = in.keyed_integer<int>("C");
  const auto m = in.keyed_integer<std::size_t>("M");
  if (n < 1 || c < 1 || m < 1) in.fail("n, C and M must be positive", in.last_offset());

  const auto read_prototypes = [&](std::vector<Prototype>& protos, std::vector<double>& priors,
                                   double& sigma_sq) {
    in.expect("sigma_sq");
    sigma_sq = in.real("sigma_sq");
    in.expect("priors");
    for (std::size_t l = 0; l < m; ++l) priors.push_back(in.real("prior"));
    for (std::size_t l = 0; l < m; ++l) {
      in.expect("prototype");
      const int label = in.integer<int>("prototype label");
      protos.push_back({checked_spd(in.matrix(n), "prototype " + std::to_string(l)), label});
    }
  };

  switch (saved.method) {
    case Method::plrsq_const:
    case Method::plrsq_an: {
      Model model;
      model.dim = n;
      model.num_classes = c;
      read_prototypes(model.prototypes, model.priors, model.sigma_sq);
      model.validate();
      saved.model = std::move(model);
      break;
    }
    case Method::mdrm: {
      MdrmModel model;
      model.dim = n;
      model.num_classes = c;
      for (std::size_t k = 0; k < m; ++k) {
        in.expect("mean");
        const auto id = in.integer<std::size_t>("class id");
        if (id != k + 1) in.fail("class means out of order", in.last_offset());
        model.class_means.push_back(checked_spd(in.matrix(n), "mean " + std::to_string(id)));
      }
      model.validate();
      saved.model = std::move(model);
      break;
    }
    case Method::rslvq_euclidean: {
      EuclideanRslvqModel model;
      model.dim = n;
      model.num_classes = c;
      in.expect("tau");
      model.tau = in.real("tau");
      read_prototypes(model.prototypes, model.priors, model.sigma_sq);
      model.validate();
      saved.model = std::move(model);
      break;
    }
  }
  if (!in.at_end()) in.fail("unexpected content before checksum");
  return saved;
}

void save_model(const std::filesystem::path& path, const SavedModel& saved) {
  write_file_atomic(path, model_to_string(saved));
}

SavedModel load_model(const std::filesystem::path& path, std::optional<Method> expected) {
  return model_from_string(read_file(path), expected);
}

// ---- files -----------------------------------------------------------------

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) {
    fs::create_directories(path.parent_path(), ec);
    if (ec) {
      throw IoError("cannot create directory " + path.parent_path().string() + ": " +
                    ec.message());
    }
  }
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoError("write to " + tmp.string() + " failed");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    std::error_code ignored;
    fs::remove(tmp, ignored);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read from " + path.string() + " failed");
  return ss.str();
}

}  // namespace plrsq
