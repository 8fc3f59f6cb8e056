#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "plrsq/experiment.hpp"

namespace py = pybind11;
using namespace plrsq;

namespace {

using Stack = py::array_t<double, py::array::c_style | py::array::forcecast>;

// (m, n, n) array plus labels -> dataset. Matrices are validated as SPD.
LabeledDataset to_dataset(const Stack& points, const std::vector<ClassId>& labels,
                          int num_classes) {
  if (points.ndim() != 3 || points.shape(1) != points.shape(2)) {
    throw ValidationError("points must have shape (m, n, n)");
  }
  if (static_cast<std::size_t>(points.shape(0)) != labels.size()) {
    throw ValidationError("points and labels differ in length");
  }
  const Eigen::Index n = points.shape(1);
  LabeledDataset d;
  d.dim = n;
  d.num_classes = num_classes;
  auto view = points.unchecked<3>();
  for (py::ssize_t i = 0; i < points.shape(0); ++i) {
    Matrix m(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) m(r, c) = view(i, r, c);
    }
    d.add(SpdMatrix(std::move(m)), labels[static_cast<std::size_t>(i)]);
  }
  d.validate();
  return d;
}

Stack to_stack(const std::vector<SpdMatrix>& mats, Eigen::Index n) {
  Stack out({static_cast<py::ssize_t>(mats.size()), static_cast<py::ssize_t>(n),
             static_cast<py::ssize_t>(n)});
  auto view = out.mutable_unchecked<3>();
  for (std::size_t i = 0; i < mats.size(); ++i) {
    for (Eigen::Index r = 0; r < n; ++r) {
      for (Eigen::Index c = 0; c < n; ++c) view(i, r, c) = mats[i].matrix()(r, c);
    }
  }
  return out;
}

py::tuple dataset_tuple(const LabeledDataset& d) {
  return py::make_tuple(to_stack(d.points, d.dim), d.labels);
}

std::vector<SpdMatrix> to_points(const Stack& points) {
  if (points.ndim() != 3) throw ValidationError("points must have shape (m, n, n)");
  return to_dataset(points, std::vector<ClassId>(points.shape(0), 1), 1).points;
}

}  // namespace

PYBIND11_MODULE(_plrsq, m) {
  m.doc() = "Probabilistic learning vector quantization on the SPD manifold";

  static py::exception<Error> base(m, "Error", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(base, (std::string(to_string(e.category())) + ": " + e.what()).c_str());
    }
  });

  m.def("geo_distance", [](const Matrix& a, const Matrix& b) {
    return geo_distance(SpdMatrix(a), SpdMatrix(b));
  });
  m.def("log_map", [](const Matrix& base, const Matrix& x) {
    return log_map(SpdMatrix(base), SpdMatrix(x)).matrix();
  });
  m.def("exp_map", [](const Matrix& base, const Matrix& v) {
    return exp_map(SpdMatrix(base), TangentVector(v)).matrix();
  });
  m.def("dist_sq_gradient", [](const Matrix& w, const Matrix& x) {
    return dist_sq_gradient(SpdMatrix(w), SpdMatrix(x)).matrix();
  });
  m.def(
      "karcher_mean",
      [](const Stack& points, double tol, int max_iter) {
        return karcher_mean(to_points(points), {tol, max_iter}).matrix();
      },
      py::arg("points"), py::arg("tol") = KarcherOptions{}.tol,
      py::arg("max_iter") = KarcherOptions{}.max_iter);
  m.def("kappa", &kappa, py::arg("accuracy"), py::arg("num_classes"));

  py::class_<TrainConfig>(m, "TrainConfig")
      .def(py::init<>())
      .def_readwrite("sigma_sq_opt", &TrainConfig::sigma_sq_opt)
      .def_readwrite("prototypes_per_class", &TrainConfig::prototypes_per_class)
      .def_readwrite("epochs", &TrainConfig::epochs)
      .def_property(
          "annealing", [](const TrainConfig& c) { return to_string(c.annealing); },
          [](TrainConfig& c, const std::string& s) { c.annealing = annealing_from_string(s); })
      .def_readwrite("beta0", &TrainConfig::beta0)
      .def_readwrite("anneal_exponent", &TrainConfig::anneal_exponent)
      .def_readwrite("anneal_stop_offset", &TrainConfig::anneal_stop_offset)
      .def_readwrite("lr_numerator_divisor", &TrainConfig::lr_numerator_divisor)
      .def_readwrite("lr_decay_base", &TrainConfig::lr_decay_base)
      .def_readwrite("init_perturb_scale", &TrainConfig::init_perturb_scale)
      .def_readwrite("rng_seed", &TrainConfig::rng_seed)
      .def_readwrite("track_history", &TrainConfig::track_history)
      .def("__repr__", [](const TrainConfig& c) { return "TrainConfig(" + describe(c) + ")"; });

  py::class_<Model>(m, "Model")
      .def_readonly("sigma_sq", &Model::sigma_sq)
      .def_readonly("priors", &Model::priors)
      .def_readonly("num_classes", &Model::num_classes)
      .def_property_readonly("labels", &Model::labels)
      .def_property_readonly("prototypes",
                             [](const Model& model) {
                               std::vector<SpdMatrix> mats;
                               for (const auto& p : model.prototypes) mats.push_back(p.matrix);
                               return to_stack(mats, model.dim);
                             })
      .def("predict_proba",
           [](const Model& model, const Matrix& x) {
             return class_posterior(model, SpdMatrix(x)).class_probs;
           })
      .def("predict",
           [](const Model& model, const Stack& points) {
             std::vector<ClassId> out;
             for (const auto& x : to_points(points)) out.push_back(predict(model, x).predicted);
             return out;
           })
      .def("cost", [](const Model& model, const Stack& points, const std::vector<ClassId>& labels) {
        return cost(model, to_dataset(points, labels, model.num_classes));
      });

  py::class_<MdrmModel>(m, "MdrmModel")
      .def_property_readonly("class_means",
                             [](const MdrmModel& model) {
                               return to_stack(model.class_means, model.dim);
                             })
      .def("predict", [](const MdrmModel& model, const Stack& points) {
        std::vector<ClassId> out;
        for (const auto& x : to_points(points)) out.push_back(mdrm_predict(model, x));
        return out;
      });

  py::class_<EuclideanRslvqModel>(m, "RslvqModel")
      .def_readonly("sigma_sq", &EuclideanRslvqModel::sigma_sq)
      .def_readonly("tau", &EuclideanRslvqModel::tau)
      .def("predict", [](const EuclideanRslvqModel& model, const Stack& points) {
        std::vector<ClassId> out;
        for (const auto& x : to_points(points)) out.push_back(rslvq_predict(model, x).predicted);
        return out;
      });

  m.def(
      "train",
      [](const Stack& points, const std::vector<ClassId>& labels, int num_classes,
         const TrainConfig& config, const std::string& method) {
        const Method mt = method_from_string(method);
        if (mt != Method::plrsq_const && mt != Method::plrsq_an) {
          throw ConfigError("train: method must be plrsq-const or plrsq-an");
        }
        const LabeledDataset d = to_dataset(points, labels, num_classes);
        FitResult r;
        {
          py::gil_scoped_release release;
          r = fit(mt, d, config, kDefaultProjectionFloor);
        }
        std::vector<py::dict> history;
        for (const auto& h : r.history) {
          py::dict row;
          row["epoch"] = h.epoch;
          row["cost"] = h.cost;
          row["train_err"] = h.train_err;
          row["sigma_sq"] = h.sigma_sq;
          row["alpha"] = h.alpha;
          history.push_back(row);
        }
        return py::make_tuple(std::get<Model>(r.saved.model), history);
      },
      py::arg("points"), py::arg("labels"), py::arg("num_classes"), py::arg("config"),
      py::arg("method") = "plrsq-an");

  m.def("mdrm_train", [](const Stack& points, const std::vector<ClassId>& labels,
                         int num_classes) {
    return mdrm_train(to_dataset(points, labels, num_classes));
  });

  m.def(
      "gen_synth",
      [](const std::string& name, std::uint64_t seed, Eigen::Index n, int instances_per_class) {
        SynthSpec spec = SynthSpec::make(synth_name_from_string(name), seed);
        spec.n = n;
        spec.instances_per_class = instances_per_class;
        const SynthSplits s = gen_dataset(spec);
        py::dict out;
        out["train"] = dataset_tuple(s.train);
        out["validation"] = dataset_tuple(s.validation);
        out["test"] = dataset_tuple(s.test);
        return out;
      },
      py::arg("name"), py::arg("seed"), py::arg("n") = 10, py::arg("instances_per_class") = 250);

  m.def(
      "save_model",
      [](const std::string& path, const Model& model, const std::string& method,
         std::uint64_t seed) {
        save_model(path, SavedModel{method_from_string(method), model, seed, 0});
      },
      py::arg("path"), py::arg("model"), py::arg("method") = "plrsq-an", py::arg("seed") = 0);
  m.def("load_model", [](const std::string& path) -> py::object {
    SavedModel s = load_model(path);
    return std::visit([](auto& model) { return py::cast(model); }, s.model);
  });
}
