#include "hfocal/bench.h"
#include "hfocal/geometry.h"
#include "hfocal/ransac.h"
#include "hfocal/solvers.h"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hfocal;

namespace {

using TripletArray = Eigen::Matrix<double, Eigen::Dynamic, 6, Eigen::RowMajor>;

std::vector<PointTriplet> ToTriplets(const TripletArray& a) {
  std::vector<PointTriplet> out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    out[i].x1 = Vec2(a(i, 0), a(i, 1));
    out[i].x2 = Vec2(a(i, 2), a(i, 3));
    out[i].x3 = Vec2(a(i, 4), a(i, 5));
  }
  return out;
}

TripletArray FromTriplets(const std::vector<PointTriplet>& ts) {
  TripletArray a(ts.size(), 6);
  for (size_t i = 0; i < ts.size(); ++i)
    a.row(i) << ts[i].x1.x(), ts[i].x1.y(), ts[i].x2.x(), ts[i].x2.y(), ts[i].x3.x(),
        ts[i].x3.y();
  return a;
}

std::vector<Vec2> ToPoints(const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>& a) {
  std::vector<Vec2> out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) out[i] = a.row(i).transpose();
  return out;
}

py::dict PoseDict(const Pose& p) {
  py::dict d;
  d["R"] = p.R;
  d["t"] = p.t;
  return d;
}

}  // namespace

PYBIND11_MODULE(_hfocal, m) {
  m.doc() = "Focal lengths and poses from three views of a plane";

  // Messages start with the error code name, e.g. "NoModelFound: ...".
  py::register_exception<Error>(m, "HfocalError", PyExc_RuntimeError);

  py::enum_<FocalCase>(m, "FocalCase")
      .value("I", FocalCase::kI)
      .value("II", FocalCase::kII)
      .value("III", FocalCase::kIII)
      .value("IV", FocalCase::kIV);
  m.def("parse_case", &ParseFocalCase, py::arg("name"));

  py::class_<FocalSolution>(m, "FocalSolution")
      .def_readonly("case", &FocalSolution::focal_case)
      .def_readonly("f1", &FocalSolution::f1)
      .def_readonly("f2", &FocalSolution::f2)
      .def_readonly("f3", &FocalSolution::f3)
      .def("__repr__", [](const FocalSolution& s) {
        return "FocalSolution(f1=" + std::to_string(s.f1) + ", f2=" + std::to_string(s.f2) +
               ", f3=" + std::to_string(s.f3) + ")";
      });

  m.def("dlt_homography",
        [](const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>& src,
           const Eigen::Matrix<double, Eigen::Dynamic, 2, Eigen::RowMajor>& dst) {
          return DltHomography(ToPoints(src), ToPoints(dst)).matrix();
        },
        py::arg("src"), py::arg("dst"));

  m.def("solve",
        [](FocalCase c, const Mat3& G2, const Mat3& G3, std::optional<double> f1,
           double image_diagonal) {
          SolverOptions o;
          o.image_diagonal = image_diagonal;
          return Solve(c, Homography2D(G2), Homography2D(G3), f1, o);
        },
        py::arg("case"), py::arg("G2"), py::arg("G3"), py::arg("f1") = py::none(),
        py::arg("image_diagonal") = 0.0);

  m.def("estimate",
        [](const TripletArray& triplets, FocalCase c, std::optional<double> f1,
           int max_iterations, int min_iterations, double threshold, std::uint64_t seed,
           std::optional<std::pair<double, double>> image_size,
           std::optional<std::pair<double, double>> fov_filter, bool local_optimization) {
          RansacConfig cfg;
          cfg.max_iterations = max_iterations;
          cfg.min_iterations = min_iterations;
          cfg.sampson_threshold_px = threshold;
          cfg.rng_seed = seed;
          cfg.fov_filter = fov_filter;
          cfg.local_optimization = local_optimization;
          if (image_size) {
            const ImageSize s{image_size->first, image_size->second};
            cfg.image_sizes = {s, s, s};
          }
          EstimationResult r;
          {
            py::gil_scoped_release release;
            r = Estimate(ToTriplets(triplets), c, f1, cfg);
          }
          py::dict d;
          d["f1"] = r.model.f1;
          d["f2"] = r.model.f2;
          d["f3"] = r.model.f3;
          d["pose2"] = PoseDict(r.model.pose2);
          d["pose3"] = PoseDict(r.model.pose3);
          d["score"] = r.model.score;
          d["inliers"] = r.model.inlier_mask;
          d["inlier_count"] = r.inlier_count;
          d["iterations"] = r.iterations;
          d["runtime_ms"] = r.timings.total_ms;
          return d;
        },
        py::arg("triplets"), py::arg("case"), py::arg("f1") = py::none(),
        py::arg("max_iterations") = 1000, py::arg("min_iterations") = 100,
        py::arg("threshold") = 3.0, py::arg("seed") = 0, py::arg("image_size") = py::none(),
        py::arg("fov_filter") = py::none(), py::arg("local_optimization") = true);

  m.def("generate_scene",
        [](FocalCase c, std::uint64_t seed, std::uint64_t index, int n_points,
           double planar_fraction, double noise_sigma, double inlier_ratio,
           bool pure_translation) {
          SynthConfig cfg;
          cfg.focal_case = c;
          cfg.rng_seed = seed;
          cfg.n_points = n_points;
          cfg.planar_fraction = planar_fraction;
          cfg.noise_sigma = noise_sigma;
          cfg.inlier_ratio = inlier_ratio;
          cfg.pure_translation = pure_translation;
          const SynthScene s = GenerateScene(cfg, index);
          py::dict d;
          d["triplets"] = FromTriplets(s.triplets);
          d["inlier"] = s.inlier;
          d["on_plane"] = s.on_plane;
          d["focals"] = std::vector<double>{s.truth.f1, s.truth.f2, s.truth.f3};
          d["pose2"] = PoseDict(s.truth.pose2);
          d["pose3"] = PoseDict(s.truth.pose3);
          d["normal"] = s.truth.plane.normal;
          d["distance"] = s.truth.plane.distance;
          d["G2"] = s.truth.G2.matrix();
          d["G3"] = s.truth.G3.matrix();
          d["image_size"] = std::make_pair(cfg.image_width, cfg.image_height);
          return d;
        },
        py::arg("case") = FocalCase::kI, py::arg("seed") = 0, py::arg("index") = 0,
        py::arg("n_points") = 200, py::arg("planar_fraction") = 1.0,
        py::arg("noise_sigma") = 0.0, py::arg("inlier_ratio") = 0.75,
        py::arg("pure_translation") = false);

  m.def("verify_generators",
        [](int trials, std::uint64_t seed) {
          const auto r = VerifyGenerators(GeneratorTable::Builtin(), trials, seed);
          py::dict d;
          d["trials"] = r.trials;
          d["max_residual"] = r.max_residual;
          d["median_perturbed_residual"] = r.median_perturbed_residual;
          d["pass"] = r.pass;
          return d;
        },
        py::arg("trials") = 1000, py::arg("seed") = 0);

  m.def("xi_f", &XiF, py::arg("f_est"), py::arg("f_gt"));
  m.def("xi_pair", &XiPair, py::arg("f1_est"), py::arg("f2_est"), py::arg("f1_gt"),
        py::arg("f2_gt"));
  m.def("maa", &MeanAverageAccuracy, py::arg("errors"), py::arg("t"));
  m.def("fov_from_focal", &FovFromFocal, py::arg("extent_px"), py::arg("focal"));
  m.def("focal_from_fov", &FocalFromFov, py::arg("extent_px"), py::arg("fov_deg"));
}
