#include "hfocal/bench.h"
#include "hfocal/generator_table.h"
#include "hfocal/ransac.h"
#include "hfocal/solvers.h"

#include "CLI11.hpp"
#include "json.hpp"

#include <chrono>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

using namespace hfocal;

namespace {

struct Output {
  std::string path;

  std::ostream& stream() {
    if (path.empty() || path == "-") return std::cout;
    if (!file) {
      file = std::make_unique<std::ofstream>(path, std::ios::binary);
      if (!*file) throw Error(ErrorCode::kIoError, "cannot write " + path);
    }
    return *file;
  }

 private:
  std::unique_ptr<std::ofstream> file;
};

std::optional<std::pair<double, double>> ParseFovRange(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const auto colon = s.find(':');
  if (colon == std::string::npos) throw CLI::ValidationError("--fov-filter", "expected MIN:MAX");
  return std::make_pair(std::stod(s.substr(0, colon)), std::stod(s.substr(colon + 1)));
}

struct RansacFlags {
  RansacConfig cfg;
  std::string fov;

  void Add(CLI::App* app) {
    app->add_option("--max-iterations", cfg.max_iterations)->capture_default_str();
    app->add_option("--min-iterations", cfg.min_iterations)->capture_default_str();
    app->add_option("--confidence", cfg.confidence)->capture_default_str();
    app->add_option("--sampson-threshold", cfg.sampson_threshold_px, "pixels")
        ->capture_default_str();
    app->add_option("--fov-filter", fov, "horizontal FOV range in degrees, MIN:MAX");
    app->add_option("--lo-max-lm-iters", cfg.lo_max_lm_iters)->capture_default_str();
    app->add_flag("!--no-local-optimization", cfg.local_optimization);
    app->add_option("--ratio-deviation", cfg.ratio_deviation)->capture_default_str();
    app->add_option("--residual-gate", cfg.residual_gate)->capture_default_str();
    app->add_option("--threads", cfg.num_threads)->capture_default_str();
    app->add_option("--batch-size", cfg.batch_size)->capture_default_str();
  }

  RansacConfig Get(std::uint64_t seed) {
    RansacConfig c = cfg;
    c.rng_seed = seed;
    c.fov_filter = ParseFovRange(fov);
    c.Validate();
    return c;
  }
};

struct SynthFlags {
  SynthConfig cfg;

  void Add(CLI::App* app, bool with_noise) {
    app->add_option("--n-points", cfg.n_points)->capture_default_str();
    if (with_noise) {
      app->add_option("--planar-fraction", cfg.planar_fraction)->capture_default_str();
      app->add_option("--noise-sigma", cfg.noise_sigma, "pixels")->capture_default_str();
    }
    app->add_option("--inlier-ratio", cfg.inlier_ratio)->capture_default_str();
    app->add_option("--f-min", cfg.f_min)->capture_default_str();
    app->add_option("--f-max", cfg.f_max)->capture_default_str();
    app->add_option("--width", cfg.image_width)->capture_default_str();
    app->add_option("--height", cfg.image_height)->capture_default_str();
    app->add_option("--baseline-fraction", cfg.baseline_fraction)->capture_default_str();
    app->add_flag("--pure-translation", cfg.pure_translation);
  }
};

nlohmann::ordered_json PoseJson(const Pose& p) {
  nlohmann::ordered_json j;
  j["R"] = nlohmann::json::array();
  for (int r = 0; r < 3; ++r) j["R"].push_back({p.R(r, 0), p.R(r, 1), p.R(r, 2)});
  j["t"] = {p.t.x(), p.t.y(), p.t.z()};
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Focal lengths and poses from three views of a plane"};
  app.require_subcommand(1);
  app.fallthrough();
  std::uint64_t seed = 0;
  std::string case_name = "fff";
  Output out;
  app.add_option("--seed", seed, "random seed")->capture_default_str();
  app.add_option("-o,--output", out.path, "output file (default stdout)");
  auto add_case = [&](CLI::App* sub) {
    sub->add_option("--case", case_name, "fff, ff, frr or fr")
        ->check(CLI::IsMember({"fff", "ff", "frr", "fr"}))
        ->capture_default_str();
  };

  // solve
  auto* solve = app.add_subcommand("solve", "estimate focals and poses for each record of a triplet file");
  std::string solve_input;
  double known_f1 = 0.0;
  RansacFlags solve_flags;
  solve->add_option("input", solve_input, "triplet dataset JSON")->required();
  solve->add_option("--f1", known_f1, "known focal of view 1 (default: record f_gt)");
  add_case(solve);
  solve_flags.Add(solve);

  // synth-stability
  auto* stab = app.add_subcommand("synth-stability", "noiseless solver stability histogram");
  int stab_scenes = 10000;
  std::vector<std::string> stab_cases;
  bool stab_pure = false;
  stab->add_option("--scenes", stab_scenes)->capture_default_str();
  stab->add_option("--case", stab_cases, "cases to run (default all)")
      ->check(CLI::IsMember({"fff", "ff", "frr", "fr"}));
  stab->add_flag("--pure-translation", stab_pure);

  // synth-sweep
  auto* sweep = app.add_subcommand("synth-sweep", "RANSAC accuracy over a synthetic grid");
  SweepConfig sweep_cfg;
  SynthFlags sweep_synth;
  RansacFlags sweep_ransac;
  sweep_ransac.cfg.max_iterations = 100;
  sweep_ransac.cfg.min_iterations = 100;
  add_case(sweep);
  sweep_synth.Add(sweep, false);
  sweep_ransac.Add(sweep);
  sweep->add_option("--planar-fractions", sweep_cfg.planar_fractions)->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--noise-sigmas", sweep_cfg.noise_sigmas)->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--focal-perturbations", sweep_cfg.focal_perturbations)->delimiter(',')
      ->capture_default_str();
  sweep->add_option("--scenes", sweep_cfg.scenes_per_cell, "scenes per cell")
      ->capture_default_str();

  // synth-dataset
  auto* synth_ds = app.add_subcommand("synth-dataset", "write synthetic scenes as a triplet file");
  SynthFlags ds_synth;
  ds_synth.cfg.n_scenes = 10;
  add_case(synth_ds);
  ds_synth.Add(synth_ds, true);
  synth_ds->add_option("--scenes", ds_synth.cfg.n_scenes)->capture_default_str();

  // benchmark
  auto* bench = app.add_subcommand("benchmark", "evaluate on a triplet dataset");
  std::string bench_input;
  RansacFlags bench_flags;
  bench->add_option("input", bench_input, "triplet dataset JSON")->required();
  add_case(bench);
  bench_flags.Add(bench);

  // verify-generators
  auto* verify = app.add_subcommand("verify-generators", "check the generator table on exact instances");
  std::string table_path;
  int trials = 1000;
  double threshold = 1e-9;
  verify->add_option("--table", table_path, "generator table JSON (default built-in)");
  verify->add_option("--trials", trials)->capture_default_str();
  verify->add_option("--threshold", threshold)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*solve) {
      const FocalCase fc = ParseFocalCase(case_name);
      const TripletDataset ds = LoadDataset(solve_input);
      RansacConfig rc = solve_flags.Get(seed);
      nlohmann::ordered_json results = nlohmann::ordered_json::array();
      for (size_t i = 0; i < ds.records.size(); ++i) {
        const auto& rec = ds.records[i];
        nlohmann::ordered_json r;
        r["record"] = i;
        r["camera_ids"] = rec.camera_ids;
        rc.image_sizes = rec.image_sizes;
        std::optional<double> f1;
        if (CaseHasKnownF1(fc)) {
          if (known_f1 > 0) f1 = known_f1;
          else f1 = rec.f_gt[0];
        }
        try {
          const auto res = Estimate(CenteredTriplets(rec), fc, f1, rc);
          r["case"] = FocalCaseName(fc);
          r["focals"] = {res.model.f1, res.model.f2, res.model.f3};
          r["pose2"] = PoseJson(res.model.pose2);
          r["pose3"] = PoseJson(res.model.pose3);
          r["inliers"] = res.inlier_count;
          r["iterations"] = res.iterations;
          r["runtime_ms"] = res.timings.total_ms;
        } catch (const Error& e) {
          r["error"] = e.what();
        }
        results.push_back(r);
      }
      out.stream() << results.dump(2) << '\n';
    } else if (*stab) {
      if (stab_cases.empty()) stab_cases = {"fff", "ff", "frr", "fr"};
      std::vector<StabilityResult> results;
      for (const auto& c : stab_cases) {
        results.push_back(StabilityExperiment(ParseFocalCase(c), stab_scenes, seed, stab_pure));
        const auto& r = results.back();
        std::cerr << c << ": median log10 xi " << r.median << ", p99 " << r.p99 << ", failures "
                  << r.failures << "/" << stab_scenes << ", " << r.seconds << " s\n";
      }
      WriteStabilityHistogram(out.stream(), results);
    } else if (*sweep) {
      sweep_cfg.scene = sweep_synth.cfg;
      sweep_cfg.scene.focal_case = ParseFocalCase(case_name);
      sweep_cfg.scene.rng_seed = seed;
      sweep_cfg.ransac = sweep_ransac.Get(seed);
      WriteSweepCsv(out.stream(), AccuracySweep(sweep_cfg));
    } else if (*synth_ds) {
      ds_synth.cfg.focal_case = ParseFocalCase(case_name);
      ds_synth.cfg.rng_seed = seed;
      out.stream() << SerializeDataset(SyntheticDataset(ds_synth.cfg));
    } else if (*bench) {
      const auto ds = LoadDataset(bench_input);
      const auto row = RunBenchmark(ds, ParseFocalCase(case_name), bench_flags.Get(seed));
      if (row.skipped > 0) std::cerr << "skipped " << row.skipped << " records\n";
      WriteBenchmarkCsv(out.stream(), {row});
    } else if (*verify) {
      const GeneratorTable table =
          table_path.empty() ? GeneratorTable::Builtin() : GeneratorTable::Load(table_path);
      const auto rep = VerifyGenerators(table, trials, seed, threshold);
      out.stream() << "generators " << table.size() << "\ntrials " << rep.trials
                   << "\nmax_normalized_residual " << rep.max_residual
                   << "\nmedian_perturbed_residual " << rep.median_perturbed_residual << "\nseconds "
                   << rep.seconds << '\n'
                   << (rep.pass ? "PASS" : "FAIL") << '\n';
      return rep.pass ? 0 : 1;
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
