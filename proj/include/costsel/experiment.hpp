#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "costsel/cost.hpp"
#include "costsel/dataset.hpp"
#include "costsel/error.hpp"
#include "costsel/evaluator.hpp"
#include "costsel/format.hpp"
#include "costsel/io.hpp"
#include "costsel/schedule.hpp"
#include "costsel/sequences.hpp"
#include "costsel/smoothing.hpp"

namespace costsel {

struct ExperimentConfig {
  std::size_t runs = 100;
  double cost_lo = 1.0;
  double cost_hi = 100.0;
  /// When set, every run uses this profile instead of drawing one.
  std::optional<CostProfile> fixed_costs;
  std::uint64_t seed = 1;
  ForestParams forest;
  double gamma = kDefaultGamma;
  double span = kDefaultSpan;
  LassoSettings lasso;
};

struct RunResult {
  std::size_t run = 0;  // 1-based
  CostProfile profile;
  ModelSchedule msb;
  ModelSchedule logitb;
  std::vector<SequenceRun> members;
  std::optional<std::string> error;
};

struct ScatterPoint {
  double normalized_cost = 0.0;
  double accuracy = 0.0;
  std::string method;
  std::size_t run = 0;
};

struct ExperimentResult {
  std::vector<RunResult> runs;
  std::vector<ScatterPoint> points;
  /// Smoothed curve per method ("msb", "logitb"); absent when too few points.
  std::map<std::string, std::vector<CurvePoint>> curves;
};

/// Seeds of run r: cost profile, data split, and the msb run itself.
struct RunSeeds {
  std::uint64_t costs;
  std::uint64_t split;
  std::uint64_t msb;

  static RunSeeds of(std::uint64_t master, std::size_t run) {
    const std::uint64_t root = derive_seed(master, run);
    return {derive_seed(root, 1), derive_seed(root, 2), derive_seed(root, 3)};
  }
};

/// Scatter points of one schedule: cost over full-model cost against test
/// accuracy. Zero-cost (intercept-only) models are left out.
inline std::vector<ScatterPoint> schedule_points(const ModelSchedule& schedule, const CostProfile& profile,
                                                 const std::string& method, std::size_t run) {
  std::vector<ScatterPoint> out;
  const double full = profile.full_cost().value();
  for (const auto& r : schedule) {
    if (r.cost.cents() <= 0 || !r.test_accuracy) continue;
    out.push_back({r.cost.value() / full, *r.test_accuracy, method, run});
  }
  return out;
}

inline RunResult run_once(const Dataset& dataset, const ExperimentConfig& config, std::size_t run) {
  const RunSeeds seeds = RunSeeds::of(config.seed, run);
  RunResult result;
  result.run = run;
  result.profile = config.fixed_costs
                       ? *config.fixed_costs
                       : sample_cost_profile(dataset.features(), config.cost_lo, config.cost_hi, seeds.costs);
  if (result.profile.size() != dataset.features()) {
    throw Error(ErrorCode::DimensionMismatch, "cost profile length differs from the feature count");
  }
  const SplitData data = make_split_data(dataset, split_dataset(dataset.rows(), seeds.split));
  MsbConfig msb_config;
  msb_config.forest = config.forest;
  msb_config.gamma = config.gamma;
  msb_config.seed = seeds.msb;
  msb_config.lasso = config.lasso;
  SubsetEvaluator engine(data, engine_params(msb_config));
  MsbResult ensemble = msb(engine, result.profile, msb_config);
  result.msb = std::move(ensemble.schedule);
  result.members = std::move(ensemble.members);
  result.logitb = logitb_schedule(data, result.profile, config.lasso);
  return result;
}

/// Repeats msb and logitb over `config.runs` fresh cost profiles and splits,
/// pools normalized schedule points, and smooths each method's cloud. A
/// failing run is kept with its error and the remaining runs continue.
inline ExperimentResult run_experiment(const Dataset& dataset, const ExperimentConfig& config) {
  if (config.runs < 1) throw Error(ErrorCode::InvalidArgument, "runs must be at least 1");
  ExperimentResult result;
  for (std::size_t run = 1; run <= config.runs; ++run) {
    try {
      result.runs.push_back(run_once(dataset, config, run));
    } catch (const Error& e) {
      RunResult failed;
      failed.run = run;
      failed.error = e.what();
      result.runs.push_back(std::move(failed));
      continue;
    }
    const auto& r = result.runs.back();
    for (auto& pt : schedule_points(r.msb, r.profile, "msb", run)) result.points.push_back(std::move(pt));
    for (auto& pt : schedule_points(r.logitb, r.profile, "logitb", run)) result.points.push_back(std::move(pt));
  }
  for (const std::string method : {"msb", "logitb"}) {
    std::vector<CurvePoint> cloud;
    for (const auto& pt : result.points) {
      if (pt.method == method) cloud.push_back({pt.normalized_cost, pt.accuracy});
    }
    if (cloud.size() >= 5) result.curves[method] = smooth_schedule(cloud, config.span);
  }
  return result;
}

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

inline std::string run_tag(std::size_t run) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "run_%03zu", run);
  return buf;
}

}  // namespace detail

/// Writes, under out_dir:
///   scatter.csv      normalized_cost,accuracy,method,run
///   curves.csv       normalized_cost,smoothed_accuracy,method
///   failures.csv     run,error
///   schedules/run_NNN_{msb,logitb}.csv
///   traces/run_NNN_{cost,importance,sampling,l1path}.csv
///   plots/run_NNN_{msb,logitb}.svg
inline void emit_outputs(const ExperimentResult& result, const std::filesystem::path& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  for (const char* sub : {"", "schedules", "traces", "plots"}) {
    fs::create_directories(out_dir / sub, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + (out_dir / sub).string() + ": " + ec.message());
  }
  {
    auto out = detail::open_output(out_dir / "scatter.csv");
    out << "normalized_cost,accuracy,method,run\n";
    for (const auto& pt : result.points) {
      out << format_double(pt.normalized_cost) << ',' << format_double(pt.accuracy) << ',' << pt.method << ','
          << pt.run << '\n';
    }
  }
  {
    auto out = detail::open_output(out_dir / "curves.csv");
    out << "normalized_cost,smoothed_accuracy,method\n";
    for (const auto& [method, curve] : result.curves) {
      for (const auto& pt : curve) out << format_double(pt.x) << ',' << format_double(pt.y) << ',' << method << '\n';
    }
  }
  {
    auto out = detail::open_output(out_dir / "failures.csv");
    out << "run,error\n";
    for (const auto& r : result.runs) {
      if (!r.error) continue;
      std::string msg = *r.error;
      std::replace(msg.begin(), msg.end(), ',', ';');
      std::replace(msg.begin(), msg.end(), '\n', ' ');
      out << r.run << ',' << msg << '\n';
    }
  }
  for (const auto& r : result.runs) {
    if (r.error) continue;
    const std::string tag = detail::run_tag(r.run);
    {
      auto out = detail::open_output(out_dir / "schedules" / (tag + "_msb.csv"));
      write_schedule(out, r.msb);
    }
    {
      auto out = detail::open_output(out_dir / "schedules" / (tag + "_logitb.csv"));
      write_schedule(out, r.logitb);
    }
    for (const auto& m : r.members) {
      auto out = detail::open_output(out_dir / "traces" / (tag + "_" + std::string(to_string(m.kind)) + ".csv"));
      write_trace(out, m);
    }
    {
      auto out = detail::open_output(out_dir / "plots" / (tag + "_msb.svg"));
      out << render_staircase_svg(r.msb, tag + " msb");
    }
    {
      auto out = detail::open_output(out_dir / "plots" / (tag + "_logitb.svg"));
      out << render_staircase_svg(r.logitb, tag + " logitb");
    }
  }
}

}  // namespace costsel
