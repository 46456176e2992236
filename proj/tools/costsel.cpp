// costsel: command-line front end for cost-aware model schedules.
//
// Exit codes: 0 success, 1 usage error, 2 bad input data, 3 computation failure.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "costsel/costsel.hpp"

namespace fs = std::filesystem;
using namespace costsel;

namespace {

struct DataOptions {
  std::string data;
  std::string label_col = "label";
  double rho = 0.3;
  std::size_t n = 10'000;
};

struct CostOptions {
  std::string costs;
  std::vector<double> cost_range;
};

struct Common {
  DataOptions data;
  CostOptions cost;
  std::uint64_t seed = 1;
  std::size_t trees = 100;
  double gamma = kDefaultGamma;
  std::string out;
};

void add_data_options(CLI::App* cmd, DataOptions& d) {
  cmd->add_option("--data", d.data, "CSV file with a header row; a synthetic mixture is used when omitted");
  cmd->add_option("--label-col", d.label_col, "name of the label column")->capture_default_str();
  cmd->add_option("--rho", d.rho, "correlation of the synthetic mixture")->capture_default_str();
  cmd->add_option("--n", d.n, "rows of the synthetic mixture")->capture_default_str();
}

void add_cost_options(CLI::App* cmd, CostOptions& c) {
  auto* file = cmd->add_option("--costs", c.costs, "cost file: feature (name or 1-based index), cost");
  auto* range = cmd->add_option("--cost-range", c.cost_range, "draw costs uniformly from lo,hi")
                    ->delimiter(',')
                    ->expected(2);
  file->excludes(range);
}

Dataset load_data(const DataOptions& d, std::uint64_t seed) {
  if (!d.data.empty()) return load_dataset_csv(fs::path(d.data), d.label_col);
  return sample_mixture({d.rho, d.n, seed});
}

/// Cost file, drawn range, or (for the 8-variable mixture only) the reference profile.
CostProfile load_costs(const CostOptions& c, const Dataset& data, std::uint64_t seed) {
  if (!c.costs.empty()) return load_cost_profile(fs::path(c.costs), data.feature_names);
  if (!c.cost_range.empty()) {
    return sample_cost_profile(data.features(), c.cost_range[0], c.cost_range[1], derive_seed(seed, 1));
  }
  if (data.features() == kMixtureDim) return mixture_reference_profile();
  throw Error(ErrorCode::InvalidArgument, "give --costs or --cost-range");
}

SplitData split(const Dataset& data, std::uint64_t seed) {
  return make_split_data(data, split_dataset(data.rows(), derive_seed(seed, 2)));
}

MsbConfig msb_config(const Common& o) {
  MsbConfig cfg;
  cfg.forest.n_trees = o.trees;
  cfg.gamma = o.gamma;
  cfg.seed = derive_seed(o.seed, 3);
  return cfg;
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoError, "cannot create " + dir.string() + ": " + ec.message());
}

std::ofstream open_file(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  return out;
}

void write_label_sidecar(const Dataset& data, const fs::path& dir) {
  auto out = open_file(dir / "label_map.csv");
  write_label_map(out, data);
}

void print_schedule(const ModelSchedule& schedule, const std::string& out_file) {
  if (out_file.empty()) {
    write_schedule(std::cout, schedule);
    return;
  }
  auto out = open_file(out_file);
  write_schedule(out, schedule);
}

SequenceKind parse_kind(const std::string& s) {
  for (auto k : {SequenceKind::ByCost, SequenceKind::ByImportance, SequenceKind::BySampling, SequenceKind::ByL1Path}) {
    if (to_string(k) == s) return k;
  }
  throw Error(ErrorCode::InvalidArgument, "unknown sequence type '" + s + "'");
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument:
      return 1;
    case ErrorCode::InvalidVariableIndex:
    case ErrorCode::InvalidCost:
    case ErrorCode::InconsistentProfile:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::DegenerateLabels:
    case ErrorCode::InvalidCorrelation:
    case ErrorCode::MissingFile:
    case ErrorCode::ParseError:
    case ErrorCode::UnknownLabelColumn:
    case ErrorCode::EmptyDataset:
    case ErrorCode::DatasetTooSmall:
    case ErrorCode::IoError:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-aware model schedules: build, look up, and compare"};
  app.require_subcommand(1);
  Common o;

  auto* synth = app.add_subcommand("synth", "write a four-component Gaussian mixture sample");
  synth->add_option("--rho", o.data.rho, "correlation")->capture_default_str();
  synth->add_option("--n", o.data.n, "rows")->capture_default_str();
  synth->add_option("--seed", o.seed)->capture_default_str();
  synth->add_option("--out", o.out, "output CSV")->required();

  std::size_t n_features = 0;
  auto* costs = app.add_subcommand("costs", "draw a random cost profile");
  costs->add_option("--p", n_features, "number of features (or take them from --data)");
  costs->add_option("--data", o.data.data, "CSV whose feature names label the profile");
  costs->add_option("--label-col", o.data.label_col)->capture_default_str();
  costs->add_option("--cost-range", o.cost.cost_range, "lo,hi")->delimiter(',')->expected(2)->required();
  costs->add_option("--seed", o.seed)->capture_default_str();
  costs->add_option("--out", o.out, "output file (stdout when omitted)");

  auto setup = [&](CLI::App* cmd) {
    add_data_options(cmd, o.data);
    add_cost_options(cmd, o.cost);
    cmd->add_option("--seed", o.seed, "master seed")->capture_default_str();
    cmd->add_option("--trees", o.trees, "trees per forest")->capture_default_str();
    cmd->add_option("--gamma", o.gamma, "exponent of the normalized importance")->capture_default_str();
  };

  auto* schedule = app.add_subcommand("schedule", "build the ensemble schedule (msb)");
  setup(schedule);
  schedule->add_option("--out", o.out, "output directory (schedule to stdout when omitted)");

  std::string type = "cost";
  std::optional<double> budget;
  auto* sequence = app.add_subcommand("sequence", "run a single sequence generator");
  setup(sequence);
  sequence->add_option("--type", type, "cost, importance, sampling or l1path")
      ->check(CLI::IsMember({"cost", "importance", "sampling", "l1path"}))
      ->capture_default_str();
  sequence->add_option("--budget", budget, "discard sampled models above this cost");
  sequence->add_option("--out", o.out, "trace file (stdout when omitted)");

  std::string schedule_file;
  double lookup_budget = 0.0;
  auto* lookup = app.add_subcommand("lookup", "best model within a budget");
  lookup->add_option("--schedule", schedule_file, "schedule CSV")->required();
  lookup->add_option("--budget", lookup_budget)->required();

  auto* oracle = app.add_subcommand("oracle", "exhaustive search over all subsets of two or more variables");
  setup(oracle);
  oracle->add_option("--out", o.out, "output directory")->required();

  auto* compare = app.add_subcommand("compare", "msb against the L1-logistic baseline on one split");
  setup(compare);
  compare->add_option("--out", o.out, "output directory")->required();

  std::size_t runs = 100;
  auto* experiment = app.add_subcommand("experiment", "repeated msb vs logitb runs with random cost profiles");
  add_data_options(experiment, o.data);
  experiment->add_option("--cost-range", o.cost.cost_range, "lo,hi")->delimiter(',')->expected(2);
  experiment->add_option("--costs", o.cost.costs, "fixed cost file used by every run");
  experiment->add_option("--runs", runs)->capture_default_str();
  experiment->add_option("--seed", o.seed)->capture_default_str();
  experiment->add_option("--trees", o.trees)->capture_default_str();
  experiment->add_option("--gamma", o.gamma)->capture_default_str();
  experiment->add_option("--out", o.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    if (*synth) {
      const Dataset data = sample_mixture({o.data.rho, o.data.n, o.seed});
      auto out = open_file(o.out);
      write_dataset_csv(out, data);
      return 0;
    }

    if (*costs) {
      std::vector<std::string> names;
      if (!o.data.data.empty()) {
        names = load_dataset_csv(fs::path(o.data.data), o.data.label_col).feature_names;
        n_features = names.size();
      }
      if (n_features == 0) throw Error(ErrorCode::InvalidArgument, "give --p or --data");
      const auto profile =
          sample_cost_profile(n_features, o.cost.cost_range[0], o.cost.cost_range[1], derive_seed(o.seed, 1));
      if (o.out.empty()) {
        write_cost_profile(std::cout, profile, names);
      } else {
        auto out = open_file(o.out);
        write_cost_profile(out, profile, names);
      }
      return 0;
    }

    if (*lookup) {
      std::ifstream in(schedule_file);
      if (!in) throw Error(ErrorCode::MissingFile, "cannot open " + schedule_file);
      const ModelSchedule s = read_schedule(in);
      const ModelRecord& r = best_under_budget(s, Cost::from_double(lookup_budget));
      std::cout << "cost,val_accuracy,test_accuracy,variables,source\n"
                << r.cost.to_string() << ',' << format_double(r.val_accuracy) << ','
                << (r.test_accuracy ? format_double(*r.test_accuracy) : "") << ',' << r.variables.to_string() << ','
                << to_string(r.source) << '\n';
      return 0;
    }

    if (*experiment) {
      const Dataset data = load_data(o.data, o.seed);
      ExperimentConfig cfg;
      cfg.runs = runs;
      cfg.seed = o.seed;
      cfg.forest.n_trees = o.trees;
      cfg.gamma = o.gamma;
      if (!o.cost.cost_range.empty()) {
        cfg.cost_lo = o.cost.cost_range[0];
        cfg.cost_hi = o.cost.cost_range[1];
      }
      if (!o.cost.costs.empty()) cfg.fixed_costs = load_cost_profile(fs::path(o.cost.costs), data.feature_names);
      const ExperimentResult result = run_experiment(data, cfg);
      emit_outputs(result, o.out);
      write_label_sidecar(data, o.out);
      std::size_t failed = 0;
      for (const auto& r : result.runs) failed += r.error ? 1 : 0;
      std::cerr << result.runs.size() - failed << " of " << result.runs.size() << " runs completed\n";
      return failed == result.runs.size() ? 3 : 0;
    }

    const Dataset data = load_data(o.data, o.seed);
    const CostProfile profile = load_costs(o.cost, data, o.seed);
    if (profile.size() != data.features()) {
      throw Error(ErrorCode::DimensionMismatch, "cost profile length differs from the feature count");
    }
    const SplitData sd = split(data, o.seed);
    const MsbConfig cfg = msb_config(o);
    SubsetEvaluator engine(sd, engine_params(cfg));

    if (*schedule) {
      const MsbResult res = msb(engine, profile, cfg);
      if (o.out.empty()) {
        write_schedule(std::cout, res.schedule);
        return 0;
      }
      ensure_dir(o.out);
      print_schedule(res.schedule, (fs::path(o.out) / "schedule.csv").string());
      for (const auto& m : res.members) {
        auto out = open_file(fs::path(o.out) / ("trace_" + std::string(to_string(m.kind)) + ".csv"));
        write_trace(out, m);
      }
      auto svg = open_file(fs::path(o.out) / "schedule.svg");
      svg << render_staircase_svg(res.schedule, "msb");
      write_label_sidecar(data, o.out);
      return 0;
    }

    if (*sequence) {
      const SequenceKind kind = parse_kind(type);
      if (budget && kind != SequenceKind::BySampling) {
        throw Error(ErrorCode::InvalidArgument, "--budget applies to the sampling sequence only");
      }
      SequenceRun run;
      if (kind == SequenceKind::ByCost) {
        run = model_seq(engine, profile, RemovalRule::InverseCost);
      } else if (kind == SequenceKind::ByL1Path) {
        const auto grid = make_lambda_grid(sd.x_train, sd.y_train, cfg.lasso.n_lambda, cfg.lasso.eps_ratio);
        const auto path = fit_l1_logistic_path(sd.x_train, sd.y_train, grid, cfg.lasso);
        run = model_seq_l(&engine, sd, profile, path, PathEngine::Forest, cfg.lasso.zero_tol);
      } else {
        const Forest full = engine.fit(VariableSet::full(data.features()));
        const auto importance =
            permutation_importance(full, sd.x_val, sd.y_val, derive_seed(cfg.seed, detail::kImportanceStream));
        if (kind == SequenceKind::ByImportance) {
          run = model_seq(engine, profile, RemovalRule::Importance, &importance);
        } else {
          std::optional<Cost> cap;
          if (budget) cap = Cost::from_double(*budget);
          run = model_seq_sampled(engine, profile, importance, cfg.gamma, cap,
                                  derive_seed(cfg.seed, detail::kSamplingStream));
        }
      }
      if (o.out.empty()) {
        write_trace(std::cout, run);
      } else {
        auto out = open_file(o.out);
        write_trace(out, run);
      }
      return 0;
    }

    if (*oracle) {
      ensure_dir(o.out);
      const MsbResult res = msb(engine, profile, cfg);
      auto [optimal, space] = exhaustive_schedule(engine, profile);
      print_schedule(optimal, (fs::path(o.out) / "optimal_schedule.csv").string());
      print_schedule(res.schedule, (fs::path(o.out) / "msb_schedule.csv").string());
      {
        auto out = open_file(fs::path(o.out) / "solution_space.csv");
        write_solution_space(out, space);
      }
      const auto visited = res.distinct_visited();
      std::cout << "subsets evaluated: " << space.size() << '\n'
                << "msb distinct subsets: " << visited.size() << '\n'
                << "coverage: " << format_double(coverage_fraction(space, visited)) << '\n';
      return 0;
    }

    if (*compare) {
      ensure_dir(o.out);
      const MsbResult res = msb(engine, profile, cfg);
      const ModelSchedule base = logitb_schedule(sd, profile, cfg.lasso);
      print_schedule(res.schedule, (fs::path(o.out) / "msb.csv").string());
      print_schedule(base, (fs::path(o.out) / "logitb.csv").string());
      auto a = open_file(fs::path(o.out) / "msb.svg");
      a << render_staircase_svg(res.schedule, "msb");
      auto b = open_file(fs::path(o.out) / "logitb.svg");
      b << render_staircase_svg(base, "logitb");
      std::cout << "normalized_cost,msb_test_accuracy,logitb_test_accuracy\n";
      const double full = profile.full_cost().value();
      for (double q : {0.25, 0.5, 0.75, 1.0}) {
        const Cost c = Cost::from_double(q * full);
        auto acc = [&](const ModelSchedule& s) -> std::string {
          const auto& recs = s.records();
          std::optional<double> v;
          for (const auto& r : recs) {
            if (r.cost <= c) v = r.test_accuracy;
          }
          return v ? format_double(*v) : std::string("NA");
        };
        std::cout << format_double(q) << ',' << acc(res.schedule) << ',' << acc(base) << '\n';
      }
      return 0;
    }
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << " (row " << e.row() << ", column " << e.col() << ")\n";
    return 2;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 1;
}
