#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "netcut/analytical.hpp"
#include "netcut/config.hpp"
#include "netcut/error.hpp"
#include "netcut/evaluator.hpp"
#include "netcut/explorer.hpp"
#include "netcut/report.hpp"
#include "netcut/svg.hpp"

// The CLI subcommands as library functions returning process exit codes:
// 0 success (an infeasible exploration is a success), 1 usage or config
// error, 2 data validation error, 3 evaluator failure.
namespace netcut::cli {

enum ExitCode : int { kOk = 0, kConfigError = 1, kDataError = 2, kEvaluatorError = 3 };

inline constexpr const char* kVersion = "0.1.0";

// Runs `fn`, mapping library exceptions onto exit codes.
template <class Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const EvaluatorError& e) {
    err << "evaluator error: " << e.what() << '\n';
    return kEvaluatorError;
  } catch (const ValidationError& e) {
    err << "validation error: " << e.what() << '\n';
    return kDataError;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "config error: " << e.what() << '\n';
    return kConfigError;
  }
}

inline std::filesystem::path output_dir(const RunConfig& cfg) {
  std::filesystem::path out(cfg.output_dir);
  if (out.is_relative()) out = cfg.base_dir / out;
  std::filesystem::create_directories(out);
  return out;
}

inline std::string utc_timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ss;
  ss << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return ss.str();
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

// ---------------------------------------------------------------------------
// Analytical model acquisition

struct TrainedModel {
  std::shared_ptr<const svr::Model> model;
  std::optional<TuningReport> tuning;
  std::vector<TrainingSample> test;
};

// Loads analytical.model_path when configured, otherwise tunes and trains on
// the training share of the ground truth.
inline TrainedModel obtain_model(const Workspace& ws) {
  const auto& a = ws.config.analytical;
  TrainedModel out;
  if (a.model_path) {
    const auto path = ws.config.resolve(*a.model_path);
    require_file(path, "model");
    out.model = std::make_shared<svr::Model>(svr::model_from_json(detail::parse_json_file(path), path));
    return out;
  }
  if (!ws.truth) {
    throw ConfigError("analytical estimator needs 'analytical.model_path' or a 'ground_truth' file to train on");
  }
  auto samples = build_samples(ws.nets, ws.profiles, *ws.truth);
  auto [train, test] = split_train_test(samples, a.train_fraction);
  auto tuned = grid_search_cv(train, make_grid(a.gamma_grid, a.c_grid), a.epsilon, a.folds, a.kernel, ws.config.jobs);
  out.model = std::make_shared<svr::Model>(std::move(tuned.model));
  out.tuning = std::move(tuned.report);
  out.test = std::move(test);
  return out;
}

// ---------------------------------------------------------------------------
// validate

// Loads every input and reports each problem found; exit 0 iff consistent.
inline int cmd_validate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  std::size_t config_problems = 0, data_problems = 0;
  auto report = [&](const std::string& what, bool is_config) {
    err << (is_config ? "config error: " : "validation error: ") << what << '\n';
    (is_config ? config_problems : data_problems)++;
  };
  auto attempt = [&](auto&& fn) {
    try {
      fn();
      return true;
    } catch (const ValidationError& e) {
      report(e.what(), false);
    } catch (const ConfigError& e) {
      report(e.what(), true);
    }
    return false;
  };

  std::vector<NetworkDescriptor> nets;
  for (const auto& e : cfg.networks) {
    NetworkDescriptor net;
    const auto dpath = cfg.resolve(e.descriptor);
    const auto ppath = cfg.resolve(e.profile);
    if (!attempt([&] {
          require_file(dpath, "descriptor");
          net = load_descriptor(dpath);
        })) {
      continue;
    }
    if (std::any_of(nets.begin(), nets.end(), [&](const NetworkDescriptor& n) { return n.name == net.name; })) {
      report("network '" + net.name + "' listed twice", false);
      continue;
    }
    if (attempt([&] {
          require_file(ppath, "profile");
          const auto t = load_profile(ppath, net);
          out << "ok  " << net.name << ": " << net.layer_count() << " layers, " << net.blocks.size() << " blocks, "
              << enumerate_blockwise(net).size() << " blockwise TRNs, measured " << t.measured_latency_ms
              << " ms, layer-sum ratio " << profiler_overhead_ratio(t) << '\n';
        })) {
      nets.push_back(std::move(net));
    }
  }
  if (cfg.ground_truth) {
    attempt([&] {
      const auto path = cfg.resolve(*cfg.ground_truth);
      require_file(path, "ground truth");
      const auto gt = load_ground_truth(path);
      check_truth(gt, nets);
      out << "ok  ground truth: " << gt.latency_ms.size() << " rows\n";
    });
  }
  if (cfg.has_evaluator && cfg.evaluator.backend == EvaluatorBackend::Table) {
    attempt([&] {
      const auto e = resolved_evaluator(cfg);
      const auto table = load_accuracy_table(e.table_path);
      for (const auto& [key, acc] : table.entries) {
        auto it = std::find_if(nets.begin(), nets.end(), [&](const NetworkDescriptor& n) { return n.name == key.first; });
        if (it == nets.end()) {
          report("accuracy table names unknown network '" + key.first + "'", false);
        } else if (key.second >= it->layer_count()) {
          report("accuracy table cutpoint " + std::to_string(key.second) + " out of range for network '" +
                     key.first + "'",
                 false);
        }
      }
      out << "ok  accuracy table: " << table.entries.size() << " rows\n";
    });
  }
  if (cfg.analytical.model_path) {
    attempt([&] {
      const auto path = cfg.resolve(*cfg.analytical.model_path);
      require_file(path, "model");
      const auto m = svr::model_from_json(detail::parse_json_file(path), path);
      if (m.scaler.mean.size() != FeatureVector::kSize) {
        throw ValidationError(path + ": model expects " + std::to_string(m.scaler.mean.size()) +
                              " features, the latency features have " + std::to_string(FeatureVector::kSize));
      }
      out << "ok  model: " << m.support_vectors.size() << " support vectors\n";
    });
  }
  if (config_problems + data_problems == 0) {
    out << "configuration is consistent\n";
    return kOk;
  }
  err << config_problems + data_problems << " problem(s) found\n";
  return config_problems > 0 ? kConfigError : kDataError;
}

// ---------------------------------------------------------------------------
// estimate

inline int cmd_estimate(const RunConfig& cfg, const std::string& network, std::size_t cutpoint, std::ostream& out,
                        std::ostream& err) {
  return guarded(err, [&] {
    const auto ws = load_workspace(cfg);
    const auto& net = ws.net(network);
    const auto& table = ws.profile(network);
    const auto trn = remove_layers(net, cutpoint);
    const bool use_prof = cfg.estimator != EstimatorChoice::Analytical;
    const bool use_ana = cfg.estimator != EstimatorChoice::Profiler;
    std::optional<TrainedModel> tm;
    if (use_ana) tm = obtain_model(ws);

    out << std::fixed << std::setprecision(4);
    out << "network " << net.name << ", cutpoint " << cutpoint << ": " << net.layer_count() - cutpoint << " of "
        << net.layer_count() << " layers retained\n";
    const double* truth = ws.truth ? ws.truth->find(network, cutpoint) : nullptr;
    auto line = [&](const char* label, const LatencyEstimate& e) {
      out << "  " << std::left << std::setw(12) << label << std::right << std::setw(10) << e.value_ms << " ms";
      if (truth) out << "   relative error " << std::setprecision(2) << relative_error(e.value_ms, *truth) << " %"
                     << std::setprecision(4);
      if (e.extrapolated) out << "   (outside training range)";
      out << '\n';
    };
    if (use_prof) line("profiler", estimate_profiler(table, trn));
    if (use_ana) line("analytical", predict(*tm->model, extract_features(net, table, trn), trn));
    if (truth) out << "  " << std::left << std::setw(12) << "measured" << std::right << std::setw(10) << *truth << " ms\n";

    if (ws.truth) {
      // Mean relative error per network over every TRN with a measurement.
      out << "\nmean relative error over ground truth (%)\n";
      out << "  " << std::left << std::setw(22) << "network" << std::right << std::setw(8) << "TRNs";
      if (use_prof) out << std::setw(12) << "profiler";
      if (use_ana) out << std::setw(12) << "analytical";
      out << '\n' << std::setprecision(2);
      double tot_p = 0, tot_a = 0;
      std::size_t tot_n = 0;
      for (const auto& n : ws.nets) {
        const auto& t = ws.profile(n.name);
        double sp = 0, sa = 0;
        std::size_t cnt = 0;
        for (const auto& [key, lat] : ws.truth->latency_ms) {
          if (key.first != n.name) continue;
          const TrimmedNetworkSpec s{n.name, key.second, Granularity::Layerwise};
          if (use_prof) sp += relative_error(estimate_profiler(t, s).value_ms, lat);
          if (use_ana) sa += relative_error(predict(*tm->model, extract_features(n, t, s)).value_ms, lat);
          ++cnt;
        }
        if (cnt == 0) continue;
        out << "  " << std::left << std::setw(22) << n.name << std::right << std::setw(8) << cnt;
        if (use_prof) out << std::setw(12) << sp / cnt;
        if (use_ana) out << std::setw(12) << sa / cnt;
        out << '\n';
        tot_p += sp;
        tot_a += sa;
        tot_n += cnt;
      }
      if (tot_n > 0) {
        out << "  " << std::left << std::setw(22) << "all" << std::right << std::setw(8) << tot_n;
        if (use_prof) out << std::setw(12) << tot_p / tot_n;
        if (use_ana) out << std::setw(12) << tot_a / tot_n;
        out << '\n';
      }
    }
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// explore

struct ExploreResult {
  ExplorationReport report;
  nlohmann::json json;  // report body plus "metadata"
};

inline ExploreResult run_explore(const RunConfig& cfg) {
  if (!cfg.deadline_ms) throw ConfigError("explore needs a deadline (config 'deadline_ms' or --deadline-ms)");
  if (cfg.estimator == EstimatorChoice::Both) {
    throw ConfigError("explore runs one estimator at a time; choose profiler or analytical");
  }
  const auto ws = load_workspace(cfg);
  const auto evaluator = make_evaluator(resolved_evaluator(cfg));
  LatencyEstimator est = profiler_estimator();
  if (cfg.estimator == EstimatorChoice::Analytical) est = analytical_estimator(obtain_model(ws).model);
  NetcutOptions opt;
  opt.jobs = cfg.jobs;
  opt.unit_cost_hours = cfg.unit_cost_hours;
  opt.estimator_name = to_string(cfg.estimator);
  ExploreResult res;
  res.report = netcut(ws.nets, ws.profiles, est, Deadline(*cfg.deadline_ms), *evaluator, cfg.granularity, opt);
  res.json = to_json(res.report);
  if (!res.report.frontier.empty()) {
    res.json["gap_analysis"] = to_json(gap_analysis(res.report.frontier, Deadline(*cfg.deadline_ms)));
  }
  res.json["metadata"] = {{"generated_at", utc_timestamp()}, {"tool", std::string("netcut ") + kVersion}};
  return res;
}

// Writes report.json, pareto.csv and summary.txt into the output directory.
inline int cmd_explore(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto res = run_explore(cfg);
    const auto dir = output_dir(cfg);
    std::ostringstream summary, csv;
    write_summary(summary, res.report);
    write_pareto_csv(csv, res.report.points, res.report.frontier);
    write_text(dir / "report.json", res.json.dump(2) + "\n");
    write_text(dir / "pareto.csv", csv.str());
    write_text(dir / "summary.txt", summary.str());
    out << summary.str();
    out << "\nwrote " << (dir / "report.json").string() << ", pareto.csv, summary.txt\n";
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// pareto

// Evaluates every blockwise TRN and writes blockwise_pareto.csv (and .svg).
inline int cmd_pareto(const RunConfig& cfg, bool svg_out, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto ws = load_workspace(cfg);
    std::vector<ParetoPoint> points;
    if (!ws.nets.empty()) {
      const auto evaluator = make_evaluator(resolved_evaluator(cfg));
      points = explore_blockwise(ws.nets, ws.profiles, *evaluator, ws.truth ? &*ws.truth : nullptr, cfg.jobs);
    }
    const auto frontier = pareto_frontier(points);
    const auto dir = output_dir(cfg);
    std::ostringstream csv;
    write_pareto_csv(csv, points, frontier);
    write_text(dir / "blockwise_pareto.csv", csv.str());
    out << points.size() << " blockwise TRNs, " << frontier.size() << " on the frontier\n";
    if (cfg.deadline_ms && !frontier.empty()) {
      const auto g = gap_analysis(frontier, Deadline(*cfg.deadline_ms));
      out << std::fixed << std::setprecision(4);
      if (g.feasible) {
        out << "best within " << *cfg.deadline_ms << " ms: " << g.best->trn.source << " cutpoint " << g.best->trn.cutpoint
            << ", accuracy " << g.best->accuracy << ", latency " << g.best->latency_ms << " ms, slack " << *g.slack_ms
            << " ms\n";
        if (g.next_above) {
          out << "next frontier point past the deadline: " << g.next_above->trn.source << " cutpoint "
              << g.next_above->trn.cutpoint << " (+" << g.accuracy_gap << " accuracy)\n";
        }
      } else {
        out << "infeasible: no frontier point within " << *cfg.deadline_ms << " ms\n";
      }
      out.unsetf(std::ios::floatfield);
    }
    if (svg_out) {
      std::ostringstream s;
      svg::PlotOptions opt;
      opt.deadline_ms = cfg.deadline_ms;
      opt.title = "Blockwise TRNs: latency vs. accuracy";
      svg::write_scatter(s, points, frontier, opt);
      write_text(dir / "blockwise_pareto.svg", s.str());
    }
    out << "wrote " << (dir / "blockwise_pareto.csv").string() << (svg_out ? " and blockwise_pareto.svg" : "") << '\n';
    return kOk;
  });
}

// ---------------------------------------------------------------------------
// train-model

// Grid search on the training share of the ground truth; writes model.json
// and tuning.json. A linear-kernel baseline is tuned over the same C grid for
// comparison.
inline int cmd_train_model(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const auto ws = load_workspace(cfg);
    if (!ws.truth) throw ConfigError("train-model needs a 'ground_truth' file");
    const auto& a = cfg.analytical;
    const auto samples = build_samples(ws.nets, ws.profiles, *ws.truth);
    auto [train, test] = split_train_test(samples, a.train_fraction);
    if (train.size() < a.folds) {
      throw ConfigError("train-model: " + std::to_string(train.size()) + " training samples are fewer than " +
                        std::to_string(a.folds) + " folds");
    }
    const auto tuned = grid_search_cv(train, make_grid(a.gamma_grid, a.c_grid), a.epsilon, a.folds, a.kernel, cfg.jobs);
    const auto dir = output_dir(cfg);
    write_text(dir / "model.json", svr::to_json(tuned.model).dump(2) + "\n");

    auto tuning = to_json(tuned.report);
    tuning["train_samples"] = train.size();
    tuning["test_samples"] = test.size();
    tuning["test_mean_relative_error_pct"] = mean_relative_error(tuned.model, test);
    out << std::setprecision(6);
    out << "samples: " << train.size() << " train, " << test.size() << " test, " << a.folds << "-fold CV over "
        << tuned.report.grid.size() << " cells\n";
    out << "selected (gamma, C) = (" << tuned.report.selected.gamma << ", " << tuned.report.selected.c << ")\n";
    out << std::fixed << std::setprecision(2);
    out << "mean relative CV error: " << tuned.report.selected.mean_cv_error_pct << " %\n";
    if (!test.empty()) out << "mean relative test error: " << mean_relative_error(tuned.model, test) << " %\n";
    if (a.kernel == svr::Kernel::Rbf) {
      std::vector<GridCell> lin;
      for (double c : a.c_grid) lin.push_back({0, c});
      const auto base = grid_search_cv(train, lin, a.epsilon, a.folds, svr::Kernel::Linear, cfg.jobs);
      tuning["linear_baseline"] = to_json(base.report);
      tuning["linear_baseline"]["test_mean_relative_error_pct"] = mean_relative_error(base.model, test);
      out << "linear-kernel baseline: CV " << base.report.selected.mean_cv_error_pct << " %, test "
          << mean_relative_error(base.model, test) << " %\n";
    }
    write_text(dir / "tuning.json", tuning.dump(2) + "\n");
    out << "wrote " << (dir / "model.json").string() << " and tuning.json\n";
    return kOk;
  });
}

}  // namespace netcut::cli
