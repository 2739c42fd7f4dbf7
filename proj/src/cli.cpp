#include "minexp/cli.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <nlohmann/json.hpp>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "minexp/shooting.hpp"

namespace minexp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

void copy_file_to(const std::string& src, const fs::path& dst) {
  std::ifstream in(src, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  write_text_file(dst, ss.str());
}

json loss_report_json(const LossReport& r) {
  json losses = json::object();
  for (int k = 0; k < 10; ++k) {
    losses["L" + std::to_string(k + 1)] = r.losses[k];
  }
  // Wall time is intentionally excluded so reruns with the same seed produce
  // byte-identical artifacts.
  return json{{"losses", losses},
              {"reg", r.reg},
              {"epochs", r.epochs},
              {"converged", r.converged},
              {"diverged", r.diverged},
              {"divergence_reason", r.divergence_reason}};
}

int resolve_config(const ScenarioFile& file, const std::string& profile,
                   std::optional<std::uint64_t> seed, TrainConfig& config,
                   std::ostream& err) {
  if (profile == "full") {
    config = TrainConfig::full_profile(file.scenario.field.mode());
  } else if (profile == "desk") {
    config = TrainConfig::desk_profile(file.scenario.field.mode());
  } else {
    err << "error: unknown profile '" << profile << "' (expected full or desk)\n";
    return CliExit::kBadInput;
  }
  file.apply(config);
  config.seed = seed.value_or(file.seed);
  try {
    config.validate();
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }
  return CliExit::kOk;
}

Trajectory shot_to_trajectory(const Scenario& s, const ShotResult& shot) {
  Trajectory traj;
  const double tf = shot.arrival_time;
  traj.reserve(shot.samples.size());
  for (const ShotSample& smp : shot.samples) {
    TrajectoryPoint pt;
    pt.tau = tf > 0.0 ? smp.t / tf : 0.0;
    pt.t = smp.t;
    pt.x1 = smp.x[0];
    pt.x2 = smp.x[1];
    pt.psi = smp.psi;
    const std::array<double, 2> p = reconstruct_costate(s, smp.x, smp.psi, smp.t);
    pt.p1 = p[0];
    pt.p2 = p[1];
    pt.H = hamiltonian(s, {smp.x, smp.psi, p, smp.t});
    pt.c = s.field.value(smp.x, smp.t);
    traj.push_back(pt);
  }
  return traj;
}

double trajectory_cost(const Scenario& s, const Trajectory& traj) {
  std::vector<std::array<double, 2>> xs;
  xs.reserve(traj.size());
  for (const TrajectoryPoint& pt : traj) xs.push_back({pt.x1, pt.x2});
  return path_cost(s, xs, traj.back().t);
}

}  // namespace

int cmd_train(const std::string& scenario_path, const std::string& profile,
              const std::string& out_dir, std::optional<std::uint64_t> seed,
              bool conditioned, std::ostream& out, std::ostream& err) {
  ScenarioFile file;
  try {
    file = load_scenario_file(scenario_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }
  TrainConfig config;
  if (int rc = resolve_config(file, profile, seed, config, err)) return rc;
  if (conditioned && !file.train.anneal_start) {
    // Learning one model for every initial state needs the boundary terms to
    // shape the network before the gradient balancer starts equalizing them
    // against the (initially easier) physics residuals.
    config.anneal_start = config.max_epochs / 2;
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::ofstream log_csv(dir / "training_log.csv");

  TrainResult result;
  const LossWeights weights = LossWeights::defaults_for(file.scenario.field.mode());
  try {
    result = conditioned
                 ? train_conditioned(file.scenario, config, weights, &log_csv)
                 : train_single(file.scenario, config, weights, &log_csv);
  } catch (const std::exception& e) {
    err << "error: training failed: " << e.what() << "\n";
    return CliExit::kDivergence;
  }
  log_csv.close();

  result.model.save((dir / "model.ckpt").string());
  {
    std::ofstream traj(dir / "trajectory.csv");
    write_trajectory_csv(traj, result.trajectory);
  }
  write_text_file(dir / "loss_report.json",
                  loss_report_json(result.report).dump(2) + "\n");
  copy_file_to(scenario_path, dir / "scenario.json");

  const LossReport& r = result.report;
  if (r.diverged) {
    err << "error: training diverged: " << r.divergence_reason << "\n";
    return CliExit::kDivergence;
  }
  out << "trained " << r.epochs << " epochs, converged="
      << (r.converged ? "yes" : "no") << ", L10=" << fmt(r.losses[9])
      << ", artifacts in " << out_dir << "\n";
  return CliExit::kOk;
}

int cmd_shoot(const std::string& scenario_path, const std::string& out_dir,
              std::ostream& out, std::ostream& err) {
  ScenarioFile file;
  try {
    file = load_scenario_file(scenario_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }
  if (!file.scenario.field.is_static()) {
    err << "error: the shooting baseline supports static fields only\n";
    return CliExit::kInvalidMode;
  }

  ShootConfig config;
  const ShotResult shot = solve(file.scenario, config);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  write_text_file(dir / "shot.json",
                  json{{"psi0", shot.psi0},
                       {"miss", shot.miss},
                       {"arrival_time", shot.arrival_time},
                       {"cost", shot.cost},
                       {"converged", shot.converged}}
                          .dump(2) +
                      "\n");
  {
    std::ofstream traj(dir / "trajectory.csv");
    write_trajectory_csv(traj, shot_to_trajectory(file.scenario, shot));
  }
  copy_file_to(scenario_path, dir / "scenario.json");

  out << "shot psi0=" << fmt(shot.psi0) << " miss=" << fmt(shot.miss)
      << " cost=" << fmt(shot.cost)
      << " converged=" << (shot.converged ? "yes" : "no") << "\n";
  return CliExit::kOk;
}

int cmd_compare(const std::string& scenario_path, int trials,
                std::optional<std::uint64_t> seed, const std::string& profile,
                const std::string& out_dir, std::ostream& out,
                std::ostream& err) {
  ScenarioFile file;
  try {
    file = load_scenario_file(scenario_path);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }
  if (!file.scenario.field.is_static()) {
    err << "error: compare needs the static shooting baseline\n";
    return CliExit::kInvalidMode;
  }
  if (trials < 1) {
    err << "error: --trials must be >= 1\n";
    return CliExit::kBadInput;
  }

  const std::uint64_t base_seed = seed.value_or(file.seed);
  std::mt19937_64 rng(base_seed);
  const double w = file.scenario.workspace_half_width;
  std::uniform_real_distribution<double> uni(-0.9 * w, 0.9 * w);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::ofstream rows(dir / "trials.csv");
  rows << "trial,x01,x02,xf1,xf2,L1,L2,L3,L4,L5,L6,L7,L8,L9,L10,"
          "cost_pinn,cost_baseline,delta,status\n";

  std::vector<double> deltas;
  std::array<std::vector<double>, 10> loss_cols;
  int n_failed = 0;

  for (int trial = 0; trial < trials; ++trial) {
    Scenario s = file.scenario;
    do {
      s.start = {uni(rng), uni(rng)};
      s.goal = {uni(rng), uni(rng)};
    } while (std::hypot(s.goal[0] - s.start[0], s.goal[1] - s.start[1]) < 5.0);

    rows << trial << "," << fmt(s.start[0]) << "," << fmt(s.start[1]) << ","
         << fmt(s.goal[0]) << "," << fmt(s.goal[1]) << ",";

    TrainConfig config;
    if (int rc = resolve_config(file, profile, std::nullopt, config, err)) {
      return rc;
    }
    config.seed = base_seed + 7919 * static_cast<std::uint64_t>(trial + 1);

    std::string status = "ok";
    LossReport report;
    double cost_pinn = std::nan("");
    double cost_baseline = std::nan("");
    double delta = std::nan("");
    try {
      const TrainResult result =
          train_single(s, config, LossWeights::defaults_for(s.field.mode()));
      report = result.report;
      if (report.diverged) {
        status = "diverged";
      } else {
        cost_pinn = trajectory_cost(s, result.trajectory);
        const ShotResult shot = solve(s, ShootConfig{});
        if (shot.converged) {
          cost_baseline = shot.cost;
          delta = *cost_gap(cost_pinn, shot);
        } else {
          status = "baseline_unconverged";
        }
      }
    } catch (const std::exception& e) {
      status = "error";
      err << "trial " << trial << " failed: " << e.what() << "\n";
    }

    for (int k = 0; k < 10; ++k) rows << fmt(report.losses[k]) << ",";
    rows << fmt(cost_pinn) << "," << fmt(cost_baseline) << "," << fmt(delta)
         << "," << status << "\n";
    rows.flush();

    if (status == "ok") {
      deltas.push_back(delta);
      for (int k = 0; k < 10; ++k) loss_cols[k].push_back(report.losses[k]);
      out << "trial " << trial << ": delta=" << fmt(delta) << "\n";
    } else {
      ++n_failed;
      out << "trial " << trial << ": " << status << "\n";
    }
  }

  auto mean_of = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? std::nan("") : s / static_cast<double>(v.size());
  };
  auto std_of = [&](const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double mu = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - mu) * (x - mu);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };

  json agg;
  agg["trials"] = trials;
  agg["succeeded"] = static_cast<int>(deltas.size());
  agg["failed"] = n_failed;
  json losses = json::object();
  for (int k = 0; k < 10; ++k) {
    losses["L" + std::to_string(k + 1)] = {{"mean", mean_of(loss_cols[k])},
                                           {"std", std_of(loss_cols[k])}};
  }
  agg["losses"] = losses;
  agg["delta"] = {{"mean", mean_of(deltas)}, {"std", std_of(deltas)}};
  write_text_file(dir / "aggregate.json", agg.dump(2) + "\n");

  out << "compare done: " << deltas.size() << "/" << trials
      << " trials succeeded, mean delta=" << fmt(mean_of(deltas)) << "\n";
  return CliExit::kOk;
}

int cmd_plotdata(const std::string& run_dir, const std::string& out_dir,
                 std::ostream& out, std::ostream& err) {
  const fs::path rdir(run_dir);
  ScenarioFile file;
  PinnModel model;
  try {
    file = load_scenario_file((rdir / "scenario.json").string());
    model = PinnModel::load((rdir / "model.ckpt").string());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }
  const Scenario& s = file.scenario;

  const int N = 201;
  Eigen::Matrix2Xd x0(2, N);
  Eigen::VectorXd tau(N);
  for (int i = 0; i < N; ++i) {
    x0(0, i) = s.start[0];
    x0(1, i) = s.start[1];
    tau[i] = static_cast<double>(i) / (N - 1);
  }
  const PinnModel::BatchEval e = model.forward_batch(x0, tau);
  const double tf = e.tf.mean();

  std::vector<double> tau_v(N);
  std::vector<std::array<double, 2>> xs(N);
  for (int i = 0; i < N; ++i) {
    tau_v[i] = tau[i];
    xs[i] = {e.x1[i], e.x2[i]};
  }
  const std::vector<double> hd = hd_profile(s, tf, tau_v, xs);

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);

  {
    std::ofstream f(dir / "hamiltonian.tsv");
    f << "tau\tt\tH\tH_d\n";
    for (int i = 0; i < N; ++i) {
      const double t = tau[i] * tf;
      const double H =
          hamiltonian(s, {xs[i], e.psi[i], {e.p1[i], e.p2[i]}, t});
      f << fmt(tau[i]) << "\t" << fmt(t) << "\t" << fmt(H) << "\t"
        << fmt(hd[i]) << "\n";
    }
  }
  {
    std::ofstream f(dir / "kinematics.tsv");
    f << "tau\tdx1dt_net\tdx1dt_pmp\tdx2dt_net\tdx2dt_pmp\n";
    for (int i = 0; i < N; ++i) {
      f << fmt(tau[i]) << "\t" << fmt(e.dx1[i] / tf) << "\t"
        << fmt(s.speed * std::cos(e.psi[i])) << "\t" << fmt(e.dx2[i] / tf)
        << "\t" << fmt(s.speed * std::sin(e.psi[i])) << "\n";
    }
  }
  {
    std::ofstream f(dir / "costates.tsv");
    f << "tau\tdp1dt_net\tdp1dt_pmp\tdp2dt_net\tdp2dt_pmp\n";
    for (int i = 0; i < N; ++i) {
      const double t = tau[i] * tf;
      const std::array<double, 2> g = s.field.grad_x(xs[i], t);
      f << fmt(tau[i]) << "\t" << fmt(e.dp1[i] / tf) << "\t" << fmt(-g[0])
        << "\t" << fmt(e.dp2[i] / tf) << "\t" << fmt(-g[1]) << "\n";
    }
  }
  {
    std::ofstream f(dir / "stationarity.tsv");
    f << "tau\tdH_dpsi\n";
    for (int i = 0; i < N; ++i) {
      const double dh = s.speed * (-e.p1[i] * std::sin(e.psi[i]) +
                                   e.p2[i] * std::cos(e.psi[i]));
      f << fmt(tau[i]) << "\t" << fmt(dh) << "\n";
    }
  }
  {
    std::ofstream f(dir / "trajectory_xy.tsv");
    f << "x1\tx2\n";
    for (int i = 0; i < N; ++i) {
      f << fmt(e.x1[i]) << "\t" << fmt(e.x2[i]) << "\n";
    }
  }
  {
    std::ofstream f(dir / "field_grid.tsv");
    f << "x1\tx2\tc\n";
    const int G = 101;
    const double w = s.workspace_half_width;
    for (int i = 0; i < G; ++i) {
      for (int j = 0; j < G; ++j) {
        const double x1 = -w + 2.0 * w * i / (G - 1);
        const double x2 = -w + 2.0 * w * j / (G - 1);
        f << fmt(x1) << "\t" << fmt(x2) << "\t"
          << fmt(s.field.value({x1, x2}, 0.0)) << "\n";
      }
    }
  }

  out << "plot data written to " << out_dir << "\n";
  return CliExit::kOk;
}

int cmd_validate(const std::string& scenario_path, std::ostream& out,
                 std::ostream& err) {
  try {
    const ScenarioFile file = load_scenario_file(scenario_path);
    out << "ok: " << file.scenario.field.bases().size() << " bases, mode="
        << (file.scenario.field.is_static() ? "static" : "cosine") << "\n";
    return CliExit::kOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }
}

int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err) {
  CLI::App app{"Minimum-threat-exposure path planning toolkit"};
  app.require_subcommand(1);

  std::string scenario_path, out_dir = "run", profile = "desk", run_dir;
  std::string plot_out;
  std::optional<std::uint64_t> seed;
  bool conditioned = false;
  int trials = 10;

  CLI::App* train = app.add_subcommand("train", "Train the solution networks");
  train->add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  train->add_option("--profile", profile, "full or desk (default desk)");
  train->add_option("--out-dir", out_dir, "Artifact directory");
  train->add_option("--seed", seed, "Override the scenario seed");
  train->add_flag("--conditioned", conditioned,
                  "Train over sampled initial states");

  CLI::App* shoot = app.add_subcommand("shoot", "Run the shooting baseline");
  shoot->add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  shoot->add_option("--out-dir", out_dir, "Artifact directory");

  CLI::App* compare =
      app.add_subcommand("compare", "Sweep random endpoint pairs and compare "
                                    "trained cost against the baseline");
  compare->add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();
  compare->add_option("--trials", trials, "Number of endpoint pairs");
  compare->add_option("--seed", seed, "Override the scenario seed");
  compare->add_option("--profile", profile, "full or desk (default desk)");
  compare->add_option("--out-dir", out_dir, "Artifact directory");

  CLI::App* plotdata =
      app.add_subcommand("plotdata", "Recompute plot overlays from a run");
  plotdata->add_option("--run-dir", run_dir, "Directory of a train run")
      ->required();
  plotdata->add_option("--out-dir", plot_out,
                       "Output directory (default: the run directory)");

  CLI::App* validate =
      app.add_subcommand("validate", "Check a scenario file and exit");
  validate->add_option("--scenario", scenario_path, "Scenario JSON file")
      ->required();

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << app.help();
      return CliExit::kOk;
    }
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }

  try {
    if (train->parsed()) {
      return cmd_train(scenario_path, profile, out_dir, seed, conditioned, out,
                       err);
    }
    if (shoot->parsed()) return cmd_shoot(scenario_path, out_dir, out, err);
    if (compare->parsed()) {
      return cmd_compare(scenario_path, trials, seed, profile, out_dir, out,
                         err);
    }
    if (plotdata->parsed()) {
      return cmd_plotdata(run_dir, plot_out.empty() ? run_dir : plot_out, out,
                          err);
    }
    if (validate->parsed()) return cmd_validate(scenario_path, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return CliExit::kBadInput;
  }
  err << "error: no command given\n";
  return CliExit::kBadInput;
}

}  // namespace minexp
