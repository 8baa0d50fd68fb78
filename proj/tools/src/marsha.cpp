#include <marsha/io.hpp>
#include <marsha/rng.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using namespace marsha;

namespace
{

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kNoSolution = 2;
constexpr int kEpisodeFailure = 3;

std::string joinArgs(int argc, char** argv)
{
  std::string cmd;
  for (int i = 0; i < argc; ++i)
  {
    if (i)
      cmd += ' ';
    cmd += argv[i];
  }
  return cmd;
}

Rates parseRates(const std::string& spec)
{
  Rates rates;
  if (spec.empty())
    return rates;
  if (std::sscanf(spec.c_str(), "%lf,%lf,%lf", &rates.execution_hz, &rates.collision_hz,
                  &rates.replan_hz) != 3)
    throw CLI::ValidationError("--rates", "expected execution,collision,replan (e.g. 500,25,5)");
  return rates;
}

CostModel parseCostModel(const std::string& token, const Scenario& sc)
{
  if (token == "pathlength")
    return PathLength{};
  if (token == "weightedlength")
    return WeightedLength{};
  if (token == "hamptime")
    return HampTime{ sc.safety, 0, sc.scene.human_clearance };
  if (token == "marshatime")
    return MarshaTime{ sc.safety, 0, sc.scene.human_clearance };
  throw CLI::ValidationError("--cost", "unknown cost model '" + token + "'");
}

void writeTimingJson(const fs::path& file, const std::vector<EpisodeRow>& rows)
{
  long calls = 0, over = 0;
  double max_s = 0.0, total_s = 0.0, planning_s = 0.0;
  for (const EpisodeRow& row : rows)
  {
    calls += row.metrics.replan_calls;
    over += row.metrics.replan_calls_over_budget;
    max_s = std::max(max_s, row.metrics.replan_elapsed_max_s);
    total_s += row.metrics.replan_elapsed_total_s;
    planning_s += row.metrics.planning_s;
  }
  nlohmann::ordered_json j;
  j["replan_calls"] = calls;
  j["replan_calls_over_budget"] = over;
  j["replan_elapsed_max_s"] = max_s;
  j["replan_elapsed_total_s"] = total_s;
  j["offline_planning_total_s"] = planning_s;
  std::ofstream out(file);
  out << j.dump(2) << '\n';
}

// Shared bench/sweep overrides applied on top of the loaded plan.
struct PlanOverrides
{
  int reps = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int parallel = 0;
  double budget_ms = 0.0;
  std::vector<double> speed_fractions;
  std::vector<std::string> strategies;
  std::string rates;

  void apply(BenchmarkPlan& plan) const
  {
    if (reps > 0)
      plan.reps = reps;
    if (seed_set)
      plan.seed = seed;
    if (parallel > 0)
      plan.parallel = parallel;
    if (budget_ms > 0.0)
      plan.replanner.budget_s = budget_ms / 1000.0;
    if (!speed_fractions.empty())
      plan.speed_fractions = speed_fractions;
    if (!strategies.empty())
    {
      plan.strategies.clear();
      for (const std::string& s : strategies)
        plan.strategies.push_back(parseStrategy(s));
    }
    if (!rates.empty())
      plan.rates = parseRates(rates);
  }
};

void addOverrideFlags(CLI::App* cmd, PlanOverrides& o)
{
  cmd->add_option("--reps", o.reps, "Repetitions per strategy");
  cmd->add_option("--seed", o.seed, "Master seed")->each([&](const std::string&) { o.seed_set = true; });
  cmd->add_option("--parallel", o.parallel, "Concurrent episodes");
  cmd->add_option("--budget-ms", o.budget_ms, "Replanning budget per call, ms");
  cmd->add_option("--speed-fraction", o.speed_fractions, "Global speed fraction(s) in (0, 1]");
  cmd->add_option("--strategy", o.strategies, "Strategy list override");
  cmd->add_option("--rates", o.rates, "execution,collision,replan rates in Hz");
}

RunManifest makeManifest(const std::string& command, const std::vector<std::string>& scenario_paths,
                         const BenchmarkPlan& plan, const fs::path& out)
{
  RunManifest m;
  m.command = command;
  m.scenario_paths = scenario_paths;
  for (Strategy s : plan.strategies)
    m.strategies.push_back(strategyName(s));
  m.repetitions = plan.reps;
  m.seed = plan.seed;
  for (int rep = 0; rep < plan.reps; ++rep)
    m.episode_seeds.push_back(hashCombine(plan.seed, static_cast<std::uint64_t>(rep)));
  m.output_dir = out.string();
  return m;
}

int finishSuite(const std::vector<EpisodeRow>& rows, const fs::path& out, const char* csv_name)
{
  writeEpisodeCsv(out / csv_name, rows);
  writeSummaryCsv(out / "summary.csv", summarize(rows));
  writeBoxPlotSvg(out / "plot.svg", rows);
  writeTimingJson(out / "timing.json", rows);

  long failures = 0;
  for (const EpisodeRow& row : rows)
    if (row.failed)
    {
      ++failures;
      std::cerr << "episode failed: " << row.scenario << "/" << row.strategy << " rep " << row.rep
                << ": " << row.error << "\n";
    }
  std::cout << "wrote " << (out / csv_name).string() << " (" << rows.size() << " rows, " << failures
            << " failures)\n";
  for (const StrategySummary& s : summarize(rows))
  {
    std::cout << "  ";
    if (s.sweep_set > 0)
      std::cout << "set " << s.sweep_set << " ";
    std::cout << s.scenario << " " << s.strategy;
    if (s.speed_fraction != 1.0)
      std::cout << " @" << formatDouble(s.speed_fraction);
    std::cout << ": n=" << s.n << " exec_time_norm mean=" << formatDouble(s.exec_mean)
              << " median=" << formatDouble(s.exec_median)
              << " avg_scaling=" << formatDouble(s.scaling_mean) << "\n";
  }
  return failures == 0 ? kOk : kEpisodeFailure;
}

}  // namespace

int main(int argc, char** argv)
{
  CLI::App app{ "Human-aware real-time path replanning engine and benchmark harness" };
  app.require_subcommand(1);
  const std::string command_line = joinArgs(argc, argv);

  // ---- plan ----------------------------------------------------------------
  auto* cmd_plan = app.add_subcommand("plan", "Plan a single path for a scenario");
  std::string plan_scenario, plan_cost = "hamptime";
  double plan_budget_s = 2.0;
  std::uint64_t plan_seed = 0;
  std::string plan_out;
  cmd_plan->add_option("--scenario", plan_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd_plan->add_option("--cost", plan_cost, "pathlength|weightedlength|hamptime|marshatime");
  cmd_plan->add_option("--budget-s", plan_budget_s, "Planning budget, s");
  cmd_plan->add_option("--seed", plan_seed, "Planner seed");
  cmd_plan->add_option("--out", plan_out, "Output directory");

  // ---- bench ---------------------------------------------------------------
  auto* cmd_bench = app.add_subcommand("bench", "Run a benchmark suite");
  std::string bench_suite, bench_out;
  PlanOverrides bench_overrides;
  cmd_bench->add_option("--suite", bench_suite, "Suite file")->required()->check(CLI::ExistingFile);
  cmd_bench->add_option("--out", bench_out, "Output directory");
  addOverrideFlags(cmd_bench, bench_overrides);

  // ---- sweep ---------------------------------------------------------------
  auto* cmd_sweep = app.add_subcommand("sweep", "Run the 16-set SSM parameter sweep");
  std::string sweep_scenario, sweep_out;
  PlanOverrides sweep_overrides;
  cmd_sweep->add_option("--scenario", sweep_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd_sweep->add_option("--out", sweep_out, "Output directory");
  addOverrideFlags(cmd_sweep, sweep_overrides);

  // ---- replay --------------------------------------------------------------
  auto* cmd_replay = app.add_subcommand("replay", "Run one episode and write its trace");
  std::string replay_scenario, replay_strategy = "marsha", replay_rates, replay_out;
  std::uint64_t replay_seed = 0;
  double replay_fraction = 1.0, replay_budget_ms = 200.0;
  bool replay_validate = false;
  cmd_replay->add_option("--scenario", replay_scenario, "Scenario file")->required()->check(CLI::ExistingFile);
  cmd_replay->add_option("--strategy", replay_strategy, "Execution strategy");
  cmd_replay->add_option("--seed", replay_seed, "Episode seed");
  cmd_replay->add_option("--speed-fraction", replay_fraction, "Global speed fraction");
  cmd_replay->add_option("--budget-ms", replay_budget_ms, "Replanning budget, ms");
  double replay_plan_budget_s = 2.0;
  cmd_replay->add_option("--planner-budget-s", replay_plan_budget_s, "Offline planning budget, s");
  cmd_replay->add_option("--rates", replay_rates, "execution,collision,replan rates in Hz");
  cmd_replay->add_option("--out", replay_out, "Output directory");
  cmd_replay->add_flag("--validate", replay_validate, "Recheck per-tick safety bounds; fail on violation");

  CLI11_PARSE(app, argc, argv);

  try
  {
    if (*cmd_plan)
    {
      const Scenario sc = loadScenario(plan_scenario);
      const fs::path out = plan_out.empty() ? defaultOutDir() / "plan" : fs::path(plan_out);
      const HumanState human0 = sc.script.sample(0.0);
      const CostModel cm = parseCostModel(plan_cost, sc);

      PlannerParams params;
      params.budget_s = plan_budget_s;
      params.seed = plan_seed;
      PlanReport report;
      auto path = plan(sc.model, sc.scene, human0, sc.q_start, sc.q_goal, cm, params, &report);
      if (!path)
      {
        std::cerr << "no solution found for '" << sc.name << "' within the budget\n";
        return kNoSolution;
      }
      *path = simplifyPath(sc.model, *path, human0, sc.scene, cm, params.collision_step);

      savePath(out / "path.json", *path);
      std::ostringstream csv;
      csv << "cost_model,cost\n";
      const std::pair<const char*, CostModel> evals[] = {
        { "pathlength", PathLength{} },
        { "weightedlength", WeightedLength{} },
        { "hamptime", HampTime{ sc.safety, 0, sc.scene.human_clearance } },
        { "marshatime", MarshaTime{ sc.safety, 0, sc.scene.human_clearance } },
      };
      std::cout << "planned " << path->waypointCount() << " waypoints in "
                << formatDouble(report.elapsed_s) << " s (" << report.iterations << " iterations)\n";
      for (const auto& [name, model] : evals)
      {
        const double c = pathCost(sc.model, path->waypoints(), human0, model);
        csv << name << ',' << formatDouble(c) << '\n';
        std::cout << "  cost under " << name << ": " << formatDouble(c) << "\n";
      }
      std::ofstream(out / "cost_report.csv") << csv.str();

      RunManifest m;
      m.command = command_line;
      m.scenario_paths = { plan_scenario };
      m.seed = plan_seed;
      m.output_dir = out.string();
      writeManifest(out, m);
      return kOk;
    }

    if (*cmd_bench)
    {
      BenchmarkPlan plan = loadSuite(bench_suite);
      bench_overrides.apply(plan);
      const fs::path out = bench_out.empty() ? defaultOutDir() / "bench" : fs::path(bench_out);
      fs::create_directories(out);
      writeManifest(out, makeManifest(command_line, { bench_suite }, plan, out));
      const std::vector<EpisodeRow> rows = runBenchmark(plan);
      return finishSuite(rows, out, "episodes.csv");
    }

    if (*cmd_sweep)
    {
      BenchmarkPlan plan;
      plan.scenarios = { loadScenario(sweep_scenario) };
      plan.strategies = { Strategy::Marsha, Strategy::Dssm };
      plan.seed = 5;
      plan.planner.budget_s = 2.0;
      sweep_overrides.apply(plan);
      const fs::path out = sweep_out.empty() ? defaultOutDir() / "sweep" : fs::path(sweep_out);
      fs::create_directories(out);
      writeManifest(out, makeManifest(command_line, { sweep_scenario }, plan, out));
      const std::vector<EpisodeRow> rows = runSweep(plan);
      return finishSuite(rows, out, "sweep.csv");
    }

    if (*cmd_replay)
    {
      EpisodeConfig config;
      config.scenario = loadScenario(replay_scenario);
      config.strategy = parseStrategy(replay_strategy);
      config.seed = replay_seed;
      config.speed_fraction = replay_fraction;
      config.replanner.budget_s = replay_budget_ms / 1000.0;
      config.planner.budget_s = replay_plan_budget_s;
      if (!replay_rates.empty())
        config.rates = parseRates(replay_rates);
      const fs::path out = replay_out.empty() ? defaultOutDir() / "replay" : fs::path(replay_out);

      const Scenario& sc = config.scenario;
      const int dof = sc.model.dof();
      std::vector<std::string> header = { "t" };
      for (int j = 0; j < dof; ++j)
        header.push_back("q" + std::to_string(j));
      header.push_back("scale");
      header.push_back("separation");

      std::vector<std::vector<double>> trace;
      long safety_violations = 0;
      const auto observer = [&](const TickInfo& info) {
        std::vector<double> row;
        row.reserve(header.size());
        row.push_back(info.t);
        for (int j = 0; j < dof; ++j)
          row.push_back(info.q[j]);
        row.push_back(info.scale);
        row.push_back(info.separation);
        trace.push_back(std::move(row));

        if (!replay_validate || info.human.empty())
          return;
        // Re-derive the per-pair closing-speed bound of the scaled command.
        const PoiKinematics kin = sc.model.poiKinematics(info.q);
        double min_sep = kInfinity, min_sep_closing = 0.0;
        for (std::size_t p = 0; p < kin.positions.size(); ++p)
        {
          const Eigen::Vector3d vel = kin.jacobians[p] * info.qdot_nominal;
          for (const HumanKeypoint& kp : info.human.keypoints)
          {
            const Eigen::Vector3d d = kp.position - kin.positions[p];
            const double dist = d.norm();
            if (dist <= 0.0)
            {
              ++safety_violations;
              continue;
            }
            const double sep = dist - sc.scene.human_clearance;
            const double closing = vel.dot(d / dist);
            if (info.scale * closing > modeVmax(sc.safety, sep) + 1e-6)
              ++safety_violations;
            if (sep < min_sep)
            {
              min_sep = sep;
              min_sep_closing = closing;
            }
          }
        }
        if (const auto* ssm = std::get_if<SSMParams>(&sc.safety))
          if (min_sep <= ssm->C && min_sep_closing > 1e-12 && info.scale > 1e-12)
            ++safety_violations;
      };

      const EpisodeMetrics m = runEpisode(config, observer);
      writeTraceCsv(out / "trace.csv", header, trace);

      nlohmann::ordered_json j;
      j["scenario"] = sc.name;
      j["strategy"] = strategyName(config.strategy);
      j["seed"] = config.seed;
      j["completed"] = m.completed;
      j["exec_time_norm"] = m.exec_time_norm;
      j["avg_scaling"] = m.avg_scaling;
      j["replan_adoptions"] = m.replan_adoptions;
      j["min_separation_observed"] = m.min_separation_observed;
      j["nominal_s"] = m.nominal_s;
      j["executed_s"] = m.executed_s;
      j["replan_calls"] = m.replan_calls;
      j["safety_violations"] = safety_violations;
      fs::create_directories(out);
      std::ofstream(out / "metrics.json") << j.dump(2) << '\n';

      RunManifest manifest;
      manifest.command = command_line;
      manifest.scenario_paths = { replay_scenario };
      manifest.strategies = { strategyName(config.strategy) };
      manifest.repetitions = 1;
      manifest.seed = config.seed;
      manifest.episode_seeds = { config.seed };
      manifest.output_dir = out.string();
      writeManifest(out, manifest);

      std::cout << "exec_time_norm=" << formatDouble(m.exec_time_norm)
                << " avg_scaling=" << formatDouble(m.avg_scaling)
                << " adoptions=" << m.replan_adoptions
                << " min_separation=" << formatDouble(m.min_separation_observed) << "\n";
      if (replay_validate)
      {
        std::cout << "safety_violations=" << safety_violations << "\n";
        if (safety_violations > 0)
          return kEpisodeFailure;
      }
      if (!m.completed)
      {
        std::cerr << "episode timed out\n";
        return kEpisodeFailure;
      }
      return kOk;
    }
  }
  catch (const std::invalid_argument& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  catch (const std::runtime_error& e)
  {
    std::cerr << "error: " << e.what() << "\n";
    const std::string what = e.what();
    if (what.find("no initial path") != std::string::npos ||
        what.find("no human-free path") != std::string::npos)
      return kNoSolution;
    return kEpisodeFailure;
  }

  return kUsage;
}
