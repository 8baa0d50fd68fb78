#include <marsha/suite.hpp>

#include <marsha/io.hpp>
#include <marsha/rng.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace marsha
{

namespace
{

void validatePlan(const BenchmarkPlan& plan)
{
  if (plan.scenarios.empty())
    throw std::invalid_argument("BenchmarkPlan: no scenarios");
  if (plan.strategies.empty())
    throw std::invalid_argument("BenchmarkPlan: no strategies");
  if (plan.speed_fractions.empty())
    throw std::invalid_argument("BenchmarkPlan: no speed fractions");
  if (plan.reps <= 0)
    throw std::invalid_argument("BenchmarkPlan: repetitions must be positive");
  if (plan.parallel <= 0)
    throw std::invalid_argument("BenchmarkPlan: parallel must be positive");
  validate(plan.rates);
}

/* Builds the row grid for one safety override (sweep_set 0 = scenario's own
 * mode) and runs it with the plan's worker count. Rows are written by index,
 * so the output order never depends on scheduling. */
std::vector<EpisodeRow> runGrid(const BenchmarkPlan& plan, const std::vector<Scenario>& scenarios,
                                int sweep_set, const EpisodeObserverFactory& factory)
{
  struct Job
  {
    const Scenario* scenario;
    Strategy strategy;
    double speed_fraction;
    int rep;
  };
  std::vector<Job> jobs;
  jobs.reserve(scenarios.size() * plan.strategies.size() * plan.speed_fractions.size() *
               static_cast<std::size_t>(plan.reps));
  for (const Scenario& sc : scenarios)
    for (Strategy strategy : plan.strategies)
      for (double fraction : plan.speed_fractions)
        for (int rep = 0; rep < plan.reps; ++rep)
          jobs.push_back(Job{ &sc, strategy, fraction, rep });

  std::vector<EpisodeRow> rows(jobs.size());
  std::atomic<std::size_t> next{ 0 };

  auto worker = [&]() {
    for (;;)
    {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size())
        return;
      const Job& job = jobs[i];

      EpisodeRow& row = rows[i];
      row.scenario = job.scenario->name;
      row.strategy = strategyName(job.strategy);
      row.speed_fraction = job.speed_fraction;
      row.rep = job.rep;
      row.seed = hashCombine(plan.seed, static_cast<std::uint64_t>(job.rep));
      row.sweep_set = sweep_set;

      EpisodeConfig config;
      config.scenario = *job.scenario;
      config.strategy = job.strategy;
      config.rates = plan.rates;
      config.speed_fraction = job.speed_fraction;
      config.seed = row.seed;
      config.planner = plan.planner;
      config.replanner = plan.replanner;
      config.extra_paths = plan.extra_paths;

      try
      {
        const TickObserver observer = factory ? factory(row, config) : TickObserver{};
        row.metrics = runEpisode(config, observer);
      }
      catch (const std::exception& e)
      {
        row.failed = true;
        row.error = e.what();
      }
    }
  };

  const int workers = std::min<int>(plan.parallel, static_cast<int>(jobs.size()));
  if (workers <= 1)
  {
    worker();
  }
  else
  {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w)
      pool.emplace_back(worker);
    for (std::thread& th : pool)
      th.join();
  }
  return rows;
}

}  // namespace

std::vector<EpisodeRow> runBenchmark(const BenchmarkPlan& plan, const EpisodeObserverFactory& factory)
{
  validatePlan(plan);
  return runGrid(plan, plan.scenarios, 0, factory);
}

std::vector<EpisodeRow> runSweep(const BenchmarkPlan& plan, const EpisodeObserverFactory& factory)
{
  validatePlan(plan);
  for (const Scenario& sc : plan.scenarios)
    if (!std::holds_alternative<SSMParams>(sc.safety))
      throw std::invalid_argument("runSweep: scenario '" + sc.name + "' does not use the SSM mode");

  const std::array<SSMParams, 16> sets = ssmSweepSets();
  std::vector<EpisodeRow> rows;
  for (std::size_t set = 0; set < sets.size(); ++set)
  {
    std::vector<Scenario> scenarios = plan.scenarios;
    for (Scenario& sc : scenarios)
      sc.safety = sets[set];
    std::vector<EpisodeRow> batch = runGrid(plan, scenarios, static_cast<int>(set) + 1, factory);
    rows.insert(rows.end(), std::make_move_iterator(batch.begin()), std::make_move_iterator(batch.end()));
  }
  return rows;
}

double quantile(std::vector<double> values, double p)
{
  if (values.empty())
    throw std::invalid_argument("quantile: empty sample");
  if (!(p >= 0.0) || p > 1.0)
    throw std::invalid_argument("quantile: p must lie in [0, 1]");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = h - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<StrategySummary> summarize(const std::vector<EpisodeRow>& rows)
{
  std::vector<StrategySummary> out;
  std::vector<std::vector<const EpisodeRow*>> groups;

  for (const EpisodeRow& row : rows)
  {
    std::size_t g = 0;
    for (; g < out.size(); ++g)
    {
      const StrategySummary& s = out[g];
      if (s.scenario == row.scenario && s.strategy == row.strategy &&
          s.speed_fraction == row.speed_fraction && s.sweep_set == row.sweep_set)
        break;
    }
    if (g == out.size())
    {
      StrategySummary s;
      s.scenario = row.scenario;
      s.strategy = row.strategy;
      s.speed_fraction = row.speed_fraction;
      s.sweep_set = row.sweep_set;
      out.push_back(std::move(s));
      groups.emplace_back();
    }
    groups[g].push_back(&row);
  }

  for (std::size_t g = 0; g < out.size(); ++g)
  {
    StrategySummary& s = out[g];
    std::vector<double> exec;
    double scaling_sum = 0.0;
    double adoptions_sum = 0.0;
    for (const EpisodeRow* row : groups[g])
    {
      if (row->failed || !row->metrics.completed)
      {
        ++s.failures;
        continue;
      }
      exec.push_back(row->metrics.exec_time_norm);
      scaling_sum += row->metrics.avg_scaling;
      adoptions_sum += row->metrics.replan_adoptions;
      s.min_separation = std::min(s.min_separation, row->metrics.min_separation_observed);
    }
    s.n = static_cast<int>(exec.size());
    if (s.n == 0)
      continue;
    s.exec_mean = 0.0;
    for (double v : exec)
      s.exec_mean += v;
    s.exec_mean /= s.n;
    s.exec_min = quantile(exec, 0.0);
    s.exec_q1 = quantile(exec, 0.25);
    s.exec_median = quantile(exec, 0.5);
    s.exec_q3 = quantile(exec, 0.75);
    s.exec_max = quantile(exec, 1.0);
    s.scaling_mean = scaling_sum / s.n;
    s.adoptions_mean = adoptions_sum / s.n;
  }
  return out;
}

}  // namespace marsha
