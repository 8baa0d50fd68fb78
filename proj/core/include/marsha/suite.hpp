#pragma once

#include <marsha/executor.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace marsha
{

/* Episode grid: every scenario × strategy × speed fraction × repetition.
 * Episode seeds depend only on (seed, rep), so repetitions are paired across
 * scenarios and strategies (same human noise, comparable rows). */
struct BenchmarkPlan
{
  std::vector<Scenario> scenarios;
  std::vector<Strategy> strategies;
  std::vector<double> speed_fractions = { 1.0 };
  int reps = 20;
  std::uint64_t seed = 1;
  Rates rates;
  PlannerParams planner;
  ReplannerParams replanner;
  int extra_paths = 2;
  int parallel = 1;  // worker threads; row content is schedule-independent
};

struct EpisodeRow
{
  std::string scenario;
  std::string strategy;
  double speed_fraction = 1.0;
  int rep = 0;
  std::uint64_t seed = 0;
  int sweep_set = 0;    // 1-based SSM sweep set; 0 outside sweeps
  bool failed = false;  // the episode threw; error holds the message
  std::string error;
  EpisodeMetrics metrics;
};

/* Optional per-episode observer hook: called once per episode before it runs,
 * returning the tick observer to attach (or an empty one). Must be safe to
 * invoke from worker threads. */
using EpisodeObserverFactory = std::function<TickObserver(const EpisodeRow&, const EpisodeConfig&)>;

/* Runs the full grid. Rows come back ordered by (scenario, strategy,
 * speed fraction, rep) regardless of worker scheduling; a failing episode
 * annotates its row and the suite continues. */
std::vector<EpisodeRow> runBenchmark(const BenchmarkPlan& plan, const EpisodeObserverFactory& factory = {});

/* SSM parameter sweep: the 16 bundled sets each override the scenarios'
 * safety mode (which must be SSM). Rows ordered by (set, scenario, strategy,
 * speed fraction, rep). */
std::vector<EpisodeRow> runSweep(const BenchmarkPlan& plan, const EpisodeObserverFactory& factory = {});

struct StrategySummary
{
  std::string scenario;
  std::string strategy;
  double speed_fraction = 1.0;
  int sweep_set = 0;
  int n = 0;  // episodes aggregated (completed, non-failed)
  long failures = 0;
  double exec_mean = 0.0;
  double exec_min = 0.0;
  double exec_q1 = 0.0;
  double exec_median = 0.0;
  double exec_q3 = 0.0;
  double exec_max = 0.0;
  double scaling_mean = 0.0;
  double adoptions_mean = 0.0;
  double min_separation = kInfinity;
};

/* Box-plot-style aggregates per (sweep set, scenario, strategy, fraction)
 * group, in first-appearance order of the rows. */
std::vector<StrategySummary> summarize(const std::vector<EpisodeRow>& rows);

// p-quantile (p in [0,1]) with linear interpolation between order statistics.
double quantile(std::vector<double> values, double p);

}  // namespace marsha
