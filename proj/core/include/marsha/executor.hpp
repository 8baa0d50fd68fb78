#pragma once

#include <marsha/cost.hpp>
#include <marsha/kinematics.hpp>
#include <marsha/planner.hpp>
#include <marsha/replanner.hpp>
#include <marsha/safety.hpp>
#include <marsha/trajectory.hpp>
#include <marsha/world.hpp>

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>

namespace marsha
{

/* Execution strategy. Every strategy applies online dSSM speed scaling; they
 * differ in how the initial path is planned and whether (and with which cost)
 * the path is replanned online:
 *   dssm       — weighted-length path, no replanning
 *   mars       — weighted-length path, weighted-length replanning
 *   marsha     — time-aware initial path, safety-aware time replanning
 *   hamp       — proactive time-aware path, no replanning
 *   minlen     — shortest path ignoring the human, no replanning
 *   marsha-len — shortest initial path, safety-aware time replanning */
enum class Strategy
{
  Dssm,
  Mars,
  Marsha,
  Hamp,
  MinLen,
  MarshaLen,
};

bool strategyReplans(Strategy strategy);
std::string strategyName(Strategy strategy);
// Accepts canonical names and the spelled-out aliases (e.g. "MARSHA+dSSM").
Strategy parseStrategy(const std::string& token);

/* Loop rates of the simulated controller. The execution loop is the base
 * clock; the collision and replanning loops run once every
 * round(execution_hz / their_hz) execution ticks. */
struct Rates
{
  double execution_hz = 500.0;
  double collision_hz = 25.0;
  double replan_hz = 5.0;
};

void validate(const Rates& rates);

/* A complete episode description: robot, static scene, scripted human,
 * joint-space endpoints and the safety mode used for both speed scaling and
 * the safety-aware costs. */
struct Scenario
{
  std::string name;
  std::string model_name = "planar2";   // builtin model identifier
  RobotModel model = models::planar2();
  Scene scene;
  HumanScript script;
  Eigen::VectorXd q_start;
  Eigen::VectorXd q_goal;
  SafetyMode safety = SSMParams{};
  double timeout_s = 120.0;  // simulated-clock cap, episode aborts past it
};

struct EpisodeConfig
{
  Scenario scenario;
  Strategy strategy = Strategy::Marsha;
  Rates rates;
  double speed_fraction = 1.0;    // global velocity override in (0, 1]
  std::uint64_t seed = 0;
  PlannerParams planner;          // offline initial-path / path-set planning
  ReplannerParams replanner;      // online replanning (budget_s per call)
  int extra_paths = 2;            // precomputed set size beyond the best path
  // Switching paths restarts the trajectory from rest, which the connection
  // costs do not model; require at least this relative improvement to adopt.
  double adoption_margin = 0.05;
};

struct EpisodeMetrics
{
  bool completed = false;          // goal reached before the timeout
  double executed_s = 0.0;         // simulated execution time
  double nominal_s = 0.0;          // human-free duration of the optimal path
  double exec_time_norm = 0.0;     // executed_s / nominal_s
  double avg_scaling = 0.0;        // mean of 100 × scale over moving ticks
  double min_separation_observed = kInfinity;
  int replan_adoptions = 0;

  // Replanning diagnostics (wall-clock fields are excluded from CSV output).
  long replan_calls = 0;
  long replan_calls_over_budget = 0;  // wall time above 1.2 × budget
  double replan_elapsed_max_s = 0.0;
  double replan_elapsed_total_s = 0.0;
  long lazy_violations = 0;        // cost evaluations exceeded candidate connections
  long acceptance_violations = 0;  // adopted a path not cheaper than the current one
  double planning_s = 0.0;         // offline planning wall time
};

/* Per-execution-tick observation: the commanded state before speed scaling,
 * the applied scale, and the human snapshot the controller acted on (refreshed
 * at the collision rate, so up to one collision period old). */
struct TickInfo
{
  double t = 0.0;
  const Eigen::VectorXd& q;
  const Eigen::VectorXd& qdot_nominal;
  double scale = 1.0;
  const HumanState& human;
  double separation = kInfinity;
};

using TickObserver = std::function<void(const TickInfo&)>;

/* Runs one episode on a single deterministic simulated clock. Tick order is
 * collision refresh → replanning → execution. Speed scaling dilates the
 * trajectory clock; an adopted path restarts its profile from rest at the
 * current configuration. Throws std::runtime_error if no initial path is
 * found. */
EpisodeMetrics runEpisode(const EpisodeConfig& config, const TickObserver& observer = {});

}  // namespace marsha
