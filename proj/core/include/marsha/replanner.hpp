#pragma once

#include <marsha/cost.hpp>
#include <marsha/path.hpp>
#include <marsha/planner.hpp>
#include <marsha/world.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace marsha
{

/* Replanning tuning knobs. As with the planner, the time budget maps to a
 * deterministic iteration budget; wall-clock enforcement can be switched on
 * for budget-compliance measurements (never used by the simulated runs). */
struct ReplannerParams
{
  double budget_s = 0.2;
  int max_iterations = 0;           // 0: derived from budget_s
  double iters_per_second = 10000;  // calibration constant for the derivation
  int max_iter_per_target = 500;    // growth iterations per switch target
  double min_dist = 0.1;            // target capture radius [scaled]
  double step = 1.0;                // max extension per growth step [scaled]
  double collision_step = 0.05;     // connection-check resolution [rad]
  int target_bias_period = 4;       // every k-th growth sample aims at the target
  bool enforce_wall_clock = false;
};

struct ReplanRequest
{
  Path* current_path = nullptr;      // full path currently executed
  Eigen::VectorXd q_curr;            // projection of the state onto current_path
  std::vector<Path>* path_set = nullptr;  // available switch paths (may include equals of current)
  HumanState human;                  // frozen snapshot for this call
  double budget_s = 0.2;             // overrides params.budget_s when > 0
  CostModel cm;
  std::uint64_t seed = 0;
  std::uint64_t snapshot = 0;        // id of the human snapshot, keys the caches
};

struct ReplanResult
{
  bool solved = false;          // a strictly cheaper path was adopted
  std::optional<Path> path;     // the adopted path (from q_curr), when solved
  double cost = 0.0;            // its cost under the request's human snapshot
  double current_cost = 0.0;    // cost of the current subpath under the same snapshot

  int iterations = 0;
  double elapsed_s = 0.0;
  long cost_evaluations = 0;        // lazy-evaluation instrumentation
  long candidate_connections = 0;   // connections over all evaluated candidate chains
};

/* Anytime multi-path replanner: connects nodes of the current path ahead of
 * q_curr to nodes of the available paths by growing reusable subtrees inside
 * the informed set, with lazy cost evaluation (cost only on candidate
 * chains). A new path is adopted only when strictly cheaper than the current
 * subpath under the request's human snapshot. */
class Replanner
{
public:
  Replanner(const RobotModel& model, Scene scene, ReplannerParams params);

  ReplanResult replan(const ReplanRequest& req);

  // Drop the persistent subtrees (e.g., between episodes).
  void reset();

private:
  const RobotModel& model_;
  Scene scene_;
  ReplannerParams params_;

  // Subtrees persist across calls, keyed by their root configuration.
  std::map<std::vector<double>, Tree> subtrees_;
};

}  // namespace marsha
