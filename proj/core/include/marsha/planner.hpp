#pragma once

#include <marsha/cost.hpp>
#include <marsha/path.hpp>
#include <marsha/rng.hpp>
#include <marsha/sampling.hpp>
#include <marsha/world.hpp>

#include <cstdint>
#include <optional>
#include <vector>

namespace marsha
{

/* Rooted tree over configurations. Each non-root node caches the collision
 * and cost state of the connection from its parent, keyed by a snapshot id
 * so the caches expire when the human state changes. Branches can be hidden
 * (excluded from nearest/near queries together with their descendants)
 * without destroying them.
 *
 * All distances are measured in metric-scaled coordinates (q ⊘ weights):
 * with weights = q̇_max this is the lower-bound traversal-time geometry the
 * cost models live in, so tree growth and rewiring match the cost. */
class Tree
{
public:
  struct Edge
  {
    double cost = 0.0;
    std::uint64_t cost_snapshot = 0;
    bool cost_cached = false;

    bool valid = false;
    std::uint64_t valid_snapshot = 0;
    bool valid_cached = false;
  };

  struct Node
  {
    Eigen::VectorXd q;
    int parent = -1;
    std::vector<int> children;
    Edge edge;  // connection parent -> this
    bool hidden = false;
  };

  // Empty weights mean the identity metric.
  explicit Tree(Eigen::VectorXd root, const Eigen::VectorXd& metric_weights = Eigen::VectorXd());

  int size() const { return static_cast<int>(nodes_.size()); }
  const Node& node(int i) const { return nodes_[static_cast<std::size_t>(i)]; }
  Node& node(int i) { return nodes_[static_cast<std::size_t>(i)]; }
  const Eigen::VectorXd& root() const { return nodes_.front().q; }

  int add(const Eigen::VectorXd& q, int parent);

  // Scaled distance between two configurations under this tree's metric.
  double distance(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
  {
    return (a - b).cwiseProduct(inv_w_).norm();
  }

  // Nearest non-hidden node (scaled L2); ties broken by lowest index.
  int nearest(const Eigen::VectorXd& q) const;

  // Indices of non-hidden nodes within scaled radius of q, ascending index order.
  std::vector<int> near(const Eigen::VectorXd& q, double radius) const;

  // Node indices from the root to i, inclusive.
  std::vector<int> chainFromRoot(int i) const;

  // Reattach child under new_parent (cycle-checked), resetting its edge cache.
  void rewire(int child, int new_parent);

  // Hide node i and all its descendants / restore everything.
  void hideBranch(int i);
  void unhideAll();

  // Drop every node (with descendants) failing `keep`; the root always stays.
  template <typename Pred>
  void prune(Pred keep);

private:
  std::vector<Node> nodes_;
  Eigen::VectorXd inv_w_;   // element-wise inverse of the metric weights
  Eigen::MatrixXd coords_;  // scaled coordinates, one row per node (contiguous for fast scans)
  int coord_count_ = 0;     // used rows of coords_ (the rest is growth slack)

  void setHidden(int i, bool hidden);
  void pushCoord(const Eigen::VectorXd& q);
};

/* Admissible cost-to-go for a cost model: weighted-L2 models prune with the
 * scaled prolate hyperspheroid; the L∞-based time estimate needs an L∞ bound
 * (the L2 one would overestimate and prune valid regions). */
struct HeuristicInfo
{
  bool linf = false;
  Eigen::VectorXd weights;  // ones for plain length, q̇_max otherwise

  double operator()(const Eigen::VectorXd& q, const Eigen::VectorXd& s, const Eigen::VectorXd& g) const;
};

HeuristicInfo heuristicFor(const CostModel& cm, const RobotModel& model);

/* Draw a configuration admissible under h given the incumbent cost: the
 * informed set directly for L2 heuristics, bounded rejection from the
 * joint-limit box for L∞ ones (plain uniform draw when nothing can prune). */
Eigen::VectorXd sampleWithHeuristic(const InformedSet& informed, const HeuristicInfo& h,
                                    const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal,
                                    const Eigen::VectorXd& q_min, const Eigen::VectorXd& q_max, double c_best,
                                    RngStream& rng);

/* Planner tuning knobs. The time budget is enforced as a deterministic
 * iteration budget (budget_s × iters_per_second) so identical seeds yield
 * identical plans on any machine. */
struct PlannerParams
{
  double budget_s = 2.0;
  int max_iterations = 0;          // 0: derived from budget_s
  double iters_per_second = 8000;  // calibration constant for the derivation
  double step = 1.0;               // max extension per growth step [scaled]
  double goal_connect_radius = 1.0;  // try the goal from nodes closer than this [scaled]
  int goal_bias_period = 20;       // every Nth sample is the goal itself
  double rewire_gamma = 4.0;       // shrinking-radius constant [scaled]
  double collision_step = 0.05;    // connection-check resolution [rad]
  std::uint64_t seed = 0;

  // Path-set diversification (soft penalty near already-found paths).
  double diversity_weight = 2.0;
  double diversity_radius = 2.0;  // penalty fades to zero at this distance [scaled]
};

struct PlanReport
{
  std::vector<double> incumbent_costs;  // strictly decreasing improvement log
  int iterations = 0;
  double elapsed_s = 0.0;
};

/* Anytime optimal planning: rewiring tree growth with informed sampling once
 * an incumbent exists, cost model pluggable. The human snapshot is treated
 * as a static obstacle field and enters λ-bearing costs. Returns nullopt
 * when no feasible path was found within the budget. */
std::optional<Path> plan(const RobotModel& model, const Scene& scene, const HumanState& human,
                         const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal, const CostModel& cm,
                         const PlannerParams& params, PlanReport* report = nullptr);

struct PathSetResult
{
  std::vector<Path> paths;
  bool complete = false;  // found the requested count
};

/* `count` start-goal paths, diversified by penalizing proximity to the paths
 * already found. Returns fewer paths (complete=false) when the budget or the
 * scene does not allow the full count. */
PathSetResult planPathSet(const RobotModel& model, const Scene& scene, const HumanState& human,
                          const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal, const CostModel& cm,
                          int count, const PlannerParams& params);

/* Greedy shortcutting: splice out intermediate waypoints whenever the direct
 * connection is collision-free and does not cost more than the spliced
 * segment chain. Trims sampling zigzag (and with it the per-waypoint stops
 * of the trapezoidal time law) without ever increasing the path cost. */
Path simplifyPath(const RobotModel& model, const Path& path, const HumanState& human, const Scene& scene,
                  const CostModel& cm, double collision_step = 0.05);

template <typename Pred>
void Tree::prune(Pred keep)
{
  // Keep set by DFS from the root: a node survives iff its parent survives
  // and the predicate holds (rewiring may order parents after children).
  std::vector<bool> drop(nodes_.size(), true);
  std::vector<int> stack = { 0 };
  drop[0] = false;
  while (!stack.empty())
  {
    const int i = stack.back();
    stack.pop_back();
    for (int child : nodes_[static_cast<std::size_t>(i)].children)
      if (keep(nodes_[static_cast<std::size_t>(child)]))
      {
        drop[static_cast<std::size_t>(child)] = false;
        stack.push_back(child);
      }
  }

  std::vector<int> remap(nodes_.size(), -1);
  std::vector<Node> kept;
  kept.reserve(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i)
  {
    if (drop[i])
      continue;
    remap[i] = static_cast<int>(kept.size());
    kept.push_back(std::move(nodes_[i]));
  }
  for (auto& n : kept)
  {
    n.parent = n.parent >= 0 ? remap[static_cast<std::size_t>(n.parent)] : -1;
    n.children.clear();
  }
  for (std::size_t i = 0; i < kept.size(); ++i)
    if (kept[i].parent >= 0)
      kept[static_cast<std::size_t>(kept[i].parent)].children.push_back(static_cast<int>(i));
  nodes_ = std::move(kept);

  coord_count_ = 0;
  for (const Node& n : nodes_)
    pushCoord(n.q);
}

}  // namespace marsha
