#include <marsha/replanner.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace marsha
{

namespace
{
constexpr double kInf = std::numeric_limits<double>::infinity();

std::vector<double> keyOf(const Eigen::VectorXd& q)
{
  return std::vector<double>(q.data(), q.data() + q.size());
}

struct Q2Target
{
  Path* path;
  std::size_t wp;
  double h_goal;  // admissible two-sided heuristic of the node
};
}  // namespace

Replanner::Replanner(const RobotModel& model, Scene scene, ReplannerParams params)
  : model_(model), scene_(std::move(scene)), params_(std::move(params))
{
}

void Replanner::reset()
{
  subtrees_.clear();
}

ReplanResult Replanner::replan(const ReplanRequest& req)
{
  const auto t0 = std::chrono::steady_clock::now();
  ReplanResult res;

  if (req.current_path == nullptr || req.path_set == nullptr)
    throw std::invalid_argument("replan: current_path and path_set are required");
  validate(req.cm);
  const double budget_s = req.budget_s > 0.0 ? req.budget_s : params_.budget_s;
  if (budget_s <= 0.0)
    throw std::invalid_argument("replan: budget must be > 0");

  const auto finish = [&]() -> ReplanResult& {
    res.elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
  };
  const auto wallExpired = [&]() {
    return params_.enforce_wall_clock &&
           std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count() >= budget_s;
  };

  Path& cur = *req.current_path;
  const Eigen::VectorXd& q_goal = cur.goal();

  const PathProjection proj = projectOnPath(req.q_curr, cur);
  if ((proj.q - req.q_curr).norm() > 1e-9)
    throw std::invalid_argument("replan: q_curr does not lie on current_path");
  if (proj.s >= cur.length() - 1e-12)
    return finish();  // already at the goal

  Path suffix = cur.suffixFrom(proj.s);

  // --- snapshot-keyed cache helpers (instrumented) -------------------------
  const auto connValid = [&](Path& p, std::size_t i) -> bool {
    PathConnection& c = p.connection(i);
    if (!c.valid_cached || c.valid_snapshot != req.snapshot)
    {
      c.valid = checkConnection(model_, p.waypoint(i), p.waypoint(i + 1), req.human, scene_,
                                params_.collision_step);
      c.valid_cached = true;
      c.valid_snapshot = req.snapshot;
    }
    return c.valid;
  };
  const auto connCost = [&](Path& p, std::size_t i) -> double {
    PathConnection& c = p.connection(i);
    if (!c.cost_cached || c.cost_snapshot != req.snapshot)
    {
      c.cost = connectionCost(model_, p.waypoint(i), p.waypoint(i + 1), req.human, req.cm);
      c.cost_cached = true;
      c.cost_snapshot = req.snapshot;
      ++res.cost_evaluations;
    }
    return c.cost;
  };
  const auto edgeValid = [&](Tree& tree, int child) -> bool {
    Tree::Edge& e = tree.node(child).edge;
    if (!e.valid_cached || e.valid_snapshot != req.snapshot)
    {
      e.valid = checkConnection(model_, tree.node(tree.node(child).parent).q, tree.node(child).q, req.human,
                                scene_, params_.collision_step);
      e.valid_cached = true;
      e.valid_snapshot = req.snapshot;
    }
    return e.valid;
  };
  const auto edgeCost = [&](Tree& tree, int child) -> double {
    Tree::Edge& e = tree.node(child).edge;
    if (!e.cost_cached || e.cost_snapshot != req.snapshot)
    {
      e.cost = connectionCost(model_, tree.node(tree.node(child).parent).q, tree.node(child).q, req.human,
                              req.cm);
      e.cost_cached = true;
      e.cost_snapshot = req.snapshot;
      ++res.cost_evaluations;
    }
    return e.cost;
  };

  // --- incumbent: the current subpath under this human snapshot ------------
  res.candidate_connections += static_cast<long>(suffix.connectionCount());
  std::size_t first_invalid = suffix.connectionCount();
  for (std::size_t i = 0; i < suffix.connectionCount(); ++i)
    if (!connValid(suffix, i))
    {
      first_invalid = i;
      break;
    }
  double c_curr = kInf;
  if (first_invalid == suffix.connectionCount())
  {
    c_curr = 0.0;
    for (std::size_t i = 0; i < suffix.connectionCount(); ++i)
      c_curr += connCost(suffix, i);
  }
  res.current_cost = c_curr;

  const HeuristicInfo h = heuristicFor(req.cm, model_);
  const auto hVia = [&](const Eigen::VectorXd& q) { return h(q, req.q_curr, q_goal); };
  const auto hGoal = [&](const Eigen::VectorXd& q) { return h(q, q, q_goal); };

  // Provably unimprovable: the remaining path already meets its lower bound.
  if (c_curr <= hVia(req.q_curr) * (1.0 + 1e-9))
    return finish();

  InformedSet informed(req.q_curr, q_goal, h.weights, model_.qMin(), model_.qMax());
  double c_best = c_curr;
  if (std::isfinite(c_best) && !h.linf)
    informed.setCBest(c_best);

  // --- Q1: current-path nodes between q_curr and the obstacle (or goal) ----
  const std::size_t q1_count = std::min(first_invalid + 1, suffix.waypointCount() - 1);
  std::vector<double> ctc(q1_count, 0.0);  // cost-to-come along the suffix
  for (std::size_t i = 1; i < q1_count; ++i)
    ctc[i] = ctc[i - 1] + connCost(suffix, i - 1);

  struct Q1Entry
  {
    std::size_t wp;
    double bound;  // cost-to-come + admissible cost-to-go
  };
  std::vector<Q1Entry> q1_entries;
  q1_entries.reserve(q1_count);
  for (std::size_t i = 0; i < q1_count; ++i)
    q1_entries.push_back({ i, ctc[i] + hGoal(suffix.waypoint(i)) });
  std::stable_sort(q1_entries.begin(), q1_entries.end(),
                   [](const Q1Entry& a, const Q1Entry& b) { return a.bound < b.bound; });

  const int max_total = params_.max_iterations > 0
                            ? params_.max_iterations
                            : static_cast<int>(std::lround(budget_s * params_.iters_per_second));
  RngStream rng(req.seed);

  std::vector<Path*> pool;
  pool.push_back(&suffix);
  for (Path& p : *req.path_set)
    pool.push_back(&p);

  std::map<std::vector<double>, Tree> kept_subtrees;

  // --- candidate assembly ---------------------------------------------------
  const auto adopt = [&](std::size_t q1_wp, Tree& tree, const std::vector<int>& chain, Path& p2,
                         std::size_t j2, double so_cost, bool so_distinct, double cost) {
    std::vector<Eigen::VectorXd> wps;
    std::vector<PathConnection> conns;
    const auto append = [&](const Eigen::VectorXd& q, const PathConnection& c) {
      wps.push_back(q);
      conns.push_back(c);
    };
    const auto fromSuffix = [&](std::size_t i) {
      PathConnection c = suffix.connection(i);
      c.second_order = false;
      return c;
    };

    wps.push_back(suffix.waypoint(0));
    for (std::size_t i = 1; i <= q1_wp; ++i)
      append(suffix.waypoint(i), fromSuffix(i - 1));
    for (std::size_t k = 1; k < chain.size(); ++k)
    {
      const Tree::Node& n = tree.node(chain[k]);
      PathConnection c;
      c.cost = n.edge.cost;
      c.cost_cached = n.edge.cost_cached;
      c.cost_snapshot = n.edge.cost_snapshot;
      c.valid = n.edge.valid;
      c.valid_cached = n.edge.valid_cached;
      c.valid_snapshot = n.edge.valid_snapshot;
      append(n.q, c);
    }
    if (so_distinct)
    {
      PathConnection c;
      c.cost = so_cost;
      c.cost_cached = true;
      c.cost_snapshot = req.snapshot;
      c.valid = true;
      c.valid_cached = true;
      c.valid_snapshot = req.snapshot;
      c.second_order = true;
      append(p2.waypoint(j2), c);
    }
    else if (!conns.empty())
    {
      // The subtree landed exactly on the target node: the last grown
      // connection is the switch joint.
      conns.back().second_order = true;
    }
    for (std::size_t t = j2; t + 1 < p2.waypointCount(); ++t)
    {
      PathConnection c = p2.connection(t);
      c.second_order = false;
      append(p2.waypoint(t + 1), c);
    }

    res.solved = true;
    res.cost = cost;
    res.path = Path(std::move(wps), std::move(conns));
    c_best = cost;
    if (!h.linf)
      informed.setCBest(c_best);
  };

  /* Validate the root→node chain plus the second-order hop and the target
   * path's tail; on success evaluate the cost lazily (only this chain) and
   * adopt if strictly cheaper. Invalid branches are hidden. Returns the
   * paper's "ok": the subtree reached the target with a valid chain. */
  const auto tryCapture = [&](std::size_t q1_wp, Tree& tree, int node_idx, Path& p2, std::size_t j2) -> bool {
    const std::vector<int> chain = tree.chainFromRoot(node_idx);
    for (std::size_t k = 1; k < chain.size(); ++k)
      if (!edgeValid(tree, chain[k]))
      {
        tree.hideBranch(chain[k]);
        return false;
      }

    const Eigen::VectorXd& q_new = tree.node(node_idx).q;
    const Eigen::VectorXd& q2 = p2.waypoint(j2);
    const bool so_distinct = (q_new - q2).norm() > 1e-12;
    if (so_distinct && !checkConnection(model_, q_new, q2, req.human, scene_, params_.collision_step))
    {
      if (node_idx != 0)
        tree.hideBranch(node_idx);
      return false;
    }
    for (std::size_t t = j2; t + 1 < p2.waypointCount(); ++t)
      if (!connValid(p2, t))
        return false;  // tail blocked: the target is dead under this snapshot

    // Lazy cost evaluation: exactly the connections of this candidate chain.
    double cost = ctc[q1_wp];
    long cand = static_cast<long>(q1_wp);
    for (std::size_t k = 1; k < chain.size(); ++k)
    {
      cost += edgeCost(tree, chain[k]);
      ++cand;
    }
    double so_cost = 0.0;
    if (so_distinct)
    {
      so_cost = connectionCost(model_, q_new, q2, req.human, req.cm);
      ++res.cost_evaluations;
      ++cand;
    }
    for (std::size_t t = j2; t + 1 < p2.waypointCount(); ++t)
    {
      cost += connCost(p2, t);
      ++cand;
    }
    cost += so_cost;
    res.candidate_connections += cand;

    if (cost < c_best)
      adopt(q1_wp, tree, chain, p2, j2, so_cost, so_distinct, cost);
    return true;
  };

  // --- Alg. 2 main loop -----------------------------------------------------
  for (const Q1Entry& q1 : q1_entries)
  {
    if (res.iterations >= max_total || wallExpired())
      break;
    if (q1.bound >= c_best)
      continue;  // pruned under the improved incumbent

    const Eigen::VectorXd& q1_q = suffix.waypoint(q1.wp);

    Tree tree = [&]() {
      auto it = subtrees_.find(keyOf(q1_q));
      if (it == subtrees_.end())
        return Tree(q1_q, h.weights);
      Tree t = std::move(it->second);
      subtrees_.erase(it);
      t.unhideAll();
      if (std::isfinite(c_best))
        t.prune([&](const Tree::Node& n) { return hVia(n.q) < c_best; });
      return t;
    }();

    // Q2: nodes of every available path inside the informed set.
    std::vector<Q2Target> q2_targets;
    for (Path* p : pool)
      for (std::size_t j = 0; j < p->waypointCount(); ++j)
      {
        const Eigen::VectorXd& q2 = p->waypoint(j);
        if ((q2 - q1_q).norm() <= 1e-9)
          continue;
        const double via = hVia(q2);
        if (via < c_best)
          q2_targets.push_back({ p, j, via });
      }
    std::stable_sort(q2_targets.begin(), q2_targets.end(),
                     [](const Q2Target& a, const Q2Target& b) { return a.h_goal < b.h_goal; });

    for (const Q2Target& target : q2_targets)
    {
      if (res.iterations >= max_total || wallExpired())
        break;
      if (q1.bound >= c_best || target.h_goal >= c_best)
        continue;

      Path& p2 = *target.path;
      const Eigen::VectorXd& q2 = p2.waypoint(target.wp);

      // A visible node may already be within capture range (subtree reuse).
      bool ok = false;
      {
        const int nearest = tree.nearest(q2);
        if (nearest >= 0 && tree.distance(tree.node(nearest).q, q2) < params_.min_dist)
          ok = tryCapture(q1.wp, tree, nearest, p2, target.wp);
      }

      int it = 0;
      while (!ok && it < params_.max_iter_per_target && res.iterations < max_total && !wallExpired())
      {
        ++it;
        ++res.iterations;

        const Eigen::VectorXd q_rand =
            (it % params_.target_bias_period) == 1
                ? q2
                : sampleWithHeuristic(informed, h, req.q_curr, q_goal, model_.qMin(), model_.qMax(), c_best,
                                      rng);
        const int i_near = tree.nearest(q_rand);
        if (i_near < 0)
          break;  // everything hidden (degenerate); give up on this target
        const Eigen::VectorXd& q_near = tree.node(i_near).q;
        const double d = tree.distance(q_rand, q_near);
        if (d <= 1e-12)
          continue;
        const Eigen::VectorXd q_new =
            d <= params_.step ? q_rand : Eigen::VectorXd(q_near + (params_.step / d) * (q_rand - q_near));

        // Collision check only — no cost evaluation during growth.
        if (!checkConnection(model_, q_near, q_new, req.human, scene_, params_.collision_step))
          continue;
        const int idx = tree.add(q_new, i_near);
        Tree::Edge& e = tree.node(idx).edge;
        e.valid = true;
        e.valid_cached = true;
        e.valid_snapshot = req.snapshot;

        if (tree.distance(q_new, q2) < params_.min_dist)
          ok = tryCapture(q1.wp, tree, idx, p2, target.wp);
      }
    }

    kept_subtrees.emplace(keyOf(q1_q), std::move(tree));
  }

  subtrees_ = std::move(kept_subtrees);
  return finish();
}

}  // namespace marsha
