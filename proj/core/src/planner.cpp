#include <marsha/planner.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace marsha
{

Tree::Tree(Eigen::VectorXd root, const Eigen::VectorXd& metric_weights)
{
  inv_w_ = metric_weights.size() > 0 ? metric_weights.cwiseInverse().eval()
                                     : Eigen::VectorXd::Ones(root.size());
  if (inv_w_.size() != root.size())
    throw std::invalid_argument("Tree: metric weight dimension mismatch");
  pushCoord(root);
  Node n;
  n.q = std::move(root);
  nodes_.push_back(std::move(n));
}

void Tree::pushCoord(const Eigen::VectorXd& q)
{
  if (coord_count_ == coords_.rows())
    coords_.conservativeResize(std::max<Eigen::Index>(64, 2 * coords_.rows()), inv_w_.size());
  coords_.row(coord_count_++) = q.cwiseProduct(inv_w_).transpose();
}

int Tree::add(const Eigen::VectorXd& q, int parent)
{
  if (parent < 0 || parent >= size())
    throw std::out_of_range("Tree::add: parent index out of range");
  pushCoord(q);
  Node n;
  n.q = q;
  n.parent = parent;
  const int idx = size();
  nodes_.push_back(std::move(n));
  nodes_[static_cast<std::size_t>(parent)].children.push_back(idx);
  return idx;
}

int Tree::nearest(const Eigen::VectorXd& q) const
{
  const Eigen::RowVectorXd qs = q.cwiseProduct(inv_w_).transpose();
  const Eigen::VectorXd d2 = (coords_.topRows(coord_count_).rowwise() - qs).rowwise().squaredNorm();
  int best = -1;
  double best_d2 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < size(); ++i)
  {
    if (nodes_[static_cast<std::size_t>(i)].hidden)
      continue;
    if (d2[i] < best_d2)
    {
      best_d2 = d2[i];
      best = i;
    }
  }
  return best;
}

std::vector<int> Tree::near(const Eigen::VectorXd& q, double radius) const
{
  const Eigen::RowVectorXd qs = q.cwiseProduct(inv_w_).transpose();
  const Eigen::VectorXd d2 = (coords_.topRows(coord_count_).rowwise() - qs).rowwise().squaredNorm();
  std::vector<int> out;
  const double r2 = radius * radius;
  for (int i = 0; i < size(); ++i)
    if (!nodes_[static_cast<std::size_t>(i)].hidden && d2[i] <= r2)
      out.push_back(i);
  return out;
}

std::vector<int> Tree::chainFromRoot(int i) const
{
  std::vector<int> chain;
  for (int at = i; at >= 0; at = nodes_[static_cast<std::size_t>(at)].parent)
    chain.push_back(at);
  std::reverse(chain.begin(), chain.end());
  return chain;
}

void Tree::rewire(int child, int new_parent)
{
  if (child <= 0 || child >= size() || new_parent < 0 || new_parent >= size())
    throw std::out_of_range("Tree::rewire: index out of range");
  for (int at = new_parent; at >= 0; at = nodes_[static_cast<std::size_t>(at)].parent)
    if (at == child)
      throw std::invalid_argument("Tree::rewire: would create a cycle");

  Node& c = nodes_[static_cast<std::size_t>(child)];
  auto& siblings = nodes_[static_cast<std::size_t>(c.parent)].children;
  siblings.erase(std::find(siblings.begin(), siblings.end(), child));
  c.parent = new_parent;
  c.edge = Edge{};  // the connection changed; caches no longer apply
  nodes_[static_cast<std::size_t>(new_parent)].children.push_back(child);
}

void Tree::setHidden(int i, bool hidden)
{
  std::vector<int> stack = { i };
  while (!stack.empty())
  {
    const int at = stack.back();
    stack.pop_back();
    nodes_[static_cast<std::size_t>(at)].hidden = hidden;
    for (int child : nodes_[static_cast<std::size_t>(at)].children)
      stack.push_back(child);
  }
}

void Tree::hideBranch(int i)
{
  if (i <= 0 || i >= size())
    throw std::out_of_range("Tree::hideBranch: cannot hide the root");
  setHidden(i, true);
}

void Tree::unhideAll()
{
  for (auto& n : nodes_)
    n.hidden = false;
}

double HeuristicInfo::operator()(const Eigen::VectorXd& q, const Eigen::VectorXd& s,
                                 const Eigen::VectorXd& g) const
{
  if (linf)
    return (q - s).cwiseQuotient(weights).cwiseAbs().maxCoeff() +
           (g - q).cwiseQuotient(weights).cwiseAbs().maxCoeff();
  return (q - s).cwiseQuotient(weights).norm() + (g - q).cwiseQuotient(weights).norm();
}

HeuristicInfo heuristicFor(const CostModel& cm, const RobotModel& model)
{
  HeuristicInfo h;
  if (std::holds_alternative<PathLength>(cm))
    h.weights = Eigen::VectorXd::Ones(model.dof());
  else
    h.weights = model.qdotMax();
  h.linf = std::holds_alternative<HampTime>(cm);
  return h;
}

Eigen::VectorXd sampleWithHeuristic(const InformedSet& informed, const HeuristicInfo& h,
                                    const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal,
                                    const Eigen::VectorXd& q_min, const Eigen::VectorXd& q_max, double c_best,
                                    RngStream& rng)
{
  if (!std::isfinite(c_best) || !h.linf)
    return informed.sample(rng);
  Eigen::VectorXd q(q_min.size());
  for (int tries = 0; tries < 100; ++tries)
  {
    for (Eigen::Index i = 0; i < q.size(); ++i)
      q[i] = rng.uniform(q_min[i], q_max[i]);
    if (h(q, q_start, q_goal) < c_best)
      return q;
  }
  return q;  // nothing prunable found; let the cost comparison sort it out
}

namespace
{

// Shortest metric-scaled distance from q to a polyline path.
double distanceToPath(const Eigen::VectorXd& q, const Path& path, const Eigen::VectorXd& inv_w)
{
  double best = std::numeric_limits<double>::infinity();
  const Eigen::VectorXd qs = q.cwiseProduct(inv_w);
  for (std::size_t i = 0; i + 1 < path.waypointCount(); ++i)
  {
    const Eigen::VectorXd a = path.waypoint(i).cwiseProduct(inv_w);
    const Eigen::VectorXd b = path.waypoint(i + 1).cwiseProduct(inv_w);
    const double len2 = (b - a).squaredNorm();
    const double t = len2 > 0.0 ? std::clamp((qs - a).dot(b - a) / len2, 0.0, 1.0) : 0.0;
    best = std::min(best, (qs - (a + t * (b - a))).norm());
  }
  return best;
}

struct EdgeEvaluator
{
  const RobotModel& model;
  const HumanState& human;
  const CostModel& cm;
  const std::vector<const Path*>& penalty_paths;
  double diversity_weight;
  double diversity_radius;
  const Eigen::VectorXd& inv_w;

  // Base cost plus a soft proximity penalty steering later path-set runs
  // away from corridors already taken (≥ 0, so admissibility is preserved).
  double operator()(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const
  {
    double c = connectionCost(model, a, b, human, cm);
    if (!penalty_paths.empty() && diversity_weight > 0.0)
    {
      const Eigen::VectorXd mid = 0.5 * (a + b);
      double proximity = 0.0;
      for (const Path* p : penalty_paths)
        proximity = std::max(proximity, 1.0 - distanceToPath(mid, *p, inv_w) / diversity_radius);
      if (proximity > 0.0)
        c += diversity_weight * (b - a).cwiseProduct(inv_w).norm() * proximity;
    }
    return c;
  }
};

std::optional<Path> planImpl(const RobotModel& model, const Scene& scene, const HumanState& human,
                             const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal, const CostModel& cm,
                             const PlannerParams& params, const std::vector<const Path*>& penalty_paths,
                             std::uint64_t seed, PlanReport* report)
{
  const auto t0 = std::chrono::steady_clock::now();
  validate(cm);
  if (q_start.size() != model.dof() || q_goal.size() != model.dof())
    throw std::invalid_argument("plan: configuration dimension mismatch");

  const auto finish = [&](std::optional<Path> result, int iterations) {
    if (report)
    {
      report->iterations = iterations;
      report->elapsed_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
    return result;
  };

  if (!checkConfig(model, q_start, human, scene) || !checkConfig(model, q_goal, human, scene))
    return finish(std::nullopt, 0);

  const HeuristicInfo heuristic = heuristicFor(cm, model);
  const Eigen::VectorXd inv_w = heuristic.weights.cwiseInverse();

  // Search-time cost: a fixed, small λ-sample count per edge. Growth edges are
  // at most `step` long, where this matches the adaptive rule's resolution at
  // a fraction of its price; callers re-evaluate returned paths as they wish.
  CostModel search_cm = cm;
  if (auto* ht = std::get_if<HampTime>(&search_cm); ht && ht->z == 0)
    ht->z = 5;
  if (auto* mt = std::get_if<MarshaTime>(&search_cm); mt && mt->z == 0)
    mt->z = 5;

  const EdgeEvaluator edge_cost{ model,  human, search_cm, penalty_paths, params.diversity_weight,
                                 params.diversity_radius, inv_w };
  const double c_min = heuristic(q_start, q_start, q_goal);

  RngStream rng(seed);
  Tree tree(q_start, heuristic.weights);
  std::vector<double> cost_from_root = { 0.0 };

  struct GoalLink
  {
    int node;
    double edge;
  };
  std::vector<GoalLink> goal_links;
  double c_best = std::numeric_limits<double>::infinity();
  int best_goal_node = -1;

  InformedSet informed(q_start, q_goal, heuristic.weights, model.qMin(), model.qMax());

  const auto refreshIncumbent = [&]() {
    for (const GoalLink& link : goal_links)
    {
      const double total = cost_from_root[static_cast<std::size_t>(link.node)] + link.edge;
      if (total < c_best)
      {
        c_best = total;
        best_goal_node = link.node;
        if (report)
          report->incumbent_costs.push_back(total);
        if (!heuristic.linf)
          informed.setCBest(c_best);
      }
    }
  };

  const auto tryGoal = [&](int i) {
    if (tree.distance(tree.node(i).q, q_goal) > params.goal_connect_radius)
      return;
    if (!checkConnection(model, tree.node(i).q, q_goal, human, scene, params.collision_step))
      return;
    goal_links.push_back({ i, edge_cost(tree.node(i).q, q_goal) });
  };

  // Seed with the direct connection when it is free.
  if (checkConnection(model, q_start, q_goal, human, scene, params.collision_step))
  {
    goal_links.push_back({ 0, edge_cost(q_start, q_goal) });
    refreshIncumbent();
  }

  const int max_iters = params.max_iterations > 0
                            ? params.max_iterations
                            : static_cast<int>(std::lround(params.budget_s * params.iters_per_second));
  const double dim = static_cast<double>(model.dof());

  int iter = 0;
  for (; iter < max_iters; ++iter)
  {
    // Provably optimal: the incumbent matches the straight-line lower bound.
    if (penalty_paths.empty() && c_best <= c_min * (1.0 + 1e-9))
      break;

    // Periodic goal bias keeps the goal region reachable in high dimensions;
    // without it the goal-connect ball is never hit by uniform samples.
    const Eigen::VectorXd q_rand =
        params.goal_bias_period > 0 && (iter % params.goal_bias_period) == params.goal_bias_period - 1
            ? q_goal
            : sampleWithHeuristic(informed, heuristic, q_start, q_goal, model.qMin(), model.qMax(), c_best,
                                  rng);
    const int i_near = tree.nearest(q_rand);
    const Eigen::VectorXd& q_near = tree.node(i_near).q;
    const double d = tree.distance(q_rand, q_near);
    if (d <= 1e-12)
      continue;
    const Eigen::VectorXd q_new = d <= params.step ? q_rand : Eigen::VectorXd(q_near + (params.step / d) * (q_rand - q_near));

    const double n = static_cast<double>(tree.size());
    const double radius =
        std::clamp(params.rewire_gamma * std::pow(std::log(n + 1.0) / (n + 1.0), 1.0 / dim), params.step,
                   2.0 * params.step);
    std::vector<int> near = tree.near(q_new, radius);

    // Candidate parents, most promising first; first collision-free one wins.
    std::vector<std::pair<double, int>> candidates;
    candidates.reserve(near.size());
    for (int j : near)
      candidates.emplace_back(cost_from_root[static_cast<std::size_t>(j)] + edge_cost(tree.node(j).q, q_new), j);
    std::sort(candidates.begin(), candidates.end());

    int parent = -1;
    double new_cost = 0.0;
    for (const auto& [cost, j] : candidates)
    {
      if (checkConnection(model, tree.node(j).q, q_new, human, scene, params.collision_step))
      {
        parent = j;
        new_cost = cost;
        break;
      }
    }
    if (parent < 0)
      continue;

    const int idx = tree.add(q_new, parent);
    cost_from_root.push_back(new_cost);

    // Rewire the neighborhood through the new node where that is cheaper.
    for (int j : near)
    {
      if (j == parent)
        continue;
      const double through = new_cost + edge_cost(q_new, tree.node(j).q);
      if (through < cost_from_root[static_cast<std::size_t>(j)] - 1e-12 &&
          checkConnection(model, q_new, tree.node(j).q, human, scene, params.collision_step))
      {
        const double delta = through - cost_from_root[static_cast<std::size_t>(j)];
        tree.rewire(j, idx);
        std::vector<int> stack = { j };
        while (!stack.empty())
        {
          const int at = stack.back();
          stack.pop_back();
          cost_from_root[static_cast<std::size_t>(at)] += delta;
          for (int child : tree.node(at).children)
            stack.push_back(child);
        }
      }
    }

    tryGoal(idx);
    refreshIncumbent();
  }

  if (best_goal_node < 0)
    return finish(std::nullopt, iter);

  std::vector<Eigen::VectorXd> waypoints;
  for (int i : tree.chainFromRoot(best_goal_node))
    waypoints.push_back(tree.node(i).q);
  waypoints.push_back(q_goal);
  return finish(Path(std::move(waypoints)), iter);
}

}  // namespace

std::optional<Path> plan(const RobotModel& model, const Scene& scene, const HumanState& human,
                         const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal, const CostModel& cm,
                         const PlannerParams& params, PlanReport* report)
{
  return planImpl(model, scene, human, q_start, q_goal, cm, params, {}, params.seed, report);
}

Path simplifyPath(const RobotModel& model, const Path& path, const HumanState& human, const Scene& scene,
                  const CostModel& cm, double collision_step)
{
  validate(cm);
  if (path.waypointCount() < 3)
    return path;

  const auto edgeCost = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return connectionCost(model, a, b, human, cm);
  };
  const auto edgeFree = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    return checkConnection(model, a, b, human, scene, collision_step);
  };

  // Splice out waypoint runs whose direct connection is free and no costlier.
  const auto splice = [&](std::vector<Eigen::VectorXd> w) {
    std::vector<double> edge(w.size() - 1);
    for (std::size_t i = 0; i + 1 < w.size(); ++i)
      edge[i] = edgeCost(w[i], w[i + 1]);
    std::vector<Eigen::VectorXd> out;
    out.push_back(w.front());
    std::size_t i = 0;
    while (i + 1 < w.size())
    {
      std::size_t next = i + 1;
      for (std::size_t k = w.size() - 1; k > i + 1; --k)
      {
        double chain = 0.0;
        for (std::size_t j = i; j < k; ++j)
          chain += edge[j];
        if (edgeCost(w[i], w[k]) <= chain * (1.0 + 1e-9) && edgeFree(w[i], w[k]))
        {
          next = k;
          break;
        }
      }
      out.push_back(w[next]);
      i = next;
    }
    return out;
  };

  std::vector<Eigen::VectorXd> w = splice(path.waypoints());

  // Elastic-band descent: pull interior waypoints toward their neighbours'
  // chord as far as the cost allows. Contracts sampling zigzag onto the
  // active safety/obstacle constraints; every move is strictly improving.
  // Joint-wise pulls follow the full-configuration pull so that incidental
  // motion on uninvolved joints can be straightened even when the combined
  // midpoint is blocked by an obstacle.
  const auto tryMove = [&](std::size_t i, const Eigen::VectorXd& cand, double base) {
    if (edgeCost(w[i - 1], cand) + edgeCost(cand, w[i + 1]) < base * (1.0 - 1e-9) &&
        edgeFree(w[i - 1], cand) && edgeFree(cand, w[i + 1]))
    {
      w[i] = cand;
      return true;
    }
    return false;
  };
  for (int sweep = 0; sweep < 12 && w.size() > 2; ++sweep)
  {
    bool improved = false;
    for (std::size_t i = 1; i + 1 < w.size(); ++i)
    {
      const Eigen::VectorXd mid = 0.5 * (w[i - 1] + w[i + 1]);
      double base = edgeCost(w[i - 1], w[i]) + edgeCost(w[i], w[i + 1]);
      for (double alpha : { 1.0, 0.5, 0.25 })
      {
        if (tryMove(i, w[i] + alpha * (mid - w[i]), base))
        {
          improved = true;
          break;
        }
      }
      for (Eigen::Index l = 0; l < w[i].size(); ++l)
      {
        if (std::abs(w[i][l] - mid[l]) < 1e-12)
          continue;
        base = edgeCost(w[i - 1], w[i]) + edgeCost(w[i], w[i + 1]);
        Eigen::VectorXd cand = w[i];
        cand[l] = mid[l];
        if (tryMove(i, cand, base))
          improved = true;
      }
    }
    w = splice(std::move(w));
    if (!improved)
      break;
  }
  return Path(std::move(w));
}

PathSetResult planPathSet(const RobotModel& model, const Scene& scene, const HumanState& human,
                          const Eigen::VectorXd& q_start, const Eigen::VectorXd& q_goal, const CostModel& cm,
                          int count, const PlannerParams& params)
{
  if (count < 1)
    throw std::invalid_argument("planPathSet: count must be >= 1");

  PathSetResult result;
  for (int k = 0; k < count; ++k)
  {
    std::vector<const Path*> penalties;
    penalties.reserve(result.paths.size());
    for (const Path& p : result.paths)
      penalties.push_back(&p);
    auto path = planImpl(model, scene, human, q_start, q_goal, cm, params, penalties,
                         hashCombine(params.seed, static_cast<std::uint64_t>(k)), nullptr);
    if (path)
      result.paths.push_back(std::move(*path));
  }
  result.complete = static_cast<int>(result.paths.size()) == count;
  return result;
}

}  // namespace marsha
