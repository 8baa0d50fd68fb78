#include <marsha/executor.hpp>

#include <marsha/rng.hpp>

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace marsha
{

bool strategyReplans(Strategy strategy)
{
  switch (strategy)
  {
    case Strategy::Mars:
    case Strategy::Marsha:
    case Strategy::MarshaLen:
      return true;
    default:
      return false;
  }
}

std::string strategyName(Strategy strategy)
{
  switch (strategy)
  {
    case Strategy::Dssm:
      return "dssm";
    case Strategy::Mars:
      return "mars";
    case Strategy::Marsha:
      return "marsha";
    case Strategy::Hamp:
      return "hamp";
    case Strategy::MinLen:
      return "minlen";
    case Strategy::MarshaLen:
      return "marsha-len";
  }
  throw std::invalid_argument("strategyName: unknown strategy");
}

Strategy parseStrategy(const std::string& token)
{
  std::string t;
  t.reserve(token.size());
  for (char c : token)
    t.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  if (t.size() > 5 && t.substr(t.size() - 5) == "+dssm")
    t.resize(t.size() - 5);

  if (t == "dssm")
    return Strategy::Dssm;
  if (t == "mars")
    return Strategy::Mars;
  if (t == "marsha")
    return Strategy::Marsha;
  if (t == "hamp")
    return Strategy::Hamp;
  if (t == "minlen" || t == "min-len")
    return Strategy::MinLen;
  if (t == "marsha-len" || t == "marshalen")
    return Strategy::MarshaLen;
  throw std::invalid_argument("unknown strategy '" + token + "'");
}

void validate(const Rates& rates)
{
  if (!(rates.execution_hz > 0.0) || !(rates.collision_hz > 0.0) || !(rates.replan_hz > 0.0))
    throw std::invalid_argument("Rates: all rates must be positive");
  if (rates.collision_hz > rates.execution_hz || rates.replan_hz > rates.collision_hz)
    throw std::invalid_argument("Rates: require execution_hz >= collision_hz >= replan_hz");
}

namespace
{

CostModel initialCostModel(Strategy strategy, const Scenario& sc)
{
  switch (strategy)
  {
    case Strategy::Dssm:
    case Strategy::Mars:
      return WeightedLength{};
    case Strategy::Marsha:
    case Strategy::Hamp:
      return HampTime{ sc.safety, 0, sc.scene.human_clearance };
    case Strategy::MinLen:
    case Strategy::MarshaLen:
      return PathLength{};
  }
  throw std::invalid_argument("initialCostModel: unknown strategy");
}

CostModel replanCostModel(Strategy strategy, const Scenario& sc)
{
  switch (strategy)
  {
    case Strategy::Mars:
      return WeightedLength{};
    case Strategy::Marsha:
    case Strategy::MarshaLen:
      return MarshaTime{ sc.safety, 0, sc.scene.human_clearance };
    default:
      throw std::invalid_argument("replanCostModel: strategy does not replan");
  }
}

double secondsSince(const std::chrono::steady_clock::time_point& t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

EpisodeMetrics runEpisode(const EpisodeConfig& config, const TickObserver& observer)
{
  const Scenario& sc = config.scenario;
  validate(config.rates);
  if (!(config.speed_fraction > 0.0) || config.speed_fraction > 1.0)
    throw std::invalid_argument("runEpisode: speed_fraction must lie in (0, 1]");
  if (config.extra_paths < 0)
    throw std::invalid_argument("runEpisode: extra_paths must be >= 0");
  if (config.adoption_margin < 0.0 || config.adoption_margin >= 1.0)
    throw std::invalid_argument("runEpisode: adoption_margin must lie in [0, 1)");
  if (sc.q_start.size() != sc.model.dof() || sc.q_goal.size() != sc.model.dof())
    throw std::invalid_argument("runEpisode: endpoint dimension does not match robot");
  if (!(sc.timeout_s > 0.0))
    throw std::invalid_argument("runEpisode: timeout must be positive");

  EpisodeMetrics m;
  const auto plan_t0 = std::chrono::steady_clock::now();

  // Episode-specific noise: combine the scenario's script seed with the
  // episode seed so repetitions see different perturbations.
  const HumanScript script(sc.script.tracks(), sc.script.noiseAmplitude(),
                           hashCombine(config.seed, sc.script.seed()));
  const HumanState human0 = script.sample(0.0);

  // Normalizer: duration of the optimal human-free path at this fraction.
  PlannerParams pp = config.planner;
  pp.seed = hashCombine(config.seed, 1);
  const auto nominal_path = plan(sc.model, sc.scene, HumanState{}, sc.q_start, sc.q_goal, WeightedLength{}, pp);
  if (!nominal_path)
    throw std::runtime_error("runEpisode: no human-free path between the endpoints");
  m.nominal_s = Trajectory(sc.model, *nominal_path, config.speed_fraction).duration();

  // Initial path, planned against the human pose at t = 0 (proactive
  // strategies additionally see it through their cost model).
  pp.seed = hashCombine(config.seed, 2);
  const CostModel initial_cm = initialCostModel(config.strategy, sc);
  const auto initial =
      plan(sc.model, sc.scene, human0, sc.q_start, sc.q_goal, initial_cm, pp);
  if (!initial)
    throw std::runtime_error("runEpisode: no initial path for scenario '" + sc.name + "'");
  Path current = simplifyPath(sc.model, *initial, human0, sc.scene, initial_cm, config.planner.collision_step);

  const bool replans = strategyReplans(config.strategy);
  std::vector<Path> path_set;
  CostModel replan_cm = PathLength{};
  if (replans)
  {
    replan_cm = replanCostModel(config.strategy, sc);
    pp.seed = hashCombine(config.seed, 3);
    auto set = planPathSet(sc.model, sc.scene, human0, sc.q_start, sc.q_goal, replan_cm,
                           1 + config.extra_paths, pp);
    path_set = std::move(set.paths);
    for (Path& p : path_set)
      p = simplifyPath(sc.model, p, human0, sc.scene, replan_cm, config.planner.collision_step);
  }
  m.planning_s = secondsSince(plan_t0);

  Replanner replanner(sc.model, sc.scene, config.replanner);
  Trajectory traj(sc.model, current, config.speed_fraction);
  double traj_clock = 0.0;

  const double dt = 1.0 / config.rates.execution_hz;
  const long collision_every =
      std::max<long>(1, std::lround(config.rates.execution_hz / config.rates.collision_hz));
  const long replan_every = std::max<long>(1, std::lround(config.rates.execution_hz / config.rates.replan_hz));
  const double budget = config.replanner.budget_s;
  const long max_ticks = std::llround(sc.timeout_s / dt);

  HumanState human;
  std::uint64_t snapshot = 0;
  double scaling_sum = 0.0;
  long moving_ticks = 0;

  for (long k = 0;; ++k)
  {
    const double t = k * dt;
    if (k >= max_ticks)
    {
      m.completed = false;
      m.executed_s = t;
      break;
    }

    // Collision loop: refresh the human snapshot used by everything below.
    if (k % collision_every == 0)
    {
      human = script.sample(t);
      ++snapshot;
    }

    // Replanning loop.
    if (replans && k % replan_every == 0)
    {
      const Trajectory::State st = traj.sample(traj_clock);
      ReplanRequest req;
      req.current_path = &current;
      req.q_curr = st.q;
      req.path_set = &path_set;
      req.human = human;
      req.budget_s = budget;
      req.cm = replan_cm;
      req.seed = hashCombine(config.seed, 0x1000 + static_cast<std::uint64_t>(k));
      req.snapshot = snapshot;
      const ReplanResult res = replanner.replan(req);

      ++m.replan_calls;
      m.replan_elapsed_total_s += res.elapsed_s;
      m.replan_elapsed_max_s = std::max(m.replan_elapsed_max_s, res.elapsed_s);
      if (res.elapsed_s > 1.2 * budget)
        ++m.replan_calls_over_budget;
      if (res.cost_evaluations > res.candidate_connections)
        ++m.lazy_violations;
      if (res.solved && res.cost < (1.0 - config.adoption_margin) * res.current_cost)
      {
        if (!(res.cost < res.current_cost))
          ++m.acceptance_violations;
        current = simplifyPath(sc.model, *res.path, human, sc.scene, replan_cm,
                               config.replanner.collision_step);
        traj = Trajectory(sc.model, current, config.speed_fraction);
        traj_clock = 0.0;
        ++m.replan_adoptions;
      }
    }

    // Execution loop: dSSM speed scaling dilates the trajectory clock.
    const Trajectory::State st = traj.sample(traj_clock);
    const bool moving = st.qdot.squaredNorm() > 0.0;
    double scale = 1.0;
    double separation = kInfinity;
    if (!human.empty())
    {
      const PoiKinematics kin = sc.model.poiKinematics(st.q);
      if (moving)
        scale = executionScale(kin, st.qdot, human, sc.safety, sc.scene.human_clearance);
      separation = minSeparation(kin.positions, human, sc.scene);
    }
    traj_clock += dt * scale;
    if (moving)
    {
      scaling_sum += 100.0 * scale;
      ++moving_ticks;
    }
    m.min_separation_observed = std::min(m.min_separation_observed, separation);

    if (observer)
      observer(TickInfo{ t, st.q, st.qdot, scale, human, separation });

    if (traj_clock >= traj.duration() - 1e-12)
    {
      m.completed = true;
      m.executed_s = (k + 1) * dt;
      break;
    }
  }

  m.exec_time_norm = m.executed_s / m.nominal_s;
  m.avg_scaling = moving_ticks > 0 ? scaling_sum / moving_ticks : 100.0;
  return m;
}

}  // namespace marsha
