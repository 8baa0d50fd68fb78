#include <doctest.h>

#include <marsha/cost.hpp>
#include <marsha/kinematics.hpp>
#include <marsha/path.hpp>
#include <marsha/planner.hpp>
#include <marsha/replanner.hpp>
#include <marsha/world.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

using namespace marsha;

namespace
{

Eigen::VectorXd vec(std::initializer_list<double> xs)
{
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs)
    v[i++] = x;
  return v;
}

std::size_t secondOrderCount(const Path& p)
{
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.connectionCount(); ++i)
    if (p.connection(i).second_order)
      ++n;
  return n;
}

bool pathFeasible(const RobotModel& model, const Path& path, const HumanState& human, const Scene& scene)
{
  for (std::size_t i = 0; i + 1 < path.waypointCount(); ++i)
    if (!checkConnection(model, path.waypoint(i), path.waypoint(i + 1), human, scene, 0.05))
      return false;
  return true;
}

/* Wall scene with a path set planned around it, plus a human keypoint placed
 * onto the first path's corridor such that the first path is invalidated
 * while the second stays feasible. All seeds pinned. */
struct SwitchFixture
{
  RobotModel model = models::planar2();
  Scene scene;
  Eigen::VectorXd start = vec({ 0.0, 0.0 });
  Eigen::VectorXd goal = vec({ -M_PI / 2.0, 0.0 });
  std::vector<Path> paths;
  HumanState human;

  SwitchFixture()
  {
    scene.static_obstacles.push_back(
        Box{ Eigen::Vector3d(1.1, -2.5, -0.5), Eigen::Vector3d(1.3, -0.3, 0.5) });

    PlannerParams params;
    params.max_iterations = 5000;
    params.seed = 17;
    const HumanState no_human;
    PathSetResult set = planPathSet(model, scene, no_human, start, goal, PathLength{}, 3, params);
    REQUIRE(set.paths.size() >= 2);
    paths = std::move(set.paths);

    // Candidate blockers: interior waypoints of path 0, farthest-from-path-1
    // first, so the block hits the corridor unique to path 0.
    std::vector<std::pair<double, std::size_t>> order;
    for (std::size_t i = 1; i + 1 < paths[0].waypointCount(); ++i)
    {
      const Eigen::VectorXd& q = paths[0].waypoint(i);
      order.emplace_back(-(q - projectOnPath(q, paths[1]).q).norm(), i);
    }
    std::sort(order.begin(), order.end());
    bool placed = false;
    for (const auto& [neg_gap, i] : order)
    {
      HumanState candidate;
      const Eigen::Vector3d tip = model.poiPositions(paths[0].waypoint(i)).back();
      candidate.keypoints.push_back({ tip, Eigen::Vector3d::Zero() });
      if (!pathFeasible(model, paths[0], candidate, scene) &&
          pathFeasible(model, paths[1], candidate, scene) &&
          checkConfig(model, start, candidate, scene) && checkConfig(model, goal, candidate, scene))
      {
        human = candidate;
        placed = true;
        break;
      }
    }
    REQUIRE(placed);
  }

  ReplanResult run(Path& current, std::vector<Path>& set, Replanner& replanner,
                   std::uint64_t snapshot = 1) const
  {
    ReplanRequest req;
    req.current_path = &current;
    req.q_curr = start;
    req.path_set = &set;
    req.human = human;
    req.budget_s = 0.0;  // use the replanner's params
    req.cm = MarshaTime{ SSMParams{}, 5 };
    req.seed = 42;
    req.snapshot = snapshot;
    return replanner.replan(req);
  }
};

}  // namespace

TEST_SUITE("replanner")
{
  TEST_CASE("request validation and trivial returns")
  {
    const RobotModel m = models::planar2();
    Replanner replanner(m, Scene{}, ReplannerParams{});
    Path straight({ vec({ 0.0, 0.0 }), vec({ 1.4, 0.0 }) });
    std::vector<Path> empty_set;

    ReplanRequest req;
    req.q_curr = vec({ 0.0, 0.0 });
    req.cm = PathLength{};
    CHECK_THROWS_AS(replanner.replan(req), std::invalid_argument);  // no paths at all

    req.current_path = &straight;
    CHECK_THROWS_AS(replanner.replan(req), std::invalid_argument);  // still no path set
    req.path_set = &empty_set;

    SUBCASE("q_curr must lie on the current path")
    {
      req.q_curr = vec({ 0.5, 0.5 });
      CHECK_THROWS_AS(replanner.replan(req), std::invalid_argument);
    }

    SUBCASE("a non-positive budget is rejected")
    {
      ReplannerParams zero;
      zero.budget_s = 0.0;
      Replanner rz(m, Scene{}, zero);
      req.budget_s = 0.0;
      CHECK_THROWS_AS(rz.replan(req), std::invalid_argument);
    }

    SUBCASE("already at the goal: nothing to do")
    {
      req.q_curr = vec({ 1.4, 0.0 });
      const ReplanResult res = replanner.replan(req);
      CHECK_FALSE(res.solved);
      CHECK(res.iterations == 0);
      CHECK(res.cost_evaluations == 0);
      CHECK(res.current_cost == 0.0);
    }
  }

  TEST_CASE("a provably optimal current path returns immediately without growth")
  {
    const RobotModel m = models::planar2();
    Replanner replanner(m, Scene{}, ReplannerParams{});
    Path straight({ vec({ 0.0, 0.0 }), vec({ 1.4, 0.0 }) });
    std::vector<Path> set;
    set.push_back(Path({ vec({ 0.0, 0.0 }), vec({ 0.5, 1.0 }), vec({ 1.4, 0.0 }) }));  // worse alternate

    ReplanRequest req;
    req.current_path = &straight;
    req.q_curr = vec({ 0.0, 0.0 });
    req.path_set = &set;
    req.cm = PathLength{};
    req.seed = 1;
    const ReplanResult res = replanner.replan(req);
    CHECK_FALSE(res.solved);
    CHECK(res.iterations == 0);
    CHECK(res.current_cost == doctest::Approx(1.4).epsilon(1e-12));
  }

  TEST_CASE("free space: the detouring current path is shortcut to its lower bound")
  {
    const RobotModel m = models::planar2();
    Replanner replanner(m, Scene{}, ReplannerParams{});
    Path cur({ vec({ 0.0, 0.0 }), vec({ 0.7, 2.2 }), vec({ 1.4, 0.0 }) });
    std::vector<Path> set;
    set.push_back(
        Path({ vec({ 0.0, 0.0 }), vec({ 0.35, 0.0 }), vec({ 1.05, 0.0 }), vec({ 1.4, 0.0 }) }));

    ReplanRequest req;
    req.current_path = &cur;
    req.q_curr = vec({ 0.0, 0.0 });
    req.path_set = &set;
    req.cm = PathLength{};
    req.seed = 2;
    req.snapshot = 1;
    const ReplanResult res = replanner.replan(req);

    REQUIRE(res.solved);
    REQUIRE(res.path.has_value());
    const double detour = 2.0 * std::hypot(0.7, 2.2);
    CHECK(res.current_cost == doctest::Approx(detour).epsilon(1e-12));
    // Every candidate realizes the 1.4 lower bound, whichever is adopted.
    CHECK(res.cost == doctest::Approx(1.4).epsilon(1e-9));
    CHECK(res.cost < res.current_cost);
    CHECK((res.path->start() - req.q_curr).norm() == 0.0);
    CHECK((res.path->goal() - cur.goal()).norm() == 0.0);
    CHECK(secondOrderCount(*res.path) == 1);
    CHECK(res.cost_evaluations <= res.candidate_connections);

    // The reported cost is the true cost of the adopted path.
    CHECK(res.cost ==
          doctest::Approx(pathCost(m, res.path->waypoints(), HumanState{}, req.cm)).epsilon(1e-12));
  }

  TEST_CASE("q_curr in the middle of a segment: the suffix starts exactly there")
  {
    const RobotModel m = models::planar2();
    Replanner replanner(m, Scene{}, ReplannerParams{});
    Path cur({ vec({ 0.0, 0.0 }), vec({ 0.7, 2.2 }), vec({ 1.4, 0.0 }) });
    std::vector<Path> set;
    set.push_back(Path({ vec({ 0.0, 0.0 }), vec({ 1.4, 0.0 }) }));

    ReplanRequest req;
    req.current_path = &cur;
    req.q_curr = cur.pointAt(0.9);
    req.path_set = &set;
    req.cm = PathLength{};
    req.seed = 3;
    const ReplanResult res = replanner.replan(req);

    REQUIRE(res.solved);
    REQUIRE(res.path.has_value());
    CHECK((res.path->start() - req.q_curr).norm() == 0.0);
    CHECK((res.path->goal() - cur.goal()).norm() == 0.0);
    const double remaining = (cur.length() - 0.9);
    CHECK(res.current_cost == doctest::Approx(remaining).epsilon(1e-12));
    CHECK(res.cost < res.current_cost);
    // Admissibility: no adopted path beats the straight-line bound.
    CHECK(res.cost >= (cur.goal() - req.q_curr).norm() - 1e-9);
  }

  TEST_CASE("human blocking the current path forces a switch to a live alternate")
  {
    const SwitchFixture fx;
    ReplannerParams rp;
    rp.max_iterations = 20000;
    Replanner replanner(fx.model, fx.scene, rp);

    Path current = fx.paths[0];
    std::vector<Path> set = { fx.paths[1] };
    const ReplanResult res = fx.run(current, set, replanner);

    CHECK(std::isinf(res.current_cost));  // the human severed the current path
    REQUIRE(res.solved);
    REQUIRE(res.path.has_value());
    CHECK((res.path->start() - fx.start).norm() == 0.0);
    CHECK((res.path->goal() - fx.goal).norm() == 0.0);
    CHECK(pathFeasible(fx.model, *res.path, fx.human, fx.scene));
    CHECK(secondOrderCount(*res.path) == 1);
    CHECK(res.cost_evaluations <= res.candidate_connections);
    CHECK(res.cost ==
          doctest::Approx(pathCost(fx.model, res.path->waypoints(), fx.human,
                                   CostModel(MarshaTime{ SSMParams{}, 5 })))
              .epsilon(1e-9));
  }

  TEST_CASE("identical requests on fresh replanners give identical results")
  {
    const SwitchFixture fx;
    ReplannerParams rp;
    rp.max_iterations = 20000;

    const auto once = [&]() {
      Replanner replanner(fx.model, fx.scene, rp);
      Path current = fx.paths[0];
      std::vector<Path> set = { fx.paths[1] };
      return fx.run(current, set, replanner);
    };
    const ReplanResult a = once();
    const ReplanResult b = once();

    REQUIRE(a.solved);
    REQUIRE(b.solved);
    CHECK(a.cost == b.cost);
    CHECK(a.iterations == b.iterations);
    CHECK(a.cost_evaluations == b.cost_evaluations);
    CHECK(a.candidate_connections == b.candidate_connections);
    REQUIRE(a.path->waypointCount() == b.path->waypointCount());
    for (std::size_t i = 0; i < a.path->waypointCount(); ++i)
      CHECK((a.path->waypoint(i) - b.path->waypoint(i)).norm() == 0.0);
  }

  TEST_CASE("the iteration budget bounds the growth work")
  {
    const SwitchFixture fx;

    ReplannerParams tight;
    tight.max_iterations = 7;
    Replanner r1(fx.model, fx.scene, tight);
    Path cur1 = fx.paths[0];
    std::vector<Path> set1 = { fx.paths[1] };
    const ReplanResult res1 = fx.run(cur1, set1, r1);
    CHECK(res1.iterations <= 7);

    ReplannerParams derived;
    derived.budget_s = 0.002;
    derived.iters_per_second = 1000;  // derives a 2-iteration cap
    Replanner r2(fx.model, fx.scene, derived);
    Path cur2 = fx.paths[0];
    std::vector<Path> set2 = { fx.paths[1] };
    const ReplanResult res2 = fx.run(cur2, set2, r2);
    CHECK(res2.iterations <= 2);
  }

  TEST_CASE("after adopting, the next call sees the new path at its cached cost")
  {
    const SwitchFixture fx;
    ReplannerParams rp;
    rp.max_iterations = 20000;
    Replanner replanner(fx.model, fx.scene, rp);

    Path current = fx.paths[0];
    std::vector<Path> set = { fx.paths[1] };
    const ReplanResult first = fx.run(current, set, replanner);
    REQUIRE(first.solved);

    Path adopted = *first.path;  // caches ride along
    const ReplanResult second = fx.run(adopted, set, replanner);
    CHECK(second.current_cost == doctest::Approx(first.cost).epsilon(1e-12));
    if (second.solved)
      CHECK(second.cost < second.current_cost);

    // Resetting the persistent subtrees does not change what a fresh request
    // computes (only how much of it is reused).
    replanner.reset();
    Path current2 = fx.paths[0];
    std::vector<Path> set2 = { fx.paths[1] };
    const ReplanResult again = fx.run(current2, set2, replanner);
    REQUIRE(again.solved == first.solved);
    CHECK(again.cost == first.cost);
    REQUIRE(again.path->waypointCount() == first.path->waypointCount());
    for (std::size_t i = 0; i < again.path->waypointCount(); ++i)
      CHECK((again.path->waypoint(i) - first.path->waypoint(i)).norm() == 0.0);
  }
}
