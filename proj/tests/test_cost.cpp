#include <doctest.h>

#include <marsha/cost.hpp>
#include <marsha/kinematics.hpp>
#include <marsha/rng.hpp>

#include <Eigen/Dense>
#include <cmath>
#include <stdexcept>
#include <vector>

using namespace marsha;

namespace
{

Eigen::VectorXd vec2(double a, double b)
{
  Eigen::VectorXd v(2);
  v << a, b;
  return v;
}

HumanState randomHuman(RngStream& rng, int n_keypoints, double min_radius = 0.3)
{
  HumanState h;
  for (int k = 0; k < n_keypoints; ++k)
  {
    Eigen::Vector3d pos;
    do
      pos = Eigen::Vector3d(rng.uniform(-2.5, 2.5), rng.uniform(-2.5, 2.5), rng.uniform(0.0, 2.0));
    while (pos.norm() < min_radius);
    h.keypoints.push_back(
        { pos, Eigen::Vector3d(rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)) });
  }
  return h;
}

Eigen::VectorXd randomConfig(const RobotModel& m, RngStream& rng)
{
  Eigen::VectorXd q(m.dof());
  for (int i = 0; i < m.dof(); ++i)
    q[i] = rng.uniform(m.qMin()[i], m.qMax()[i]);
  return q;
}

}  // namespace

TEST_SUITE("cost")
{
  TEST_CASE("directionalQdot saturates the binding joint")
  {
    CHECK((directionalQdot(vec2(0, 0), vec2(1, 0), vec2(1, 1)) - vec2(1, 0)).norm() == 0.0);
    // Diagonal move, second joint twice as fast: joint 0 binds, speed = sqrt(2).
    CHECK((directionalQdot(vec2(0, 0), vec2(1, 1), vec2(1, 2)) - vec2(1, 1)).norm() < 1e-15);
    // Axis move uses that joint's full limit.
    CHECK((directionalQdot(vec2(0, 0), vec2(0, 1), vec2(1, 2)) - vec2(0, 2)).norm() == 0.0);
    // Direction is preserved and sign follows the connection.
    CHECK((directionalQdot(vec2(1, 1), vec2(0, 0), vec2(1, 2)) - vec2(-1, -1)).norm() < 1e-15);
    CHECK_THROWS_AS(directionalQdot(vec2(1, 1), vec2(1, 1), vec2(1, 2)), std::invalid_argument);
  }

  TEST_CASE("directionalQdot property: exactly one joint saturated, none above limit")
  {
    RngStream rng(7);
    for (int trial = 0; trial < 500; ++trial)
    {
      const int n = 2 + static_cast<int>(rng.uniformInt(5));
      Eigen::VectorXd a(n), b(n), qm(n);
      for (int i = 0; i < n; ++i)
      {
        a[i] = rng.uniform(-3, 3);
        b[i] = rng.uniform(-3, 3);
        qm[i] = rng.uniform(0.2, 3.0);
      }
      if ((b - a).norm() < 1e-9)
        continue;
      const Eigen::VectorXd qd = directionalQdot(a, b, qm);
      double max_ratio = 0.0;
      for (int i = 0; i < n; ++i)
        max_ratio = std::max(max_ratio, std::abs(qd[i]) / qm[i]);
      REQUIRE(max_ratio == doctest::Approx(1.0).epsilon(1e-12));
      // Collinear with the connection.
      const Eigen::VectorXd u = (b - a).normalized();
      REQUIRE((qd - qd.norm() * u).norm() < 1e-9);
    }
  }

  TEST_CASE("weightedLength hand value")
  {
    CHECK(weightedLength(vec2(0, 0), vec2(1, 1), vec2(1, 2)) ==
          doctest::Approx(std::sqrt(1.25)).epsilon(1e-15));
    CHECK(weightedLength(vec2(2, 3), vec2(2, 3), vec2(1, 2)) == 0.0);
  }

  TEST_CASE("lambdaSampleCount: explicit z wins, auto keeps spacing <= 0.1 with at least 5")
  {
    CHECK(lambdaSampleCount(10.0, 7) == 7);
    CHECK(lambdaSampleCount(0.0, 2) == 2);
    for (double L : { 0.0, 0.05, 0.3, 0.42, 1.0, 7.3 })
    {
      const int n = lambdaSampleCount(L, 0);
      REQUIRE(n >= 5);
      REQUIRE(L / (n - 1) <= 0.1 + 1e-12);
      REQUIRE(n <= std::max(5.0, L / 0.1 + 2.0));  // not wastefully large
    }
  }

  TEST_CASE("connectionCost hand values on a 3-4-5 planar move")
  {
    const RobotModel m = models::planar2();  // qdot_max = (1, 1)
    const Eigen::VectorXd a = vec2(0, 0), b = vec2(0.6, 0.8);
    const HumanState none;
    CHECK(connectionCost(m, a, b, none, PathLength{}) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(connectionCost(m, a, b, none, WeightedLength{}) == doctest::Approx(1.0).epsilon(1e-15));
    // No human: lambda = 1, HampTime is the L-inf nominal time, MarshaTime the L2 one.
    CHECK(connectionCost(m, a, b, none, HampTime{ SSMParams{} }) == doctest::Approx(0.8).epsilon(1e-15));
    CHECK(connectionCost(m, a, b, none, MarshaTime{ SSMParams{} }) == doctest::Approx(1.0).epsilon(1e-15));
    // Equal endpoints cost 0 under every model.
    CHECK(connectionCost(m, a, a, none, MarshaTime{ SSMParams{} }) == 0.0);
  }

  TEST_CASE("MarshaTime equals WeightedLength whenever no human is present")
  {
    const RobotModel m = models::arm6();
    RngStream rng(11);
    for (int trial = 0; trial < 100; ++trial)
    {
      const Eigen::VectorXd a = randomConfig(m, rng), b = randomConfig(m, rng);
      const double wl = connectionCost(m, a, b, HumanState{}, WeightedLength{});
      const double mt = connectionCost(m, a, b, HumanState{}, MarshaTime{ SSMParams{} });
      REQUIRE(mt == wl);  // lambda-bar is exactly 1
    }
  }

  TEST_CASE("averageLambda matches an explicit equally-spaced evaluation")
  {
    const RobotModel m = models::planar2();
    RngStream rng(13);
    const SafetyMode mode = SSMParams{};
    for (int trial = 0; trial < 50; ++trial)
    {
      const Eigen::VectorXd a = randomConfig(m, rng), b = randomConfig(m, rng);
      if ((b - a).norm() < 1e-6)
        continue;
      const HumanState h = randomHuman(rng, 2);
      for (int z : { 2, 5, 17 })
      {
        const Eigen::VectorXd qd = directionalQdot(a, b, m.qdotMax());
        double sum = 0.0;
        for (int i = 0; i < z; ++i)
        {
          const double s = static_cast<double>(i) / (z - 1);
          sum += lambdaAt(m, a + s * (b - a), qd, h, mode);
        }
        REQUIRE(averageLambda(m, a, b, h, mode, z) == doctest::Approx(sum / z).epsilon(1e-12));
      }
    }
  }

  TEST_CASE("averageLambda is stable under sample-density doubling away from the stop shell")
  {
    // lambda varies smoothly once the human keeps a generous separation, so
    // refining z -> 2z-1 (which nests the coarse nodes) moves the mean by
    // under 5%.
    const RobotModel m = models::planar2();
    RngStream rng(17);
    const SafetyMode mode = SSMParams{};
    for (int trial = 0; trial < 50; ++trial)
    {
      Eigen::VectorXd a = randomConfig(m, rng);
      Eigen::VectorXd dir = randomConfig(m, rng) - a;
      if (dir.norm() < 1e-6)
        continue;
      const Eigen::VectorXd b = a + dir.normalized() * std::min(0.6, dir.norm());
      HumanState h = randomHuman(rng, 2, /*min_radius=*/3.4);  // >= ~1.4 m from any poi
      for (auto& kp : h.keypoints)
        kp.velocity.setZero();
      const double coarse = averageLambda(m, a, b, h, mode, 9);
      const double fine = averageLambda(m, a, b, h, mode, 17);
      REQUIRE(std::abs(fine - coarse) <= 0.05 * coarse);
    }
  }

  TEST_CASE("expected traversal time dominates the nominal-time estimate")
  {
    // 1000 random instances across both models, shared lambda parameters:
    // the L2-based expected time is never below the L-inf-based one.
    const RobotModel planar = models::planar2();
    const RobotModel arm = models::arm6();
    RngStream rng(19);
    int checked = 0;
    while (checked < 1000)
    {
      const RobotModel& m = (rng.uniformInt(2) == 0) ? planar : arm;
      const Eigen::VectorXd a = randomConfig(m, rng), b = randomConfig(m, rng);
      if ((b - a).norm() < 1e-9)
        continue;
      const HumanState h = randomHuman(rng, static_cast<int>(rng.uniformInt(4)));
      const int z = static_cast<int>(rng.uniformInt(3)) == 0 ? 0 : 2 + static_cast<int>(rng.uniformInt(9));
      const double clearance = rng.uniform(0.0, 0.2);
      const double hamp = connectionCost(m, a, b, h, HampTime{ SSMParams{}, z, clearance });
      const double marsha = connectionCost(m, a, b, h, MarshaTime{ SSMParams{}, z, clearance });
      REQUIRE(marsha >= hamp * (1.0 - 1e-12));
      ++checked;
    }
  }

  TEST_CASE("MarshaTime never undercuts WeightedLength (lambda floored at 1)")
  {
    const RobotModel m = models::planar2();
    RngStream rng(23);
    for (int trial = 0; trial < 300; ++trial)
    {
      const Eigen::VectorXd a = randomConfig(m, rng), b = randomConfig(m, rng);
      if ((b - a).norm() < 1e-9)
        continue;
      const HumanState h = randomHuman(rng, 1 + static_cast<int>(rng.uniformInt(3)));
      const double wl = connectionCost(m, a, b, h, WeightedLength{});
      const double mt = connectionCost(m, a, b, h, MarshaTime{ SSMParams{} });
      REQUIRE(mt >= wl * (1.0 - 1e-12));
    }
  }

  TEST_CASE("pathCost is the sum of its connection costs")
  {
    const RobotModel m = models::planar2();
    RngStream rng(29);
    const HumanState h = randomHuman(rng, 2);
    const CostModel cm = MarshaTime{ SSMParams{}, 5 };
    const std::vector<Eigen::VectorXd> w = { vec2(0, 0), vec2(0.5, -0.3), vec2(1.1, 0.4) };
    const double total = pathCost(m, w, h, cm);
    const double parts = connectionCost(m, w[0], w[1], h, cm) + connectionCost(m, w[1], w[2], h, cm);
    CHECK(total == doctest::Approx(parts).epsilon(1e-15));
    CHECK_THROWS_AS(pathCost(m, { vec2(0, 0) }, h, cm), std::invalid_argument);
  }

  TEST_CASE("cost-model validation")
  {
    CHECK_NOTHROW(validate(CostModel{ MarshaTime{ SSMParams{}, 0 } }));
    CHECK_NOTHROW(validate(CostModel{ HampTime{ PFLParams{}, 2 } }));
    CHECK_THROWS_AS(validate(CostModel{ MarshaTime{ SSMParams{}, 1 } }), std::invalid_argument);
    CHECK_THROWS_AS(validate(CostModel{ HampTime{ SSMParams{}, 0, -0.1 } }), std::invalid_argument);
    CHECK_THROWS_AS(validate(CostModel{ MarshaTime{ SSMParams{ -1.0, 0.15, 1.6, 2.5 } } }),
                    std::invalid_argument);
    CHECK_NOTHROW(validate(CostModel{ PathLength{} }));
    CHECK_NOTHROW(validate(CostModel{ WeightedLength{} }));
    CHECK_THROWS_AS(connectionCost(models::planar2(), vec2(0, 0), Eigen::VectorXd::Zero(3), HumanState{},
                                   PathLength{}),
                    std::invalid_argument);
  }
}
