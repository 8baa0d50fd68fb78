#include <marsha/cost.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marsha
{

namespace
{
void validateLambdaParams(const SafetyMode& mode, int z, double clearance, const char* name)
{
  std::visit([](const auto& p) { validate(p); }, mode);
  if (z != 0 && z < 2)
    throw std::invalid_argument(std::string(name) + ": z must be 0 (auto) or >= 2");
  if (clearance < 0.0)
    throw std::invalid_argument(std::string(name) + ": clearance must be >= 0");
}
}  // namespace

void validate(const CostModel& cm)
{
  if (const auto* hamp = std::get_if<HampTime>(&cm))
    validateLambdaParams(hamp->mode, hamp->z, hamp->clearance, "HampTime");
  else if (const auto* marsha = std::get_if<MarshaTime>(&cm))
    validateLambdaParams(marsha->mode, marsha->z, marsha->clearance, "MarshaTime");
}

double weightedLength(const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b, const Eigen::VectorXd& qdot_max)
{
  return ((q_b - q_a).cwiseQuotient(qdot_max)).norm();
}

Eigen::VectorXd directionalQdot(const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b,
                                const Eigen::VectorXd& qdot_max)
{
  if (q_a.size() != q_b.size() || q_a.size() != qdot_max.size())
    throw std::invalid_argument("directionalQdot: dimension mismatch");
  const Eigen::VectorXd delta = q_b - q_a;
  const double len = delta.norm();
  if (len <= 0.0)
    throw std::invalid_argument("directionalQdot: zero-length connection");
  const Eigen::VectorXd u = delta / len;

  // Largest speed along u that keeps every joint within its limit; the
  // binding joint ends up exactly saturated.
  double speed = kInfinity;
  for (Eigen::Index l = 0; l < u.size(); ++l)
    if (u[l] != 0.0)
      speed = std::min(speed, std::abs(qdot_max[l] / u[l]));
  return speed * u;
}

int lambdaSampleCount(double connection_length, int z)
{
  if (z != 0)
    return z;
  constexpr double kSpacing = 0.1;  // rad, joint-space L2
  const int intervals = static_cast<int>(std::ceil(connection_length / kSpacing));
  return std::max(5, intervals + 1);
}

double averageLambda(const RobotModel& model, const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b,
                     const HumanState& human, const SafetyMode& mode, int z, double clearance, double lambda_max)
{
  if (human.empty())
    return 1.0;
  const Eigen::VectorXd delta = q_b - q_a;
  const double len = delta.norm();
  if (len <= 0.0)
    return lambdaAt(model, q_a, Eigen::VectorXd::Zero(q_a.size()), human, mode, lambda_max, clearance);

  const Eigen::VectorXd qdot = directionalQdot(q_a, q_b, model.qdotMax());
  const int count = lambdaSampleCount(len, z);
  double sum = 0.0;
  for (int i = 0; i < count; ++i)
  {
    const double s = static_cast<double>(i) / static_cast<double>(count - 1);
    sum += lambdaAt(model, q_a + s * delta, qdot, human, mode, lambda_max, clearance);
  }
  return sum / static_cast<double>(count);
}

double connectionCost(const RobotModel& model, const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b,
                      const HumanState& human, const CostModel& cm)
{
  if (q_a.size() != q_b.size() || q_a.size() != model.dof())
    throw std::invalid_argument("connectionCost: dimension mismatch");
  if ((q_b - q_a).norm() <= 0.0)
    return 0.0;

  return std::visit(
      [&](const auto& m) -> double {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, PathLength>)
        {
          return (q_b - q_a).norm();
        }
        else if constexpr (std::is_same_v<T, WeightedLength>)
        {
          return weightedLength(q_a, q_b, model.qdotMax());
        }
        else if constexpr (std::is_same_v<T, HampTime>)
        {
          const double lambda = averageLambda(model, q_a, q_b, human, m.mode, m.z, m.clearance, m.lambda_max);
          return ((q_b - q_a).cwiseQuotient(model.qdotMax())).cwiseAbs().maxCoeff() * lambda;
        }
        else
        {
          const double lambda = averageLambda(model, q_a, q_b, human, m.mode, m.z, m.clearance, m.lambda_max);
          return weightedLength(q_a, q_b, model.qdotMax()) * lambda;
        }
      },
      cm);
}

double pathCost(const RobotModel& model, const std::vector<Eigen::VectorXd>& waypoints, const HumanState& human,
                const CostModel& cm)
{
  if (waypoints.size() < 2)
    throw std::invalid_argument("pathCost: need at least 2 waypoints");
  double total = 0.0;
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
    total += connectionCost(model, waypoints[i], waypoints[i + 1], human, cm);
  return total;
}

}  // namespace marsha
