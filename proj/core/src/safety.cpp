#include <marsha/safety.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace marsha
{

void validate(const SSMParams& p)
{
  if (p.C < 0.0 || p.T_r < 0.0 || p.v_h < 0.0)
    throw std::invalid_argument("SSMParams: C, T_r and v_h must be >= 0");
  if (!(p.a_s > 0.0))
    throw std::invalid_argument("SSMParams: a_s must be > 0");
}

void validate(const PFLParams& p)
{
  if (!(p.F_max > 0.0) || !(p.k > 0.0) || !(p.m_r > 0.0) || !(p.m_h > 0.0))
    throw std::invalid_argument("PFLParams: all parameters must be > 0");
}

double ssmVmax(const SSMParams& p, double S)
{
  if (std::isinf(S))
    return kInfinity;
  const double at = p.a_s * p.T_r;
  const double radicand = p.v_h * p.v_h + at * at - 2.0 * p.a_s * (p.C - S);
  const double v = std::sqrt(std::max(radicand, 0.0)) - at - p.v_h;
  return std::max(v, 0.0);
}

double pflVmax(const PFLParams& p)
{
  return p.F_max / std::sqrt(p.k) * std::sqrt(1.0 / p.m_r + 1.0 / p.m_h);
}

double modeVmax(const SafetyMode& mode, double S)
{
  if (const auto* ssm = std::get_if<SSMParams>(&mode))
    return ssmVmax(*ssm, S);
  return pflVmax(std::get<PFLParams>(mode));
}

double pairVelocity(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                    int poi_index, const HumanKeypoint& keypoint)
{
  const auto kin = model.poiKinematics(q);
  const Eigen::Vector3d r = kin.positions[static_cast<std::size_t>(poi_index)];
  const Eigen::Vector3d d = keypoint.position - r;
  const double dist = d.norm();
  if (dist <= 0.0)
    throw std::domain_error("pairVelocity: coincident robot/human points, unit vector undefined");
  const Eigen::Vector3d u = d / dist;
  const Eigen::Vector3d v_r = kin.jacobians[static_cast<std::size_t>(poi_index)] * qdot;
  return (v_r - keypoint.velocity).dot(u);
}

double lambdaAt(const PoiKinematics& kin, const Eigen::VectorXd& qdot, const HumanState& human,
                const SafetyMode& mode, double lambda_max, double clearance)
{
  if (human.empty())
    return 1.0;

  double lambda = 1.0;
  for (std::size_t j = 0; j < kin.positions.size(); ++j)
  {
    const Eigen::Vector3d v_r = kin.jacobians[j] * qdot;
    for (const auto& kp : human.keypoints)
    {
      const Eigen::Vector3d d = kp.position - kin.positions[j];
      const double dist = d.norm();
      if (dist <= 0.0)
      {
        lambda = lambda_max;  // contact: worst case, no direction defined
        continue;
      }
      const double v = (v_r - kp.velocity).dot(d) / dist;
      if (v <= 0.0)
        continue;  // receding pair
      const double vmax = modeVmax(mode, dist - clearance);
      lambda = std::max(lambda, vmax > 0.0 ? std::min(v / vmax, lambda_max) : lambda_max);
    }
  }
  return lambda;
}

double lambdaAt(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                const HumanState& human, const SafetyMode& mode, double lambda_max, double clearance)
{
  if (human.empty())
    return 1.0;
  return lambdaAt(model.poiKinematics(q), qdot, human, mode, lambda_max, clearance);
}

double executionScale(const PoiKinematics& kin, const Eigen::VectorXd& qdot_commanded, const HumanState& human,
                      const SafetyMode& mode, double clearance)
{
  if (human.empty())
    return 1.0;

  double scale = 1.0;
  for (std::size_t j = 0; j < kin.positions.size(); ++j)
  {
    const Eigen::Vector3d v_r = kin.jacobians[j] * qdot_commanded;
    for (const auto& kp : human.keypoints)
    {
      const Eigen::Vector3d d = kp.position - kin.positions[j];
      const double dist = d.norm();
      if (dist <= 0.0)
        return 0.0;  // contact: stop
      const double closing = v_r.dot(d) / dist;
      if (closing <= 0.0)
        continue;
      const double vmax = modeVmax(mode, dist - clearance);
      if (vmax <= 0.0)
        return 0.0;  // inside the protective distance and still approaching
      scale = std::min(scale, vmax / closing);
    }
  }
  return scale;
}

double executionScale(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot_commanded,
                      const HumanState& human, const SafetyMode& mode, double clearance)
{
  if (human.empty())
    return 1.0;
  return executionScale(model.poiKinematics(q), qdot_commanded, human, mode, clearance);
}

}  // namespace marsha
