#include <marsha/kinematics.hpp>

#include <stdexcept>

namespace marsha
{

RobotModel::RobotModel(std::vector<Joint> joints,
                       Eigen::VectorXd qdot_max,
                       Eigen::VectorXd qddot_max,
                       Eigen::VectorXd q_min,
                       Eigen::VectorXd q_max,
                       std::vector<PointOfInterest> poi,
                       double collision_radius)
  : joints_(std::move(joints))
  , qdot_max_(std::move(qdot_max))
  , qddot_max_(std::move(qddot_max))
  , q_min_(std::move(q_min))
  , q_max_(std::move(q_max))
  , poi_(std::move(poi))
  , collision_radius_(collision_radius)
{
  const auto n = static_cast<Eigen::Index>(joints_.size());
  if (n < 1)
    throw std::invalid_argument("RobotModel: at least one joint required");
  if (qdot_max_.size() != n || qddot_max_.size() != n || q_min_.size() != n || q_max_.size() != n)
    throw std::invalid_argument("RobotModel: limit vector size mismatch");
  if ((qdot_max_.array() <= 0.0).any() || (qddot_max_.array() <= 0.0).any())
    throw std::invalid_argument("RobotModel: speed and acceleration limits must be positive");
  if ((q_min_.array() >= q_max_.array()).any())
    throw std::invalid_argument("RobotModel: q_min must be below q_max");
  if (poi_.empty())
    throw std::invalid_argument("RobotModel: poi list must not be empty");
  for (const auto& p : poi_)
    if (p.link < 0 || p.link > static_cast<int>(n))
      throw std::invalid_argument("RobotModel: poi references invalid link " + std::to_string(p.link));
  if (collision_radius_ < 0.0)
    throw std::invalid_argument("RobotModel: collision radius must be non-negative");
}

void RobotModel::checkDof(const Eigen::VectorXd& q) const
{
  if (q.size() != static_cast<Eigen::Index>(joints_.size()))
    throw std::invalid_argument("RobotModel: configuration has wrong dimension");
}

bool RobotModel::withinLimits(const Eigen::VectorXd& q) const
{
  checkDof(q);
  return (q.array() >= q_min_.array()).all() && (q.array() <= q_max_.array()).all();
}

std::vector<Eigen::Isometry3d> RobotModel::linkFrames(const Eigen::VectorXd& q) const
{
  checkDof(q);
  std::vector<Eigen::Isometry3d> frames(joints_.size() + 1);
  frames[0] = Eigen::Isometry3d::Identity();
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (std::size_t j = 0; j < joints_.size(); ++j)
  {
    t = t * joints_[j].origin * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(j)], joints_[j].axis);
    frames[j + 1] = t;
  }
  return frames;
}

std::vector<Eigen::Vector3d> RobotModel::poiPositions(const Eigen::VectorXd& q) const
{
  const auto frames = linkFrames(q);
  std::vector<Eigen::Vector3d> out;
  out.reserve(poi_.size());
  for (const auto& p : poi_)
    out.push_back(frames[static_cast<std::size_t>(p.link)] * p.offset);
  return out;
}

Eigen::Matrix3Xd RobotModel::poiJacobian(const Eigen::VectorXd& q, int poi_index) const
{
  if (poi_index < 0 || poi_index >= poiCount())
    throw std::out_of_range("RobotModel: poi index out of range");
  return poiKinematics(q).jacobians[static_cast<std::size_t>(poi_index)];
}

PoiKinematics RobotModel::poiKinematics(const Eigen::VectorXd& q) const
{
  checkDof(q);
  const auto n = joints_.size();

  // Joint axes and origins in the world frame, collected in one traversal.
  std::vector<Eigen::Vector3d> axis_w(n), origin_w(n);
  std::vector<Eigen::Isometry3d> frames(n + 1);
  frames[0] = Eigen::Isometry3d::Identity();
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  for (std::size_t j = 0; j < n; ++j)
  {
    const Eigen::Isometry3d pre = t * joints_[j].origin;
    axis_w[j] = pre.linear() * joints_[j].axis;
    origin_w[j] = pre.translation();
    t = pre * Eigen::AngleAxisd(q[static_cast<Eigen::Index>(j)], joints_[j].axis);
    frames[j + 1] = t;
  }

  PoiKinematics out;
  out.positions.reserve(poi_.size());
  out.jacobians.reserve(poi_.size());
  for (const auto& p : poi_)
  {
    const Eigen::Vector3d pos = frames[static_cast<std::size_t>(p.link)] * p.offset;
    Eigen::Matrix3Xd jac = Eigen::Matrix3Xd::Zero(3, static_cast<Eigen::Index>(n));
    // A poi on link L moves with joints 0..L-1 only.
    for (int j = 0; j < p.link; ++j)
      jac.col(j) = axis_w[static_cast<std::size_t>(j)].cross(pos - origin_w[static_cast<std::size_t>(j)]);
    out.positions.push_back(pos);
    out.jacobians.push_back(std::move(jac));
  }
  return out;
}

namespace models
{

namespace
{
Eigen::Isometry3d translation(double x, double y, double z)
{
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translation() = Eigen::Vector3d(x, y, z);
  return t;
}

Eigen::VectorXd vec(std::initializer_list<double> v)
{
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v)
    out[i++] = x;
  return out;
}
}  // namespace

RobotModel planar2()
{
  std::vector<Joint> joints(2);
  joints[0].axis = Eigen::Vector3d::UnitZ();
  joints[1].origin = translation(1.0, 0.0, 0.0);
  joints[1].axis = Eigen::Vector3d::UnitZ();

  std::vector<PointOfInterest> poi = {
      { "base", 0, Eigen::Vector3d::Zero() },
      { "link1_tip", 1, Eigen::Vector3d(1.0, 0.0, 0.0) },
      { "link2_tip", 2, Eigen::Vector3d(1.0, 0.0, 0.0) },
  };

  return RobotModel(std::move(joints), vec({ 1.0, 1.0 }), vec({ 4.0, 4.0 }),
                    vec({ -M_PI, -M_PI }), vec({ M_PI, M_PI }), std::move(poi), 0.05);
}

RobotModel arm6()
{
  // Anthropomorphic chain, stretched along +x at the zero configuration.
  std::vector<Joint> joints(6);
  joints[0].origin = translation(0.0, 0.0, 0.181);
  joints[0].axis = Eigen::Vector3d::UnitZ();
  joints[1].axis = Eigen::Vector3d::UnitY();
  joints[2].origin = translation(0.613, 0.0, 0.0);
  joints[2].axis = Eigen::Vector3d::UnitY();
  joints[3].origin = translation(0.572, 0.0, 0.0);
  joints[3].axis = Eigen::Vector3d::UnitY();
  joints[4].origin = translation(0.057, 0.0, 0.0);
  joints[4].axis = Eigen::Vector3d::UnitZ();
  joints[5].origin = translation(0.058, 0.0, 0.0);
  joints[5].axis = Eigen::Vector3d::UnitY();

  std::vector<PointOfInterest> poi = {
      { "shoulder", 1, Eigen::Vector3d::Zero() },
      { "upper_arm_mid", 2, Eigen::Vector3d(0.306, 0.0, 0.0) },
      { "elbow", 3, Eigen::Vector3d::Zero() },
      { "forearm_mid", 3, Eigen::Vector3d(0.286, 0.0, 0.0) },
      { "wrist", 4, Eigen::Vector3d::Zero() },
      { "flange", 6, Eigen::Vector3d::Zero() },
      { "tool_tip", 6, Eigen::Vector3d(0.092, 0.0, 0.0) },
  };

  // Speed caps derated for collaborative operation; accelerations modest.
  return RobotModel(std::move(joints),
                    vec({ 0.30, 0.50, 0.60, 1.00, 1.00, 1.20 }),
                    vec({ 2.0, 2.0, 2.5, 4.0, 4.0, 5.0 }),
                    vec({ -2.0, -1.57, -2.79, -2.0, -1.2, -1.2 }),
                    vec({ 2.0, 1.57, 2.79, 2.0, 1.2, 1.2 }),
                    std::move(poi), 0.08);
}

}  // namespace models

}  // namespace marsha
