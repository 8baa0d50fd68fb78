#pragma once

#include <Eigen/Dense>
#include <Eigen/Geometry>
#include <string>
#include <vector>

namespace marsha
{

/* Revolute joint: a fixed transform from the parent link frame to the joint
 * frame, followed by a rotation of the joint angle about `axis`. */
struct Joint
{
  Eigen::Isometry3d origin = Eigen::Isometry3d::Identity();
  Eigen::Vector3d axis = Eigen::Vector3d::UnitZ();
};

/* Point rigidly attached to a link. Link 0 is the base; link i (1..n) is the
 * frame after joint i-1. */
struct PointOfInterest
{
  std::string name;
  int link = 0;
  Eigen::Vector3d offset = Eigen::Vector3d::Zero();
};

// Positions and linear-velocity Jacobians of every point of interest at one
// configuration, computed in a single chain traversal.
struct PoiKinematics
{
  std::vector<Eigen::Vector3d> positions;
  std::vector<Eigen::Matrix3Xd> jacobians;
};

/* Serial manipulator with revolute joints, joint limits and a set of points
 * of interest on its structure. Immutable after construction and safe to
 * share across threads; all queries are pure. */
class RobotModel
{
public:
  RobotModel(std::vector<Joint> joints,
             Eigen::VectorXd qdot_max,
             Eigen::VectorXd qddot_max,
             Eigen::VectorXd q_min,
             Eigen::VectorXd q_max,
             std::vector<PointOfInterest> poi,
             double collision_radius = 0.08);

  int dof() const { return static_cast<int>(joints_.size()); }
  const std::vector<Joint>& joints() const { return joints_; }
  const Eigen::VectorXd& qdotMax() const { return qdot_max_; }
  const Eigen::VectorXd& qddotMax() const { return qddot_max_; }
  const Eigen::VectorXd& qMin() const { return q_min_; }
  const Eigen::VectorXd& qMax() const { return q_max_; }
  const std::vector<PointOfInterest>& pois() const { return poi_; }
  int poiCount() const { return static_cast<int>(poi_.size()); }

  // Radius of the capsules spanned between consecutive points of interest,
  // used as the robot's collision geometry against static obstacles.
  double collisionRadius() const { return collision_radius_; }

  bool withinLimits(const Eigen::VectorXd& q) const;

  // World frame of every link, frames[0] being the base.
  std::vector<Eigen::Isometry3d> linkFrames(const Eigen::VectorXd& q) const;

  // World position of every point of interest.
  std::vector<Eigen::Vector3d> poiPositions(const Eigen::VectorXd& q) const;

  // Linear-velocity Jacobian (3 x n) of one point of interest.
  Eigen::Matrix3Xd poiJacobian(const Eigen::VectorXd& q, int poi_index) const;

  // Positions and Jacobians of all points of interest in one pass.
  PoiKinematics poiKinematics(const Eigen::VectorXd& q) const;

private:
  void checkDof(const Eigen::VectorXd& q) const;

  std::vector<Joint> joints_;
  Eigen::VectorXd qdot_max_;
  Eigen::VectorXd qddot_max_;
  Eigen::VectorXd q_min_;
  Eigen::VectorXd q_max_;
  std::vector<PointOfInterest> poi_;
  double collision_radius_;
};

namespace models
{
// Two-link planar arm (1 m links, z-axis joints), used by tests and oracles.
RobotModel planar2();

// Six-axis arm with UR10e-like link lengths (~1.4 m reach) and derated
// collaborative speed caps; the model used by the bundled scenarios.
RobotModel arm6();
}  // namespace models

}  // namespace marsha
