#pragma once

#include <marsha/kinematics.hpp>

#include <Eigen/Dense>
#include <cstdint>
#include <limits>
#include <string>
#include <variant>
#include <vector>

namespace marsha
{

struct HumanKeypoint
{
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
};

/* Snapshot of the human at one instant: the keypoint set used by the safety
 * and cost computations. Empty keypoints means no human in the scene. */
struct HumanState
{
  double t = 0.0;
  std::vector<HumanKeypoint> keypoints;

  bool empty() const { return keypoints.empty(); }
};

/* Scripted mannequin: per-keypoint piecewise-linear position schedules plus
 * uniform positional noise. Sampling is deterministic given (seed, t);
 * velocities come from the un-noised schedule. */
class HumanScript
{
public:
  struct Track
  {
    std::string name;
    std::vector<double> times;                 // strictly increasing
    std::vector<Eigen::Vector3d> positions;    // same length as times
  };

  HumanScript() = default;
  HumanScript(std::vector<Track> tracks, double noise_amplitude, std::uint64_t seed);

  HumanState sample(double t) const;

  const std::vector<Track>& tracks() const { return tracks_; }
  double noiseAmplitude() const { return noise_amplitude_; }
  std::uint64_t seed() const { return seed_; }

private:
  std::vector<Track> tracks_;
  double noise_amplitude_ = 0.0;
  std::uint64_t seed_ = 0;
};

struct Sphere
{
  Eigen::Vector3d center;
  double radius;
};

struct Box  // axis-aligned
{
  Eigen::Vector3d min;
  Eigen::Vector3d max;
};

struct Capsule
{
  Eigen::Vector3d a;
  Eigen::Vector3d b;
  double radius;
};

using Obstacle = std::variant<Sphere, Box, Capsule>;

/* Static scene geometry plus the clearance radius that inflates each human
 * keypoint for collision purposes. */
struct Scene
{
  std::vector<Obstacle> static_obstacles;
  double human_clearance = 0.25;
};

// Distance from a point to an obstacle surface (negative inside).
double obstacleDistance(const Obstacle& obstacle, const Eigen::Vector3d& point);

// Distance between segment [a0,a1] and point p.
double segmentPointDistance(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1, const Eigen::Vector3d& p);

/* Minimum human-robot separation: the smallest (poi, keypoint) point-pair
 * distance minus the keypoint clearance. +inf when no human is present. */
double minSeparation(const RobotModel& model,
                     const Eigen::VectorXd& q,
                     const HumanState& human,
                     const Scene& scene);

// Same, given precomputed poi positions.
double minSeparation(const std::vector<Eigen::Vector3d>& poi_positions,
                     const HumanState& human,
                     const Scene& scene);

/* Configuration feasibility: joint limits, robot capsules clear of static
 * obstacles, and strictly positive human separation. */
bool checkConfig(const RobotModel& model, const Eigen::VectorXd& q, const HumanState& human, const Scene& scene);

/* Connection feasibility: checkConfig at samples spaced at most `step` rad
 * (joint-space L2) along the straight segment, endpoints included. The
 * sample count is rounded up to a power of two so that halving the step
 * always refines the previous sample set. */
bool checkConnection(const RobotModel& model,
                     const Eigen::VectorXd& q_a,
                     const Eigen::VectorXd& q_b,
                     const HumanState& human,
                     const Scene& scene,
                     double step = 0.05);

constexpr double kInfinity = std::numeric_limits<double>::infinity();

}  // namespace marsha
