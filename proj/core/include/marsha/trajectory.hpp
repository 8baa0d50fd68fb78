#pragma once

#include <marsha/kinematics.hpp>
#include <marsha/path.hpp>

#include <Eigen/Dense>
#include <vector>

namespace marsha
{

/* Time law over a path: per-segment synchronized trapezoidal (or triangular)
 * profiles. All joints of a segment follow one normalized profile s(t) ∈
 * [0,1], so they reach the waypoint together and every waypoint is crossed
 * at rest. Velocities respect speed_fraction × q̇_max, accelerations q̈_max. */
class Trajectory
{
public:
  Trajectory(const RobotModel& model, const Path& path, double speed_fraction = 1.0);

  double duration() const { return duration_; }
  const Path& path() const { return path_; }
  double speedFraction() const { return speed_fraction_; }

  struct State
  {
    Eigen::VectorXd q;
    Eigen::VectorXd qdot;
  };

  // Profile state at time t, clamped to [0, duration]; at rest beyond the end.
  State sample(double t) const;

private:
  struct Segment
  {
    Eigen::VectorXd from;
    Eigen::VectorXd delta;
    double t_start = 0.0;   // segment start on the trajectory clock
    double duration = 0.0;
    double t_acc = 0.0;     // acceleration (= deceleration) phase length
    double v_peak = 0.0;    // peak of the normalized profile [1/s]
    double a = 0.0;         // normalized acceleration [1/s²]
  };

  Path path_;
  double speed_fraction_;
  std::vector<Segment> segments_;
  double duration_ = 0.0;
};

}  // namespace marsha
