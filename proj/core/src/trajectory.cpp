#include <marsha/trajectory.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace marsha
{

Trajectory::Trajectory(const RobotModel& model, const Path& path, double speed_fraction)
  : path_(path), speed_fraction_(speed_fraction)
{
  if (!(speed_fraction > 0.0) || speed_fraction > 1.0)
    throw std::invalid_argument("Trajectory: speed_fraction must lie in (0, 1]");
  if (path.start().size() != model.dof())
    throw std::invalid_argument("Trajectory: path dimension does not match robot");

  const Eigen::VectorXd& v_max = model.qdotMax();
  const Eigen::VectorXd& a_max = model.qddotMax();
  for (Eigen::Index l = 0; l < model.dof(); ++l)
  {
    if (!(v_max[l] > 0.0) || !(a_max[l] > 0.0))
      throw std::invalid_argument("Trajectory: joint velocity/acceleration limits must be positive");
  }

  segments_.reserve(path.connectionCount());
  double clock = 0.0;
  for (std::size_t i = 0; i < path.connectionCount(); ++i)
  {
    Segment seg;
    seg.from = path.waypoint(i);
    seg.delta = path.waypoint(i + 1) - seg.from;
    seg.t_start = clock;

    // Tightest normalized velocity/acceleration caps across joints. A joint
    // that does not move in this segment imposes no constraint.
    double v_cap = std::numeric_limits<double>::infinity();
    double a_cap = std::numeric_limits<double>::infinity();
    for (Eigen::Index l = 0; l < seg.delta.size(); ++l)
    {
      const double step = std::abs(seg.delta[l]);
      if (step <= 0.0)
        continue;
      v_cap = std::min(v_cap, speed_fraction * v_max[l] / step);
      a_cap = std::min(a_cap, a_max[l] / step);
    }

    seg.a = a_cap;
    if (v_cap * v_cap / a_cap >= 1.0)
    {
      // Too short to reach cruise speed: triangular profile.
      seg.v_peak = std::sqrt(a_cap);
      seg.t_acc = seg.v_peak / a_cap;
      seg.duration = 2.0 * seg.t_acc;
    }
    else
    {
      seg.v_peak = v_cap;
      seg.t_acc = v_cap / a_cap;
      seg.duration = seg.t_acc + 1.0 / v_cap;
    }

    clock += seg.duration;
    segments_.push_back(std::move(seg));
  }
  duration_ = clock;
}

Trajectory::State Trajectory::sample(double t) const
{
  State out;
  if (t >= duration_)
  {
    out.q = path_.goal();
    out.qdot = Eigen::VectorXd::Zero(path_.goal().size());
    return out;
  }
  if (t < 0.0)
    t = 0.0;

  // Locate the active segment (few segments per path; linear scan is fine).
  std::size_t idx = 0;
  while (idx + 1 < segments_.size() && t >= segments_[idx].t_start + segments_[idx].duration)
    ++idx;
  const Segment& seg = segments_[idx];
  const double tau = std::min(t - seg.t_start, seg.duration);

  double s = 0.0;
  double sdot = 0.0;
  if (tau < seg.t_acc)
  {
    s = 0.5 * seg.a * tau * tau;
    sdot = seg.a * tau;
  }
  else if (tau <= seg.duration - seg.t_acc)
  {
    s = 0.5 * seg.a * seg.t_acc * seg.t_acc + seg.v_peak * (tau - seg.t_acc);
    sdot = seg.v_peak;
  }
  else
  {
    const double rem = seg.duration - tau;
    s = 1.0 - 0.5 * seg.a * rem * rem;
    sdot = seg.a * rem;
  }
  s = std::clamp(s, 0.0, 1.0);

  out.q = seg.from + s * seg.delta;
  out.qdot = sdot * seg.delta;
  return out;
}

}  // namespace marsha
