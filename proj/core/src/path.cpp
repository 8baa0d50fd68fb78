#include <marsha/path.hpp>

#include <algorithm>
#include <stdexcept>

namespace marsha
{

namespace
{
constexpr double kDuplicateTol = 1e-12;
}

Path::Path(std::vector<Eigen::VectorXd> waypoints)
{
  for (auto& q : waypoints)
  {
    if (!waypoints_.empty() && (q - waypoints_.back()).norm() <= kDuplicateTol)
      continue;  // merge consecutive duplicates
    if (!waypoints_.empty() && q.size() != waypoints_.back().size())
      throw std::invalid_argument("Path: waypoint dimensions differ");
    waypoints_.push_back(std::move(q));
  }
  if (waypoints_.size() < 2)
    throw std::invalid_argument("Path: need at least 2 distinct waypoints");
  connections_.assign(waypoints_.size() - 1, PathConnection{});
  rebuildCumulative();
}

Path::Path(std::vector<Eigen::VectorXd> waypoints, std::vector<PathConnection> connections)
{
  if (waypoints.size() < 2 || connections.size() + 1 != waypoints.size())
    throw std::invalid_argument("Path: connections must pair consecutive waypoints");
  waypoints_.push_back(std::move(waypoints.front()));
  for (std::size_t i = 0; i + 1 < waypoints.size(); ++i)
  {
    if ((waypoints[i + 1] - waypoints_.back()).norm() <= kDuplicateTol)
      continue;  // degenerate connection: drop it with its trailing waypoint
    waypoints_.push_back(std::move(waypoints[i + 1]));
    connections_.push_back(connections[i]);
  }
  if (waypoints_.size() < 2)
    throw std::invalid_argument("Path: need at least 2 distinct waypoints");
  rebuildCumulative();
}

void Path::rebuildCumulative()
{
  cumulative_.resize(waypoints_.size());
  cumulative_[0] = 0.0;
  for (std::size_t i = 1; i < waypoints_.size(); ++i)
    cumulative_[i] = cumulative_[i - 1] + (waypoints_[i] - waypoints_[i - 1]).norm();
}

double Path::length() const
{
  return cumulative_.back();
}

Eigen::VectorXd Path::pointAt(double s) const
{
  if (s <= 0.0)
    return waypoints_.front();
  if (s >= length())
    return waypoints_.back();
  const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), s);
  const std::size_t i = static_cast<std::size_t>(it - cumulative_.begin());  // s in [cum[i-1], cum[i])
  const double t = (s - cumulative_[i - 1]) / (cumulative_[i] - cumulative_[i - 1]);
  return waypoints_[i - 1] + t * (waypoints_[i] - waypoints_[i - 1]);
}

Path Path::suffixFrom(double s) const
{
  if (s <= 0.0)
    return *this;

  const Eigen::VectorXd at = pointAt(s);
  std::vector<Eigen::VectorXd> wps;
  std::vector<PathConnection> conns;
  wps.push_back(at);
  for (std::size_t i = 0; i + 1 < waypoints_.size(); ++i)
  {
    if (cumulative_[i + 1] <= s + kDuplicateTol)
      continue;  // segment fully behind the cut
    if ((waypoints_[i + 1] - wps.back()).norm() <= kDuplicateTol)
      continue;
    PathConnection c = connections_[i];
    if (cumulative_[i] < s - kDuplicateTol)
      c.invalidate();  // partially cut connection: cache no longer describes it
    wps.push_back(waypoints_[i + 1]);
    conns.push_back(c);
  }
  if (wps.size() < 2)
  {
    // Cut at (or past) the goal: degenerate suffix is just the last segment's end.
    wps = { at, waypoints_.back() };
    if ((wps[0] - wps[1]).norm() <= kDuplicateTol)
      throw std::invalid_argument("Path::suffixFrom: cut at the goal leaves no path");
    conns.assign(1, PathConnection{});
  }
  return Path(std::move(wps), std::move(conns));
}

void Path::invalidateCaches()
{
  for (auto& c : connections_)
    c.invalidate();
}

PathProjection projectOnPath(const Eigen::VectorXd& state, const Path& path, double min_s)
{
  PathProjection best;
  double best_dist = std::numeric_limits<double>::infinity();

  for (std::size_t i = 0; i + 1 < path.waypointCount(); ++i)
  {
    const double s0 = path.arcLength(i);
    const double s1 = path.arcLength(i + 1);
    if (s1 < min_s)
      continue;
    const Eigen::VectorXd& a = path.waypoint(i);
    const Eigen::VectorXd& b = path.waypoint(i + 1);
    const double len = s1 - s0;
    double t = len > 0.0 ? (state - a).dot(b - a) / (len * len) : 0.0;
    t = std::clamp(t, std::clamp((min_s - s0) / std::max(len, 1e-300), 0.0, 1.0), 1.0);
    const Eigen::VectorXd p = a + t * (b - a);
    const double dist = (state - p).norm();
    if (dist < best_dist - 1e-15)
    {
      best_dist = dist;
      best.q = p;
      best.s = s0 + t * len;
      best.segment = i;
    }
  }
  if (!std::isfinite(best_dist))
  {
    // min_s at or past the end: clamp to the goal.
    best.q = path.goal();
    best.s = path.length();
    best.segment = path.connectionCount() - 1;
  }
  return best;
}

}  // namespace marsha
