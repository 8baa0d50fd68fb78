#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

namespace marsha
{

/* Cache attached to the connection waypoint[i] -> waypoint[i+1]. Cost and
 * validity are memoized against a monotonically increasing snapshot id (one
 * per human-state refresh) so stale entries are never reused across
 * snapshots. second_order marks bookkeeping connections created at a path
 * switch; they are excluded from subtree growth. */
struct PathConnection
{
  double cost = 0.0;
  std::uint64_t cost_snapshot = 0;
  bool cost_cached = false;

  bool valid = false;
  std::uint64_t valid_snapshot = 0;
  bool valid_cached = false;

  bool second_order = false;

  void invalidate()
  {
    cost_cached = false;
    valid_cached = false;
  }
};

/* A geometric joint-space path: ordered waypoints plus per-connection cache.
 * Consecutive duplicate waypoints are merged on construction. */
class Path
{
public:
  explicit Path(std::vector<Eigen::VectorXd> waypoints);

  /* Waypoints with pre-filled connection caches (connections.size() must be
   * waypoints.size()-1). Zero-length connections are dropped together with
   * their trailing waypoint. */
  Path(std::vector<Eigen::VectorXd> waypoints, std::vector<PathConnection> connections);

  std::size_t waypointCount() const { return waypoints_.size(); }
  std::size_t connectionCount() const { return connections_.size(); }

  const Eigen::VectorXd& waypoint(std::size_t i) const { return waypoints_[i]; }
  const std::vector<Eigen::VectorXd>& waypoints() const { return waypoints_; }

  const Eigen::VectorXd& start() const { return waypoints_.front(); }
  const Eigen::VectorXd& goal() const { return waypoints_.back(); }

  PathConnection& connection(std::size_t i) { return connections_[i]; }
  const PathConnection& connection(std::size_t i) const { return connections_[i]; }

  // Joint-space L2 length of the polyline.
  double length() const;

  // Cumulative arc length at waypoint i (0 at the first waypoint).
  double arcLength(std::size_t i) const { return cumulative_[i]; }

  // Point at arc-length parameter s (clamped to [0, length]).
  Eigen::VectorXd pointAt(double s) const;

  /* Path from arc length s to the goal: the interpolated point followed by
   * the remaining waypoints. Caches of connections fully behind s carry
   * over; a connection cut by s loses its cache. */
  Path suffixFrom(double s) const;

  void invalidateCaches();

private:
  std::vector<Eigen::VectorXd> waypoints_;
  std::vector<PathConnection> connections_;
  std::vector<double> cumulative_;

  void rebuildCumulative();
};

struct PathProjection
{
  Eigen::VectorXd q;
  double s = 0.0;           // arc-length parameter of the projection
  std::size_t segment = 0;  // index of the segment containing s
};

/* Closest point on the path's polyline (joint-space L2), restricted to arc
 * length >= min_s so repeated projections never move backwards. */
PathProjection projectOnPath(const Eigen::VectorXd& state, const Path& path, double min_s = 0.0);

}  // namespace marsha
