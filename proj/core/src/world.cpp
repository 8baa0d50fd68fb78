#include <marsha/world.hpp>

#include <marsha/rng.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace marsha
{

HumanScript::HumanScript(std::vector<Track> tracks, double noise_amplitude, std::uint64_t seed)
  : tracks_(std::move(tracks)), noise_amplitude_(noise_amplitude), seed_(seed)
{
  if (noise_amplitude_ < 0.0)
    throw std::invalid_argument("HumanScript: noise amplitude must be >= 0");
  for (const auto& tr : tracks_)
  {
    if (tr.times.empty() || tr.times.size() != tr.positions.size())
      throw std::invalid_argument("HumanScript: track '" + tr.name + "' needs matching, non-empty times/positions");
    for (std::size_t i = 1; i < tr.times.size(); ++i)
      if (!(tr.times[i] > tr.times[i - 1]))
        throw std::invalid_argument("HumanScript: track '" + tr.name + "' times must be strictly increasing");
  }
}

namespace
{
// Deterministic per-axis uniform noise in [-a, a], a pure function of
// (seed, track, t). Sampling the same instant twice yields the same state.
Eigen::Vector3d trackNoise(std::uint64_t seed, std::size_t track, double t, double amplitude)
{
  if (amplitude <= 0.0)
    return Eigen::Vector3d::Zero();
  std::uint64_t h = hashCombine(seed, hashCombine(static_cast<std::uint64_t>(track) + 1,
                                                  std::bit_cast<std::uint64_t>(t)));
  Eigen::Vector3d n;
  for (int axis = 0; axis < 3; ++axis)
  {
    h = splitmix64(h);
    const double u = static_cast<double>(h >> 11) * 0x1.0p-53;  // [0,1)
    n[axis] = amplitude * (2.0 * u - 1.0);
  }
  return n;
}
}  // namespace

HumanState HumanScript::sample(double t) const
{
  HumanState state;
  state.t = t;
  state.keypoints.reserve(tracks_.size());
  for (std::size_t k = 0; k < tracks_.size(); ++k)
  {
    const Track& tr = tracks_[k];
    HumanKeypoint kp;
    if (t <= tr.times.front())
    {
      kp.position = tr.positions.front();
    }
    else if (t >= tr.times.back())
    {
      kp.position = tr.positions.back();
    }
    else
    {
      const auto it = std::upper_bound(tr.times.begin(), tr.times.end(), t);
      const std::size_t i = static_cast<std::size_t>(it - tr.times.begin());  // t in [times[i-1], times[i])
      const double t0 = tr.times[i - 1];
      const double t1 = tr.times[i];
      const double s = (t - t0) / (t1 - t0);
      kp.position = (1.0 - s) * tr.positions[i - 1] + s * tr.positions[i];
      // Velocity from the un-noised schedule; differentiating noisy samples
      // would swamp the signal.
      kp.velocity = (tr.positions[i] - tr.positions[i - 1]) / (t1 - t0);
    }
    kp.position += trackNoise(seed_, k, t, noise_amplitude_);
    state.keypoints.push_back(kp);
  }
  return state;
}

double segmentPointDistance(const Eigen::Vector3d& a0, const Eigen::Vector3d& a1, const Eigen::Vector3d& p)
{
  const Eigen::Vector3d d = a1 - a0;
  const double len2 = d.squaredNorm();
  if (len2 <= 0.0)
    return (p - a0).norm();
  const double t = std::clamp((p - a0).dot(d) / len2, 0.0, 1.0);
  return (p - (a0 + t * d)).norm();
}

namespace
{
// Closest-approach distance between segments [p1,q1] and [p2,q2].
double segmentSegmentDistance(const Eigen::Vector3d& p1, const Eigen::Vector3d& q1,
                              const Eigen::Vector3d& p2, const Eigen::Vector3d& q2)
{
  const Eigen::Vector3d d1 = q1 - p1;
  const Eigen::Vector3d d2 = q2 - p2;
  const Eigen::Vector3d r = p1 - p2;
  const double a = d1.squaredNorm();
  const double e = d2.squaredNorm();
  const double f = d2.dot(r);

  double s = 0.0;
  double t = 0.0;
  if (a <= 0.0 && e <= 0.0)
    return r.norm();
  if (a <= 0.0)
  {
    t = std::clamp(f / e, 0.0, 1.0);
  }
  else
  {
    const double c = d1.dot(r);
    if (e <= 0.0)
    {
      s = std::clamp(-c / a, 0.0, 1.0);
    }
    else
    {
      const double b = d1.dot(d2);
      const double denom = a * e - b * b;
      if (denom > 0.0)
        s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
      t = (b * s + f) / e;
      if (t < 0.0)
      {
        t = 0.0;
        s = std::clamp(-c / a, 0.0, 1.0);
      }
      else if (t > 1.0)
      {
        t = 1.0;
        s = std::clamp((b - c) / a, 0.0, 1.0);
      }
    }
  }
  return ((p1 + s * d1) - (p2 + t * d2)).norm();
}

double boxOuterDistance(const Box& b, const Eigen::Vector3d& p)
{
  const Eigen::Vector3d e = (b.min - p).cwiseMax(0.0).cwiseMax(p - b.max);
  return e.norm();
}
}  // namespace

double obstacleDistance(const Obstacle& obstacle, const Eigen::Vector3d& point)
{
  return std::visit(
      [&](const auto& prim) -> double {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Sphere>)
        {
          return (point - prim.center).norm() - prim.radius;
        }
        else if constexpr (std::is_same_v<T, Box>)
        {
          const double outer = boxOuterDistance(prim, point);
          if (outer > 0.0)
            return outer;
          const Eigen::Vector3d inner = (point - prim.min).cwiseMin(prim.max - point);
          return -inner.minCoeff();
        }
        else
        {
          return segmentPointDistance(prim.a, prim.b, point) - prim.radius;
        }
      },
      obstacle);
}

namespace
{
/* Distance from segment [a,b] to the obstacle *solid* (0 on contact or
 * penetration). Sphere and capsule are closed-form; the box case minimizes
 * the convex point-to-box distance along the segment by golden section. */
double segmentObstacleClearance(const Obstacle& obstacle, const Eigen::Vector3d& a, const Eigen::Vector3d& b)
{
  return std::visit(
      [&](const auto& prim) -> double {
        using T = std::decay_t<decltype(prim)>;
        if constexpr (std::is_same_v<T, Sphere>)
        {
          return std::max(segmentPointDistance(a, b, prim.center) - prim.radius, 0.0);
        }
        else if constexpr (std::is_same_v<T, Capsule>)
        {
          return std::max(segmentSegmentDistance(a, b, prim.a, prim.b) - prim.radius, 0.0);
        }
        else
        {
          const auto g = [&](double t) { return boxOuterDistance(prim, a + t * (b - a)); };
          constexpr double kPhi = 0.6180339887498949;
          double lo = 0.0, hi = 1.0;
          double t1 = hi - kPhi * (hi - lo);
          double t2 = lo + kPhi * (hi - lo);
          double g1 = g(t1);
          double g2 = g(t2);
          for (int it = 0; it < 48 && g1 > 0.0 && g2 > 0.0; ++it)
          {
            if (g1 < g2)
            {
              hi = t2;
              t2 = t1;
              g2 = g1;
              t1 = hi - kPhi * (hi - lo);
              g1 = g(t1);
            }
            else
            {
              lo = t1;
              t1 = t2;
              g1 = g2;
              t2 = lo + kPhi * (hi - lo);
              g2 = g(t2);
            }
          }
          return std::min({ g(lo), g1, g2, g(hi) });
        }
      },
      obstacle);
}
}  // namespace

double minSeparation(const std::vector<Eigen::Vector3d>& poi_positions, const HumanState& human, const Scene& scene)
{
  if (human.empty())
    return kInfinity;
  double best = kInfinity;
  for (const auto& kp : human.keypoints)
    for (const auto& r : poi_positions)
      best = std::min(best, (kp.position - r).norm());
  return best - scene.human_clearance;
}

double minSeparation(const RobotModel& model, const Eigen::VectorXd& q, const HumanState& human, const Scene& scene)
{
  if (human.empty())
    return kInfinity;
  return minSeparation(model.poiPositions(q), human, scene);
}

bool checkConfig(const RobotModel& model, const Eigen::VectorXd& q, const HumanState& human, const Scene& scene)
{
  if (!model.withinLimits(q))
    return false;

  const auto poi = model.poiPositions(q);
  const double radius = model.collisionRadius();
  for (const auto& obstacle : scene.static_obstacles)
  {
    if (poi.size() == 1)
    {
      if (segmentObstacleClearance(obstacle, poi[0], poi[0]) <= radius)
        return false;
      continue;
    }
    // Robot body approximated by capsules between consecutive poi.
    for (std::size_t i = 0; i + 1 < poi.size(); ++i)
      if (segmentObstacleClearance(obstacle, poi[i], poi[i + 1]) <= radius)
        return false;
  }

  return minSeparation(poi, human, scene) > 0.0;
}

bool checkConnection(const RobotModel& model, const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b,
                     const HumanState& human, const Scene& scene, double step)
{
  if (step <= 0.0)
    throw std::invalid_argument("checkConnection: step must be > 0");
  if (q_a.size() != q_b.size())
    throw std::invalid_argument("checkConnection: endpoint dimensions differ");

  const double dist = (q_b - q_a).norm();
  if (!checkConfig(model, q_a, human, scene))
    return false;
  if (dist <= 0.0)
    return true;
  if (!checkConfig(model, q_b, human, scene))
    return false;

  /* Number of intervals rounded up to a power of two: halving the step
   * exactly doubles k, so finer checks always revisit coarser samples
   * (monotone refinement). Interior samples run coarse-to-fine so mid-span
   * collisions reject early. */
  std::size_t k = 1;
  while (static_cast<double>(k) * step < dist)
    k *= 2;
  for (std::size_t span = k; span >= 2; span /= 2)
    for (std::size_t i = span / 2; i < k; i += span)
    {
      const double s = static_cast<double>(i) / static_cast<double>(k);
      if (!checkConfig(model, q_a + s * (q_b - q_a), human, scene))
        return false;
    }
  return true;
}

}  // namespace marsha
