#include <marsha/sampling.hpp>

#include <cmath>
#include <stdexcept>

namespace marsha
{

Eigen::VectorXd toScaled(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot_max)
{
  return q.cwiseQuotient(qdot_max);
}

Eigen::VectorXd fromScaled(const Eigen::VectorXd& qhat, const Eigen::VectorXd& qdot_max)
{
  return qhat.cwiseProduct(qdot_max);
}

namespace
{
/* Rotation taking e1 to the unit transverse axis a1 (the standard
 * rotation-to-world-frame construction: SVD of a1 e1ᵀ with the last singular
 * vector sign-fixed so the result is a proper rotation). */
Eigen::MatrixXd rotationToTransverse(const Eigen::VectorXd& a1)
{
  const Eigen::Index n = a1.size();
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  m.col(0) = a1;
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::VectorXd diag = Eigen::VectorXd::Ones(n);
  diag[n - 1] = svd.matrixU().determinant() * svd.matrixV().determinant();
  return svd.matrixU() * diag.asDiagonal() * svd.matrixV().transpose();
}
}  // namespace

InformedSet::InformedSet(Eigen::VectorXd q_start, Eigen::VectorXd q_goal, Eigen::VectorXd qdot_max,
                         Eigen::VectorXd q_min, Eigen::VectorXd q_max, double c_best)
  : q_start_(std::move(q_start))
  , q_goal_(std::move(q_goal))
  , qdot_max_(std::move(qdot_max))
  , q_min_(std::move(q_min))
  , q_max_(std::move(q_max))
  , c_best_(c_best)
{
  const Eigen::Index n = q_start_.size();
  if (q_goal_.size() != n || qdot_max_.size() != n || q_min_.size() != n || q_max_.size() != n)
    throw std::invalid_argument("InformedSet: dimension mismatch");
  if ((qdot_max_.array() <= 0.0).any())
    throw std::invalid_argument("InformedSet: qdot_max must be > 0");

  s_hat_ = toScaled(q_start_, qdot_max_);
  g_hat_ = toScaled(q_goal_, qdot_max_);
  c_min_ = (g_hat_ - s_hat_).norm();
  rotation_ = c_min_ > 0.0 ? rotationToTransverse((g_hat_ - s_hat_) / c_min_)
                           : Eigen::MatrixXd::Identity(n, n);
}

double InformedSet::heuristic(const Eigen::VectorXd& q) const
{
  if (q.size() != q_start_.size())
    throw std::invalid_argument("InformedSet::heuristic: dimension mismatch");
  return (q - q_start_).cwiseQuotient(qdot_max_).norm() + (q_goal_ - q).cwiseQuotient(qdot_max_).norm();
}

void InformedSet::setCBest(double c_best)
{
  c_best_ = c_best;
}

bool InformedSet::withinLimits(const Eigen::VectorXd& q) const
{
  return (q.array() >= q_min_.array()).all() && (q.array() <= q_max_.array()).all();
}

bool InformedSet::contains(const Eigen::VectorXd& q) const
{
  return withinLimits(q) && heuristic(q) < c_best_;
}

Eigen::VectorXd InformedSet::sample(RngStream& rng) const
{
  const Eigen::Index n = q_start_.size();

  if (std::isinf(c_best_))
  {
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i)
      q[i] = rng.uniform(q_min_[i], q_max_[i]);
    return q;
  }

  if (c_best_ < c_min_)
    throw std::domain_error("InformedSet::sample: empty set (c_best below the theoretical minimum)");

  const Eigen::VectorXd centre = 0.5 * (s_hat_ + g_hat_);
  const double r1 = 0.5 * c_best_;
  const double conj2 = c_best_ * c_best_ - c_min_ * c_min_;
  const double ri = conj2 > 0.0 ? 0.5 * std::sqrt(conj2) : 0.0;

  // Stage 1: draw in the spheroid, reject on the joint-limit box. Efficient
  // whenever the spheroid is mostly inside the box.
  constexpr int kSpheroidTries = 128;
  for (int attempt = 0; attempt < kSpheroidTries; ++attempt)
  {
    Eigen::VectorXd qhat;
    if (ri <= 0.0)
    {
      // Zero-volume spheroid: the scaled straight segment itself.
      qhat = s_hat_ + rng.uniform01() * (g_hat_ - s_hat_);
    }
    else
    {
      // Uniform point in the unit n-ball: random direction, radius u^{1/n}.
      Eigen::VectorXd x(n);
      do
      {
        for (Eigen::Index i = 0; i < n; ++i)
          x[i] = rng.normal();
      } while (x.norm() <= 0.0);
      x *= std::pow(rng.uniform01(), 1.0 / static_cast<double>(n)) / x.norm();

      Eigen::VectorXd radii = Eigen::VectorXd::Constant(n, ri);
      radii[0] = r1;
      qhat = centre + rotation_ * radii.asDiagonal() * x;
    }

    const Eigen::VectorXd q = fromScaled(qhat, qdot_max_);
    // Rejection keeps the membership guarantee exact under joint limits and
    // floating-point boundary rounding.
    if (withinLimits(q) && heuristic(q) < c_best_)
      return q;
  }

  // Stage 2: draw in the box, reject on the spheroid. Uniform on the same
  // intersection, but efficient when the spheroid dwarfs the box.
  constexpr int kBoxTries = 10000;
  for (int attempt = 0; attempt < kBoxTries; ++attempt)
  {
    Eigen::VectorXd q(n);
    for (Eigen::Index i = 0; i < n; ++i)
      q[i] = rng.uniform(q_min_[i], q_max_[i]);
    if (heuristic(q) < c_best_)
      return q;
  }
  throw std::runtime_error("InformedSet::sample: rejection sampling exhausted its retry budget");
}

}  // namespace marsha
