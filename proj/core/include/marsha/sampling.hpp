#pragma once

#include <marsha/rng.hpp>

#include <Eigen/Dense>
#include <limits>

namespace marsha
{

// q̂ = q ⊘ q̇_max: coordinates in which weighted length is plain Euclidean length.
Eigen::VectorXd toScaled(const Eigen::VectorXd& q, const Eigen::VectorXd& qdot_max);
Eigen::VectorXd fromScaled(const Eigen::VectorXd& qhat, const Eigen::VectorXd& qdot_max);

/* The set of configurations that could still improve an incumbent solution
 * of cost c_best: a prolate hyperspheroid in scaled coordinates with foci at
 * the scaled start/goal and transverse diameter c_best. c_best = +inf means
 * the whole joint-limit box. */
class InformedSet
{
public:
  InformedSet(Eigen::VectorXd q_start, Eigen::VectorXd q_goal, Eigen::VectorXd qdot_max,
              Eigen::VectorXd q_min, Eigen::VectorXd q_max,
              double c_best = std::numeric_limits<double>::infinity());

  /* Admissible lower bound on the cost of any start-goal path through q:
   * ‖(q−q_start)⊘q̇_max‖₂ + ‖(q_goal−q)⊘q̇_max‖₂. */
  double heuristic(const Eigen::VectorXd& q) const;

  // Least possible heuristic value, attained on the straight segment.
  double cMin() const { return c_min_; }
  double cBest() const { return c_best_; }

  // Shrink (or reset) the set when a better incumbent is found.
  void setCBest(double c_best);

  bool contains(const Eigen::VectorXd& q) const;

  /* Draw a configuration with heuristic(q) < c_best, uniform over the scaled
   * spheroid intersected with the joint-limit box (rejection on the box).
   * Throws std::domain_error when the set is empty (c_best < cMin) and
   * std::runtime_error when rejection exhausts its retry budget. */
  Eigen::VectorXd sample(RngStream& rng) const;

  const Eigen::VectorXd& qStart() const { return q_start_; }
  const Eigen::VectorXd& qGoal() const { return q_goal_; }
  const Eigen::VectorXd& qdotMax() const { return qdot_max_; }

private:
  Eigen::VectorXd q_start_;
  Eigen::VectorXd q_goal_;
  Eigen::VectorXd qdot_max_;
  Eigen::VectorXd q_min_;
  Eigen::VectorXd q_max_;
  double c_best_;

  Eigen::VectorXd s_hat_;    // scaled foci
  Eigen::VectorXd g_hat_;
  double c_min_;
  Eigen::MatrixXd rotation_;  // maps e1 to the transverse axis (foci-dependent only)

  bool withinLimits(const Eigen::VectorXd& q) const;
};

}  // namespace marsha
