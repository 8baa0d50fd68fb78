#pragma once

#include <marsha/kinematics.hpp>
#include <marsha/safety.hpp>
#include <marsha/world.hpp>

#include <variant>
#include <vector>

namespace marsha
{

// Joint-space Euclidean length of a connection.
struct PathLength
{
};

/* ‖Δq ⊘ q̇_max‖₂ — a speed-normalized length; the nominal traversal time a
 * safety-aware cost reduces to when no human is around. */
struct WeightedLength
{
};

/* Nominal time underestimate ‖Δq ⊘ q̇_max‖_∞ stretched by the mean dilation
 * factor λ̄ sampled along the connection.
 * z: λ samples per connection including both endpoints; 0 picks the count
 * automatically (spacing ≤ 0.1 rad joint L2, at least 5). clearance and
 * lambda_max are forwarded to lambdaAt. */
struct HampTime
{
  SafetyMode mode;
  int z = 0;
  double clearance = 0.0;
  double lambda_max = kLambdaMaxDefault;
};

/* Safety-aware expected traversal time ‖Δq ⊘ q̇_max‖₂ · λ̄. The L2 norm makes
 * the cost an upper bound on the HampTime estimate and admissible for the
 * weighted-ellipsoid heuristic. */
struct MarshaTime
{
  SafetyMode mode;
  int z = 0;
  double clearance = 0.0;
  double lambda_max = kLambdaMaxDefault;
};

using CostModel = std::variant<PathLength, WeightedLength, HampTime, MarshaTime>;

void validate(const CostModel& cm);  // throws std::invalid_argument

// ‖(q_b − q_a) ⊘ q̇_max‖₂
double weightedLength(const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b, const Eigen::VectorXd& qdot_max);

/* Joint velocity along the connection direction with the binding joint
 * saturated at its speed limit: q̇ = (min_l |q̇_max,l / u_l|) · u. Safe
 * overestimate of how fast the connection can be traversed. Throws on a
 * zero-length connection. */
Eigen::VectorXd directionalQdot(const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b,
                                const Eigen::VectorXd& qdot_max);

// Number of λ samples used for a connection of the given joint-L2 length.
int lambdaSampleCount(double connection_length, int z);

/* Mean dilation factor over z equally spaced configurations on [q_a, q_b]
 * (endpoints included), each evaluated with the directional joint velocity. */
double averageLambda(const RobotModel& model, const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b,
                     const HumanState& human, const SafetyMode& mode, int z = 0, double clearance = 0.0,
                     double lambda_max = kLambdaMaxDefault);

// Cost of the straight connection q_a → q_b under the given model. Equal endpoints cost 0.
double connectionCost(const RobotModel& model, const Eigen::VectorXd& q_a, const Eigen::VectorXd& q_b,
                      const HumanState& human, const CostModel& cm);

// Sum of connection costs over consecutive waypoints. Throws on < 2 waypoints.
double pathCost(const RobotModel& model, const std::vector<Eigen::VectorXd>& waypoints, const HumanState& human,
                const CostModel& cm);

}  // namespace marsha
