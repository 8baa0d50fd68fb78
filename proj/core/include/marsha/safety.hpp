#pragma once

#include <marsha/kinematics.hpp>
#include <marsha/world.hpp>

#include <variant>

namespace marsha
{

/* Speed-and-separation-monitoring parameters: the robot must be able to come
 * to rest before the human can close the remaining separation. */
struct SSMParams
{
  double C = 0.25;    // perception/intrusion uncertainty [m]
  double T_r = 0.15;  // reaction time [s]
  double v_h = 1.6;   // assumed human approach speed [m/s]
  double a_s = 2.5;   // max Cartesian deceleration toward the human [m/s^2]
};

/* Power-and-force-limiting parameters: contact allowed, impact force capped. */
struct PFLParams
{
  double F_max = 140.0;  // max contact force [N]
  double k = 75000.0;    // contact spring constant [N/m]
  double m_r = 10.0;     // effective robot mass [kg]
  double m_h = 4.0;      // effective human body-region mass [kg]
};

using SafetyMode = std::variant<SSMParams, PFLParams>;

void validate(const SSMParams& p);  // throws std::invalid_argument
void validate(const PFLParams& p);

/* Maximum safe robot speed toward the human at separation S:
 *   v = sqrt(v_h^2 + (a_s T_r)^2 - 2 a_s (C - S)) - a_s T_r - v_h,
 * radicand clamped to 0 before the root and the result clamped to >= 0
 * (inside the protective distance the robot must stop). S = +inf -> +inf. */
double ssmVmax(const SSMParams& p, double S);

// Speed cap keeping transient-contact force below F_max (separation-independent).
double pflVmax(const PFLParams& p);

// Speed limit of the active mode at separation S.
double modeVmax(const SafetyMode& mode, double S);

/* Signed closing speed of one (robot poi, human keypoint) pair:
 * (J q̇ − ḣ)·u with u the robot→human unit vector; positive when the pair
 * distance is decreasing. Throws std::domain_error on coincident points. */
double pairVelocity(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                    int poi_index, const HumanKeypoint& keypoint);

constexpr double kLambdaMaxDefault = 1e3;

/* Time-dilation factor at q: the worst (closing speed / speed limit) ratio
 * over all poi-keypoint pairs, floored at 1 and capped at lambda_max. Pair
 * separation is the point distance minus `clearance`, matching
 * minSeparation. Receding pairs contribute 1. */
double lambdaAt(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot,
                const HumanState& human, const SafetyMode& mode, double lambda_max = kLambdaMaxDefault,
                double clearance = 0.0);

// Same, reusing poi positions/jacobians already computed at q.
double lambdaAt(const PoiKinematics& kin, const Eigen::VectorXd& qdot, const HumanState& human,
                const SafetyMode& mode, double lambda_max = kLambdaMaxDefault, double clearance = 0.0);

/* Runtime speed-override factor in [0, 1]: the largest s such that scaling
 * the commanded joint velocity by s keeps every pair's *robot-side* closing
 * speed (J q̇ s)·u within its speed limit. 0 when some limit is 0 while the
 * nominal command still closes (full stop). The robot-side speed is used —
 * unlike the λ of the cost model — because no amount of robot slow-down can
 * cancel the human's own approach velocity. */
double executionScale(const RobotModel& model, const Eigen::VectorXd& q, const Eigen::VectorXd& qdot_commanded,
                      const HumanState& human, const SafetyMode& mode, double clearance = 0.0);

double executionScale(const PoiKinematics& kin, const Eigen::VectorXd& qdot_commanded, const HumanState& human,
                      const SafetyMode& mode, double clearance = 0.0);

}  // namespace marsha
