#pragma once

#include <array>
#include <utility>

#include "sfc/dynamics.hpp"
#include "sfc/random.hpp"

namespace sfc::seeker {

/// Ordering used everywhere a 5-vector of scale factors or observations appears:
/// [theta_u, theta_v, omega_x, omega_y, omega_z].
using Vec5 = std::array<double, 5>;

struct ScaleFactorConfig {
  int case_id = 3;
  bool angle_dependent = true;
  double amp_theta_min = 0.0;
  double amp_theta_max = 5e-3;
  double amp_omega_max = 5e-3;  // eps_omega ~ U(-max, max) per component
  bool fixed_omega = false;     // every eps_omega component equals amp_omega_max
  double k_min = 0.5;
  double k_max = 3.0;
  double phase_min = -3.14159265358979323846;
  double phase_max = 3.14159265358979323846;

  /// Rows of the evaluation case table, ids 0 through 6.
  static ScaleFactorConfig for_case(int case_id);
  bool valid() const;
};

struct ScaleFactorDraw {
  bool angle_dependent = false;
  // Constant mode.
  double eps_theta_u = 0.0;
  double eps_theta_v = 0.0;
  // Angle-dependent mode.
  double amp_u = 0.0, amp_v = 0.0;
  double k_u = 1.0, k_v = 1.0;
  double phase_u = 0.0, phase_v = 0.0;
  Vec3 eps_omega;
};

ScaleFactorDraw sample_scale_factors(const ScaleFactorConfig& cfg, Rng& rng);

/// Sinusoidal seeker-angle dependent error, eps = A cos(2 pi theta / k + phi).
std::pair<double, double> angle_epsilon(const ScaleFactorDraw& draw, double theta_u, double theta_v);

/// Full ground-truth error vector at the given true body angles.
Vec5 true_epsilon(const ScaleFactorDraw& draw, double theta_u, double theta_v);

/// Body-frame azimuth/elevation of the line of sight. Throws std::domain_error on zero range.
std::pair<double, double> los_body_angles(const Vec3& r_missile, const Vec3& r_target, const Quat& q);

struct Observation {
  double theta_u = 0.0;
  double theta_v = 0.0;
  Vec3 omega;

  Vec5 as_array() const { return {theta_u, theta_v, omega.x, omega.y, omega.z}; }
};

struct SeekerConfig {
  double sigma_theta = 1e-3;  // rad
  double sigma_omega = 1e-3;  // rad/s
  double tau_theta = 0.020;   // s; <= 0 disables the angle filter
  double fov_half_angle = 0.5235987755982988;  // 30 deg
};

/// First-order lag on the two measured angles, discretized exactly for a held input.
class AngleFilter {
 public:
  std::pair<double, double> update(double theta_u, double theta_v, double dt, double tau);
  void reset() { initialized_ = false; }

 private:
  bool initialized_ = false;
  double u_ = 0.0;
  double v_ = 0.0;
};

struct Measurement {
  Observation obs;          // what the flight computer sees (filtered angles)
  Observation raw;          // distorted + noisy, before the angle filter
  double true_theta_u = 0.0;
  double true_theta_v = 0.0;
  Vec5 eps;                 // ground-truth scale factors at this instant
  bool fov_exceeded = false;
};

Measurement observe(const dynamics::MissileState& missile, const dynamics::TargetState& target,
                    const ScaleFactorDraw& draw, const SeekerConfig& cfg, AngleFilter& filter, Rng& rng, double dt);

}  // namespace sfc::seeker
