#pragma once

// Ornstein-Uhlenbeck joystick excitation:
//   OU Euler-Maruyama step -> minimum-norm rescale -> per-axis deadzone
//   -> velocity integration clipped to an axis-aligned workspace box.

#include "dreamer/random.hpp"
#include "dreamer/types.hpp"

#include <json.hpp>

#include <cmath>
#include <vector>

namespace dreamer {

template <typename Scalar>
struct OUParams {
  Scalar theta = 2;
  Vec3<Scalar> mu = Vec3<Scalar>::Zero();
  Scalar sigma = Scalar(1.5);
  Scalar dt = Scalar(0.02);
  std::uint64_t seed = 0;

  void validate() const {
    if (!(theta > 0)) throw InvalidInput("OU theta must be positive");
    if (!(dt > 0)) throw InvalidInput("OU dt must be positive");
    if (!(sigma >= 0)) throw InvalidInput("OU sigma must be non-negative");
    if (!mu.allFinite()) throw InvalidInput("OU mu must be finite");
  }
};

template <typename Scalar>
struct OUState {
  Vec3<Scalar> x = Vec3<Scalar>::Zero();
  std::int64_t step_index = 0;
};

template <typename Scalar>
struct ExcitationConfig {
  Scalar m_min = Scalar(0.3);
  Scalar epsilon = Scalar(0.1);
  Scalar v_scale = Scalar(0.25);
  Vec3<Scalar> workspace_lo = Vec3<Scalar>::Constant(Scalar(-0.5));
  Vec3<Scalar> workspace_hi = Vec3<Scalar>::Constant(Scalar(0.5));
  int horizon = 300;

  void validate() const {
    if (!(m_min > 0)) throw InvalidInput("m_min must be positive");
    if (!(epsilon >= 0)) throw InvalidInput("deadzone epsilon must be non-negative");
    if (!std::isfinite(v_scale)) throw InvalidInput("v_scale must be finite");
    if (!(workspace_lo.array() <= workspace_hi.array()).all())
      throw InvalidInput("workspace box needs lo <= hi componentwise");
    if (horizon < 1) throw InvalidInput("horizon must be at least 1");
  }

  bool contains(const Vec3<Scalar>& p) const {
    return (p.array() >= workspace_lo.array()).all() && (p.array() <= workspace_hi.array()).all();
  }
};

/// Episode horizons accepted by the data pipeline.
inline constexpr int kMinEpisodeHorizon = 300;
inline constexpr int kMaxEpisodeHorizon = 600;

/// x' = x + theta (mu - x) dt + sigma sqrt(dt) noise. The noise is supplied by the caller.
template <typename Scalar>
OUState<Scalar> step_ou(const OUState<Scalar>& state, const OUParams<Scalar>& params, const Vec3<Scalar>& noise) {
  using std::sqrt;
  OUState<Scalar> next;
  next.x = state.x + params.theta * (params.mu - state.x) * params.dt + params.sigma * sqrt(params.dt) * noise;
  next.step_index = state.step_index + 1;
  return next;
}

template <typename Scalar>
Vec3<Scalar> enforce_min_norm(const Vec3<Scalar>& x, Scalar m_min, const Vec3<Scalar>& fallback_dir) {
  const Scalar m = x.norm();
  if (m == 0) return fallback_dir * m_min;
  if (m < m_min) return (m_min / m) * x;
  return x;
}

/// Zeroes components with |x_i| < epsilon; |x_i| == epsilon is kept.
template <typename Scalar>
Vec3<Scalar> apply_deadzone(const Vec3<Scalar>& x, Scalar epsilon) {
  return (x.array().abs() < epsilon).select(Vec3<Scalar>::Zero(), x);
}

template <typename Scalar>
Vec3<Scalar> integrate_position(const Vec3<Scalar>& p, const Vec3<Scalar>& x, const ExcitationConfig<Scalar>& cfg,
                                Scalar dt) {
  const Vec3<Scalar> moved = p + cfg.v_scale * x * dt;
  return moved.cwiseMax(cfg.workspace_lo).cwiseMin(cfg.workspace_hi);
}

struct TrajectoryStep {
  std::int64_t k = 0;
  Vector3d ou;        // raw OU state after step k
  Vector3d command;   // post-processed joystick command x_k
  Vector3d position;  // end-effector target after applying x_k
};

/// Runs `cfg.horizon` steps of the full pipeline starting from the OU state mu
/// and end-effector position p0. All randomness comes from one Rng seeded with
/// params.seed: three normals per step for the OU noise, then three more only
/// when a zero-norm state needs a random fallback direction. Post-processing
/// acts on a copy, the OU recursion itself is left untouched.
std::vector<TrajectoryStep> generate_trajectory(const OUParams<double>& params, const ExcitationConfig<double>& cfg,
                                                const Vector3d& p0);

/// Config file: {"ou": {...}, "excitation": {...}, "p0": [...]}; all keys optional.
struct TrajectoryConfig {
  OUParams<double> ou;
  ExcitationConfig<double> excitation;
  Vector3d p0 = Vector3d::Zero();
};

TrajectoryConfig trajectory_config_from_json(const nlohmann::json& j);
nlohmann::json trajectory_config_to_json(const TrajectoryConfig& cfg);
nlohmann::json trajectory_step_to_json(const TrajectoryStep& step);

}  // namespace dreamer
