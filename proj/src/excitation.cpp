#include "dreamer/excitation.hpp"

namespace dreamer {

namespace {

Vector3d draw_normals(Rng& rng) {
  Vector3d v;
  v.x() = rng.normal();
  v.y() = rng.normal();
  v.z() = rng.normal();
  return v;
}

Vector3d draw_unit(Rng& rng) {
  Vector3d v = draw_normals(rng);
  while (v.norm() == 0.0) v = draw_normals(rng);
  return v.normalized();
}

Vector3d read_vec3(const nlohmann::json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) throw FormatError(std::string(what) + " must be an array of 3 numbers");
  Vector3d v;
  for (int i = 0; i < 3; ++i) {
    if (!j[i].is_number()) throw FormatError(std::string(what) + " must contain numbers");
    v[i] = j[i].get<double>();
  }
  return v;
}

nlohmann::json vec_json(const Vector3d& v) { return {v.x(), v.y(), v.z()}; }

void read_number(const nlohmann::json& j, const char* key, double& dst) {
  if (!j.contains(key)) return;
  if (!j[key].is_number()) throw FormatError(std::string("field '") + key + "' must be a number");
  dst = j[key].get<double>();
}

}  // namespace

std::vector<TrajectoryStep> generate_trajectory(const OUParams<double>& params, const ExcitationConfig<double>& cfg,
                                                const Vector3d& p0) {
  params.validate();
  cfg.validate();
  if (!cfg.contains(p0)) throw InvalidInput("initial position lies outside the workspace box");

  Rng rng(params.seed);
  OUState<double> state{params.mu, 0};
  Vector3d p = p0;
  std::vector<TrajectoryStep> out;
  out.reserve(static_cast<std::size_t>(cfg.horizon));
  for (int k = 0; k < cfg.horizon; ++k) {
    state = step_ou(state, params, draw_normals(rng));
    Vector3d fallback = Vector3d::UnitX();
    if (state.x.norm() == 0.0) fallback = draw_unit(rng);
    const Vector3d shaped = apply_deadzone(enforce_min_norm(state.x, cfg.m_min, fallback), cfg.epsilon);
    p = integrate_position(p, shaped, cfg, params.dt);
    out.push_back({k, state.x, shaped, p});
  }
  return out;
}

TrajectoryConfig trajectory_config_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("trajectory config must be a JSON object");
  TrajectoryConfig cfg;
  if (j.contains("ou")) {
    const auto& o = j["ou"];
    if (!o.is_object()) throw FormatError("'ou' must be an object");
    read_number(o, "theta", cfg.ou.theta);
    read_number(o, "sigma", cfg.ou.sigma);
    read_number(o, "dt", cfg.ou.dt);
    if (o.contains("mu")) cfg.ou.mu = read_vec3(o["mu"], "mu");
    if (o.contains("seed")) {
      if (!o["seed"].is_number_unsigned()) throw FormatError("'seed' must be a non-negative integer");
      cfg.ou.seed = o["seed"].get<std::uint64_t>();
    }
  }
  if (j.contains("excitation")) {
    const auto& e = j["excitation"];
    if (!e.is_object()) throw FormatError("'excitation' must be an object");
    read_number(e, "m_min", cfg.excitation.m_min);
    read_number(e, "epsilon", cfg.excitation.epsilon);
    read_number(e, "v_scale", cfg.excitation.v_scale);
    if (e.contains("workspace_lo")) cfg.excitation.workspace_lo = read_vec3(e["workspace_lo"], "workspace_lo");
    if (e.contains("workspace_hi")) cfg.excitation.workspace_hi = read_vec3(e["workspace_hi"], "workspace_hi");
    if (e.contains("horizon")) {
      if (!e["horizon"].is_number_integer()) throw FormatError("'horizon' must be an integer");
      cfg.excitation.horizon = e["horizon"].get<int>();
    }
  }
  if (j.contains("p0")) cfg.p0 = read_vec3(j["p0"], "p0");
  cfg.ou.validate();
  cfg.excitation.validate();
  return cfg;
}

nlohmann::json trajectory_config_to_json(const TrajectoryConfig& cfg) {
  return {{"ou",
           {{"theta", cfg.ou.theta},
            {"mu", vec_json(cfg.ou.mu)},
            {"sigma", cfg.ou.sigma},
            {"dt", cfg.ou.dt},
            {"seed", cfg.ou.seed}}},
          {"excitation",
           {{"m_min", cfg.excitation.m_min},
            {"epsilon", cfg.excitation.epsilon},
            {"v_scale", cfg.excitation.v_scale},
            {"workspace_lo", vec_json(cfg.excitation.workspace_lo)},
            {"workspace_hi", vec_json(cfg.excitation.workspace_hi)},
            {"horizon", cfg.excitation.horizon}}},
          {"p0", vec_json(cfg.p0)},
          {"rng", "mt19937_64; uniform=(u64>>11)*2^-53; normal=Box-Muller (cos then sin)"}};
}

nlohmann::json trajectory_step_to_json(const TrajectoryStep& step) {
  return {{"k", step.k}, {"x", vec_json(step.command)}, {"p", vec_json(step.position)}, {"ou", vec_json(step.ou)}};
}

}  // namespace dreamer
