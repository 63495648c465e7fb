#include "dreamer/excitation.hpp"

#include "../support/generators.hpp"

#include <doctest.h>

#include <cmath>

using namespace dreamer;
using Eigen::Vector3d;

namespace {

struct Moments {
  Vector3d variance;
  Vector3d lag1;
};

// Per-axis sample variance and lag-1 autocorrelation of a sequence of 3-vectors.
Moments moments(const std::vector<Vector3d>& xs) {
  const double n = static_cast<double>(xs.size());
  Vector3d mean = Vector3d::Zero();
  for (const auto& x : xs) mean += x;
  mean /= n;
  Vector3d var = Vector3d::Zero(), cov = Vector3d::Zero();
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const Vector3d d = xs[i] - mean;
    var += d.cwiseProduct(d);
    if (i + 1 < xs.size()) cov += d.cwiseProduct(xs[i + 1] - mean);
  }
  return {var / n, cov.cwiseQuotient(var)};
}

}  // namespace

TEST_CASE("step_ou examples") {
  OUParams<double> p;
  p.sigma = 0;
  OUState<double> s{p.mu, 0};
  Rng rng(1);
  const auto fixed = step_ou(s, p, testgen::gaussian3(rng));
  CHECK(fixed.x == p.mu);
  CHECK(fixed.step_index == 1);

  p.theta = 1;
  p.dt = 0.1;
  const auto next = step_ou<double>({Vector3d(1, 0, 0), 5}, p, Vector3d(3, -2, 1));
  CHECK(next.x.x() == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(next.x.y() == 0);
  CHECK(next.x.z() == 0);
  CHECK(next.step_index == 6);

  OUParams<double> q;  // sigma = 1.5, dt = 0.02
  const auto noisy = step_ou<double>({Vector3d::Zero(), 0}, q, Vector3d(1, 0, -1));
  CHECK(noisy.x.x() == doctest::Approx(1.5 * std::sqrt(0.02)));
  CHECK(noisy.x.z() == doctest::Approx(-1.5 * std::sqrt(0.02)));
}

TEST_CASE("sigma = 0 converges monotonically toward mu") {
  OUParams<double> p;
  p.sigma = 0;
  p.mu = Vector3d(0.3, -0.2, 0.1);
  OUState<double> s{Vector3d(2, -3, -1), 0};
  for (int k = 0; k < 500; ++k) {
    const auto n = step_ou<double>(s, p, Vector3d::Zero());
    CHECK(((n.x - p.mu).cwiseAbs().array() <= (s.x - p.mu).cwiseAbs().array()).all());
    s = n;
  }
  CHECK((s.x - p.mu).norm() < 1e-6);
}

TEST_CASE("enforce_min_norm examples") {
  const Vector3d fb(0, 1, 0);
  CHECK(enforce_min_norm<double>({1, 0, 0}, 0.5, fb) == Vector3d(1, 0, 0));
  CHECK(enforce_min_norm<double>({0.1, 0, 0}, 0.5, fb).isApprox(Vector3d(0.5, 0, 0), 1e-15));
  CHECK(enforce_min_norm<double>({0, 0, 0}, 0.5, fb) == Vector3d(0, 0.5, 0));
}

TEST_CASE("property: min-norm output is at least m_min and keeps direction") {
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Vector3d x = testgen::gaussian3(rng, testgen::uniform(rng, 0.0, 1.0));
    const double m_min = testgen::uniform(rng, 0.01, 1.0);
    const Vector3d y = enforce_min_norm<double>(x, m_min, Vector3d::UnitZ());
    CHECK(y.norm() >= m_min * (1 - 1e-12));
    if (x.norm() > 0) CHECK(y.normalized().isApprox(x.normalized(), 1e-12));
  }
}

TEST_CASE("apply_deadzone examples") {
  CHECK(apply_deadzone<double>({0.01, -0.5, 0.2}, 0.1) == Vector3d(0, -0.5, 0.2));
  CHECK(apply_deadzone<double>({0.01, -0.5, 0.2}, 0.0) == Vector3d(0.01, -0.5, 0.2));
  CHECK(apply_deadzone<double>({0.1, -0.1, 0.0999}, 0.1) == Vector3d(0.1, -0.1, 0));
}

TEST_CASE("integrate_position examples") {
  ExcitationConfig<double> cfg;
  const Vector3d p(0.1, -0.2, 0.3);
  CHECK(integrate_position<double>(p, Vector3d::Zero(), cfg, 0.02) == p);
  const Vector3d x(1, -2, 0.5);
  CHECK(integrate_position<double>(p, x, cfg, 0.02) == p + cfg.v_scale * x * 0.02);
  const Vector3d out = integrate_position<double>({0.499, 0, 0}, {10, 1, 0}, cfg, 0.02);
  CHECK(out.x() == 0.5);
  CHECK(out.y() == cfg.v_scale * 1 * 0.02);
}

TEST_CASE("generate_trajectory determinism, workspace and errors") {
  OUParams<double> p;
  p.seed = 99;
  ExcitationConfig<double> cfg;
  cfg.horizon = 600;
  const auto a = generate_trajectory(p, cfg, Vector3d::Zero());
  const auto b = generate_trajectory(p, cfg, Vector3d::Zero());
  REQUIRE(a.size() == 600);
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a[i].ou == b[i].ou);
    CHECK(a[i].command == b[i].command);
    CHECK(a[i].position == b[i].position);
    CHECK(a[i].k == static_cast<std::int64_t>(i));
  }
  p.seed = 100;
  const auto c = generate_trajectory(p, cfg, Vector3d::Zero());
  CHECK(c[0].ou != a[0].ou);

  CHECK_THROWS_AS(generate_trajectory(p, cfg, Vector3d(1, 0, 0)), InvalidInput);
  OUParams<double> bad = p;
  bad.theta = 0;
  CHECK_THROWS_AS(generate_trajectory(bad, cfg, Vector3d::Zero()), InvalidInput);
  bad = p;
  bad.sigma = -1;
  CHECK_THROWS_AS(generate_trajectory(bad, cfg, Vector3d::Zero()), InvalidInput);
}

TEST_CASE("property: positions stay inside the workspace for any seed") {
  Rng rng(5);
  for (int trial = 0; trial < 40; ++trial) {
    OUParams<double> p;
    p.seed = rng.next();
    p.sigma = testgen::uniform(rng, 0.5, 5.0);
    ExcitationConfig<double> cfg;
    cfg.v_scale = testgen::uniform(rng, 0.1, 5.0);
    cfg.workspace_lo = Vector3d(-0.2, -0.3, 0.0);
    cfg.workspace_hi = Vector3d(0.2, 0.1, 0.4);
    cfg.horizon = 400;
    const auto traj = generate_trajectory(p, cfg, Vector3d(0, 0, 0.2));
    for (const auto& s : traj) {
      REQUIRE(cfg.contains(s.position));
      // min-norm then deadzone: every surviving component has |x_i| >= epsilon.
      for (int i = 0; i < 3; ++i) CHECK((s.command[i] == 0.0 || std::abs(s.command[i]) >= cfg.epsilon));
    }
  }
}

TEST_CASE("Monte Carlo: OU stationary variance and lag-1 autocorrelation") {
  OUParams<double> p;  // theta 2, sigma 1.5, dt 0.02
  p.seed = 7;
  ExcitationConfig<double> cfg;
  cfg.horizon = 100000;
  const auto traj = generate_trajectory(p, cfg, Vector3d::Zero());
  std::vector<Vector3d> xs;
  xs.reserve(traj.size());
  for (const auto& s : traj) xs.push_back(s.ou);
  const Moments m = moments(xs);
  const double var_law = p.sigma * p.sigma / (2 * p.theta);
  const double rho_law = std::exp(-p.theta * p.dt);
  for (int i = 0; i < 3; ++i) {
    CHECK(std::abs(m.variance[i] / var_law - 1) < 0.05);
    CHECK(std::abs(m.lag1[i] - rho_law) < 0.05);
  }
}

TEST_CASE("trajectory config JSON") {
  const auto cfg = trajectory_config_from_json(nlohmann::json::parse(
      R"({"ou":{"theta":3,"sigma":0.5,"seed":4},"excitation":{"horizon":350,"epsilon":0.05},"p0":[0.1,0,0]})"));
  CHECK(cfg.ou.theta == 3);
  CHECK(cfg.ou.seed == 4);
  CHECK(cfg.excitation.horizon == 350);
  CHECK(cfg.p0 == Vector3d(0.1, 0, 0));
  const auto back = trajectory_config_from_json(trajectory_config_to_json(cfg));
  CHECK(back.ou.sigma == cfg.ou.sigma);
  CHECK(back.excitation.epsilon == cfg.excitation.epsilon);
  CHECK_THROWS_AS(trajectory_config_from_json(nlohmann::json::parse(R"({"ou":{"theta":"x"}})")), FormatError);
  CHECK_THROWS_AS(trajectory_config_from_json(nlohmann::json::parse(R"({"p0":[1,2]})")), FormatError);
  CHECK(trajectory_config_to_json(cfg).contains("rng"));
}
