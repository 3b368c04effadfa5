#include "ltn/simulate.hpp"

#include <algorithm>
#include <cmath>

#include "ltn/rng.hpp"

namespace ltn {

Vec threshold(const Vec& v, double s) {
  return v.cwiseMax(0.0).cwiseMin(s);
}

Vec step(const LtnModel& model, const Vec& x, const Vec& u) {
  if (x.size() != model.n || u.size() != model.m)
    throw DimensionError("step: state or input length mismatch");
  return model.alpha * x + threshold(model.W_D * x + model.B_D * u, model.s_D);
}

std::vector<Vec> simulate_trajectory(const LtnModel& model, const Vec& x0,
                                     const std::vector<Vec>& inputs) {
  std::vector<Vec> traj;
  traj.reserve(inputs.size() + 1);
  traj.push_back(x0);
  for (const Vec& u : inputs) traj.push_back(step(model, traj.back(), u));
  return traj;
}

LtnModel discretize(const LtnModel& ct, double tau, double dt) {
  if (!(tau > 0.0) || !(dt > 0.0))
    throw ConfigError("discretize: tau and dt must be positive");
  if (dt >= tau) throw ConfigError("discretize: need dt < tau");
  const double r = dt / tau;
  LtnModel d = ct;
  d.alpha = 1.0 - r;
  d.W_D = r * ct.W_D;
  d.B_D = r * ct.B_D;
  d.s_D = r * ct.s_D;
  return d;
}

SyntheticData generate_synthetic(const GenerationConfig& cfg) {
  cfg.validate();
  const int n = cfg.n, m = cfg.m;

  auto model_eng = rng::make_stream(cfg.rng_seed, rng::kModelStream);
  LtnModel model;
  model.n = n;
  model.m = m;
  model.alpha = cfg.alpha_star;
  model.s_D = cfg.s_D_star;
  model.dale_signs = cfg.dale_signs;
  model.self_loop_mask = cfg.self_loop_mask;
  model.W_D.resize(n, n);
  model.B_D.resize(n, m);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const bool exc = cfg.dale_signs[j] > 0;
      double w = exc ? rng::uniform_double(model_eng, cfg.w_exc_lo, cfg.w_exc_hi)
                     : rng::uniform_double(model_eng, cfg.w_inh_lo, cfg.w_inh_hi);
      if (i == j && (cfg.self_loop_mask.empty() || !cfg.self_loop_mask[i]))
        w = 0.0;
      model.W_D(i, j) = w;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < m; ++j)
      model.B_D(i, j) = rng::uniform_double(model_eng, cfg.b_lo, cfg.b_hi);
  model.validate();

  SyntheticData out;
  out.samples.reserve(cfg.T_d);
  for (int k = 0; k < cfg.T_d; ++k) {
    auto eng = rng::make_stream(cfg.rng_seed, rng::kSampleBase + k);
    DataSample s;
    s.x.resize(n);
    s.u.resize(m);
    for (int i = 0; i < n; ++i)
      s.x[i] = rng::uniform_double(eng, cfg.x_lo, cfg.x_hi);
    for (int j = 0; j < m; ++j)
      s.u[j] = rng::uniform_double(eng, cfg.u_lo, cfg.u_hi);
    s.x_plus = step(model, s.x, s.u);
    out.samples.push_back(std::move(s));
  }
  out.model = std::move(model);
  return out;
}

std::vector<DataSample> add_noise(const std::vector<DataSample>& clean,
                                  double eps_bar, std::uint64_t seed,
                                  std::uint64_t stream) {
  if (!(eps_bar >= 0.0)) throw ConfigError("add_noise: eps_bar must be >= 0");
  std::vector<DataSample> noisy;
  noisy.reserve(clean.size());
  for (std::size_t k = 0; k < clean.size(); ++k) {
    auto eng = rng::make_stream(seed, stream + k);
    DataSample s = clean[k];
    for (int i = 0; i < s.x.size(); ++i)
      s.x[i] += rng::uniform_double(eng, -eps_bar, eps_bar);
    for (int j = 0; j < s.u.size(); ++j)
      s.u[j] += rng::uniform_double(eng, -eps_bar, eps_bar);
    for (int i = 0; i < s.x_plus.size(); ++i)
      s.x_plus[i] += rng::uniform_double(eng, -eps_bar, eps_bar);
    noisy.push_back(std::move(s));
  }
  return noisy;
}

}  // namespace ltn
