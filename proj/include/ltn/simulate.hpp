#pragma once

#include <cstdint>

#include "ltn/batch.hpp"
#include "ltn/types.hpp"

namespace ltn {

// Clamp to [0, s] elementwise.
Vec threshold(const Vec& v, double s);

// One step of x_plus = alpha*x + [W x + B u]_0^s.
Vec step(const LtnModel& model, const Vec& x, const Vec& u);

// Full trajectory from x0 under inputs u(0..T-1); returns T+1 states.
std::vector<Vec> simulate_trajectory(const LtnModel& model, const Vec& x0,
                                     const std::vector<Vec>& inputs);

// Forward-Euler map of a continuous-time model with time constant tau and
// step dt: alpha = 1 - dt/tau, W/B/s scaled by dt/tau.
LtnModel discretize(const LtnModel& ct, double tau, double dt);

struct SyntheticData {
  LtnModel model;
  std::vector<DataSample> samples;
};

// Random model + i.i.d. samples drawn per cfg. Column signs of W follow
// cfg.dale_signs; diagonal entries not in self_loop_mask are zeroed.
SyntheticData generate_synthetic(const GenerationConfig& cfg);

// Uniform noise on [-eps_bar, eps_bar] added to x, u, x_plus of every
// sample. Values are not re-clipped to the nonnegative orthant.
std::vector<DataSample> add_noise(const std::vector<DataSample>& clean,
                                  double eps_bar, std::uint64_t seed,
                                  std::uint64_t stream);

}  // namespace ltn
