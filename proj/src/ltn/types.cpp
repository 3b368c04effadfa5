#include "ltn/types.hpp"

#include <cmath>

namespace ltn {
namespace {

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void LtnModel::validate() const {
  require(n > 0, "model: n must be positive");
  require(m > 0, "model: m must be positive");
  require(std::isfinite(alpha) && alpha > 0.0 && alpha <= 1.0,
          "model: alpha must lie in (0, 1]");
  require(std::isfinite(s_D) && s_D > 0.0, "model: s_D must be positive");
  require(W_D.rows() == n && W_D.cols() == n, "model: W_D must be n x n");
  require(B_D.rows() == n && B_D.cols() == m, "model: B_D must be n x m");
  require(dale_signs.empty() || static_cast<int>(dale_signs.size()) == n,
          "model: dale_signs must be empty or length n");
  require(self_loop_mask.empty() ||
              static_cast<int>(self_loop_mask.size()) == n,
          "model: self_loop_mask must be empty or length n");
  require(W_D.allFinite() && B_D.allFinite(), "model: non-finite entries");

  for (int i = 0; i < n; ++i) {
    bool loop = !self_loop_mask.empty() && self_loop_mask[i];
    if (!loop)
      require(W_D(i, i) == 0.0, "model: diagonal entry without self loop");
  }
  if (!dale_signs.empty()) {
    for (int j = 0; j < n; ++j) {
      int s = dale_signs[j];
      require(s == 1 || s == -1 || s == 0, "model: dale_signs entries must be -1/0/+1");
      if (s == 0) continue;
      for (int i = 0; i < n; ++i)
        require(s * W_D(i, j) >= 0.0, "model: W_D column violates its sign");
    }
  }
}

void GenerationConfig::validate() const {
  require(n > 0, "generate: n must be positive");
  require(m > 0, "generate: m must be positive");
  require(T_d > 0, "generate: T_d must be positive");
  require(x_lo >= 0.0 && x_hi > x_lo, "generate: x range must sit in [0, inf)");
  require(u_hi > u_lo, "generate: empty u range");
  require(w_exc_lo >= 0.0 && w_exc_hi >= w_exc_lo,
          "generate: excitatory weight range must be nonnegative");
  require(w_inh_hi <= 0.0 && w_inh_lo <= w_inh_hi,
          "generate: inhibitory weight range must be nonpositive");
  require(b_hi >= b_lo, "generate: empty b range");
  require(alpha_star > 0.0 && alpha_star <= 1.0,
          "generate: alpha_star must lie in (0, 1]");
  require(s_D_star > 0.0, "generate: s_D_star must be positive");
  require(static_cast<int>(dale_signs.size()) == n,
          "generate: dale_signs must be length n");
  for (int s : dale_signs)
    require(s == 1 || s == -1, "generate: dale_signs entries must be +1/-1");
  require(self_loop_mask.empty() ||
              static_cast<int>(self_loop_mask.size()) == n,
          "generate: self_loop_mask must be empty or length n");
}

}  // namespace ltn
