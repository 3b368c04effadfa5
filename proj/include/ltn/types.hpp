/**
 * @file types.hpp
 * @brief Domain types for linear-threshold network identification.
 *
 * The discrete-time model is
 *   x(k+1) = alpha * x(k) + clamp(W_D x(k) + B_D u(k), 0, s_D)
 * with firing-rate states x >= 0. Identification recovers alpha, W_D, B_D
 * and the saturation ceiling s_D from sampled (x, u, x+) triples.
 */
#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace ltn {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// ---------------------------------------------------------------- errors --

struct LtnError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DimensionError : LtnError {
  using LtnError::LtnError;
};
struct ConfigError : LtnError {
  using LtnError::LtnError;
};
struct DataError : LtnError {
  using LtnError::LtnError;
};
// Raised when a least-squares matrix is numerically rank deficient; carries
// which part of the alpha axis was being solved when it happened.
struct RankDeficiencyError : LtnError {
  RankDeficiencyError(const std::string& msg, int segment_index, double alpha)
      : LtnError(msg), segment_index(segment_index), alpha(alpha) {}
  int segment_index = -1;
  double alpha = 0.0;
};
struct SolverError : LtnError {
  using LtnError::LtnError;
};
struct InternalError : LtnError {
  using LtnError::LtnError;
};
struct IoError : LtnError {
  using LtnError::LtnError;
};

// ----------------------------------------------------------------- model --

struct LtnModel {
  int n = 0;  // node count
  int m = 0;  // input count
  double alpha = 0.0;
  double s_D = 0.0;
  Mat W_D;                            // n x n, zero diagonal unless self loop
  Mat B_D;                            // n x m
  std::vector<int> dale_signs;        // per node: +1 excitatory, -1 inhibitory, 0 free
  std::vector<char> self_loop_mask;   // per node: nonzero = diagonal entry allowed

  // Throws ConfigError on violated invariants (alpha range, s_D > 0, masked
  // diagonal, Dale column signs).
  void validate() const;
};

struct DataSample {
  Vec x;       // length n, >= 0 before noise
  Vec u;       // length m
  Vec x_plus;  // length n, >= 0 before noise
};

struct GenerationConfig {
  int n = 10;
  int m = 10;
  int T_d = 250;
  double x_lo = 0.0, x_hi = 4.0;
  double u_lo = 0.0, u_hi = 6.0;
  double w_exc_lo = 0.0, w_exc_hi = 0.1;
  double w_inh_lo = -0.05, w_inh_hi = 0.0;
  double b_lo = -0.04, b_hi = 0.06;
  double alpha_star = 0.9;
  double s_D_star = 2.0;
  std::uint64_t rng_seed = 1;
  std::vector<int> dale_signs;       // must be +1/-1 per node for generation
  std::vector<char> self_loop_mask;  // empty = no self loops

  void validate() const;  // throws ConfigError naming the offending field
};

// -------------------------------------------------------------- patterns --

// Partition of the stacked residual entries of X+ - alpha*X into
// upper-saturated (S, +1), interior (M, 0) and zero-saturated (Z, -1).
struct SaturationPattern {
  std::vector<signed char> e;  // E(alpha) diagonal, length n*T_d
  int d = 0;                   // nonzero count = column count of C(alpha)

  std::vector<int> set_S() const { return rows_where(+1); }
  std::vector<int> set_Z() const { return rows_where(-1); }
  std::vector<int> set_M() const { return rows_where(0); }
  std::vector<int> rows_where(int sign) const {
    std::vector<int> out;
    for (int i = 0; i < static_cast<int>(e.size()); ++i)
      if (e[i] == sign) out.push_back(i);
    return out;
  }
  bool operator==(const SaturationPattern& o) const { return e == o.e; }
  bool operator!=(const SaturationPattern& o) const { return !(*this == o); }
};

// Critical points 0 = psi_0 < psi_1 < ... <= alpha_max with the pattern on
// each open segment (psi_l, psi_{l+1}) and at each boundary psi_l.
struct Partition {
  double alpha_max = 1.0;
  std::vector<double> psis;                        // size L+1, psis[0] = 0
  std::vector<SaturationPattern> segment_patterns;   // size L, midpoint pattern
  std::vector<SaturationPattern> boundary_patterns;  // size L+1, pattern at psis[l]
  int iterations = 0;                              // while-loop count = L

  int num_segments() const { return static_cast<int>(segment_patterns.size()); }
};

// ---------------------------------------------------------------- result --

struct SegmentCandidate {
  double alpha_cand = 0.0;
  double J_cand = 0.0;
  int segment_index = 0;  // boundary candidates: index l of psis[l]
  bool is_boundary = false;
};

struct Diagnostics {
  int num_critical_points = 0;  // psi count excluding psi_0
  int segments_solved = 0;
  int iterations = 0;           // partition while-loop iterations
  int num_distinct_E = 0;
  double lambda_min_proxy = 0.0;  // smallest singular value of [X P] on M rows at alpha_hat
  std::optional<bool> rank_check_passed;  // set only when validation ran
};

struct IdentResult {
  double alpha_hat = 0.0;
  double alpha_max = 0.0;
  double s_D_hat = 0.0;
  bool s_D_lower_bound_only = false;  // no entry saturated: s_D_hat is a lower bound
  double J_value = 0.0;
  Vec h_hat;
  Vec v_hat;  // multipliers of the saturated rows, length d(alpha_hat)
  Mat W_D_hat;
  Mat B_D_hat;
  int algorithm = 1;
  double eps_bar = 0.0;
  Diagnostics diag;
};

}  // namespace ltn
