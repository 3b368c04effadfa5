#pragma once

#include <optional>

#include "ltn/batch.hpp"
#include "ltn/partition.hpp"
#include "ltn/types.hpp"

namespace ltn {

// Least-squares projection of y onto the column space of Q. residual =
// y - Q*xi with xi = argmin ||y - Q xi||. Throws RankDeficiencyError when
// the smallest singular value of Q falls under 1e-10 times the largest.
struct Projection {
  Vec xi;
  Vec residual;
  double sq_norm = 0.0;  // ||residual||^2
};
Projection projection_residual(const Mat& Q, const Vec& y);

// min 0.5*||y + Q xi||^2 subject to S xi <= 0, primal active set with a
// nullspace step. Throws SolverError when the iteration cap is hit.
struct ConstrainedLs {
  Vec xi;
  Vec mu;  // multipliers, one per row of S, zero off the active set
  int iterations = 0;
};
ConstrainedLs constrained_ls(const Mat& Q, const Vec& y, const Mat& S);

// J(alpha) = 0.5 * || (I - proj onto colspace [C -P]) (X+ - alpha X) ||^2
// for a fixed pattern. The active rows are absorbed exactly by the C block,
// so this reduces to per-node projections of the interior rows onto the
// node's P block; objective_J runs those node solves under OpenMP,
// objective_J_serial is the plain-loop reference.
double objective_J(const DataBatch& batch, double alpha,
                   const SaturationPattern& e);
double objective_J_serial(const DataBatch& batch, double alpha,
                          const SaturationPattern& e);

// Exact minimizer of J over [lo, hi] for a fixed pattern: J restricted to a
// segment is a parabola in alpha, coefficients from two projections sharing
// one factorization. alpha is clamped to [max(lo, 1e-12), hi].
SegmentCandidate segment_minimize(const DataBatch& batch,
                                  const SaturationPattern& e, double lo,
                                  double hi, int segment_index);

struct SolveOptions {
  std::vector<int> dale_signs;  // empty = unconstrained recovery
  bool parallel = true;
  double eps_bar_override = -1.0;  // >= 0 replaces batch.eps_bar for bands
  std::vector<SegmentCandidate>* candidates_out = nullptr;  // optional dump
};

// Exact-data identification: partition, per-segment closed-form minimize,
// global argmin, then recovery of h, v, s_D at the winner.
IdentResult algorithm1(const DataBatch& batch, const SolveOptions& opts = {});

// Noise-robust variant: wide classification bands, sign-constrained
// recovery, s_D from the mean of saturated residual rows.
IdentResult algorithm2(const DataBatch& batch, const SolveOptions& opts = {});

// sqrt(||h_hat - h_star|| / h_dim) with an UNSQUARED norm under the root;
// kept in this form because every reported number uses it. The two-argument
// form takes h_dim from the vector length.
double rmse_h(const Vec& h_hat, const Vec& h_star, int h_dim);
double rmse_h(const Vec& h_hat, const Vec& h_star);

}  // namespace ltn
