#pragma once

#include "ltn/batch.hpp"
#include "ltn/types.hpp"

namespace ltn {

// Residual r = X_plus - alpha*X, stacked like the batch rows.
Vec residual(const DataBatch& batch, double alpha);

// Largest admissible alpha: smallest ratio x_plus[i]/x[i] over rows with
// x[i] != 0, capped at 1. With eps_bar > 0 the ratio becomes
// (x_plus[i]+eps)/(x[i]-eps) over rows with x[i]-eps > 0. All-zero X gives 1.
double alpha_max(const DataBatch& batch);
double alpha_max(const DataBatch& batch, double eps_bar);

// Row classification at a fixed alpha. With eps = 0: S iff r[i] equals the
// row max, Z iff r[i] = 0. With eps > 0 the bands widen to
// r[i] >= vmax - 2(1+alpha)*eps and r[i] <= (1+alpha)*eps. S wins when both
// hold. A small scale-relative slack absorbs roundoff at computed critical
// points.
SaturationPattern classify(const DataBatch& batch, double alpha);
SaturationPattern classify(const DataBatch& batch, double alpha, double eps);

// Selector C for pattern e: rows() x d matrix whose j-th column is
// e[i_j] * unit(i_j) for the j-th nonzero entry of e (ascending row order).
// C^T C = I_d and C C^T = E^2 (the 0/1 mask of active rows).
Mat build_C(const SaturationPattern& e);

// Smallest alpha in (t, hi] where the classification changes, or hi if none.
// eps matches the band width used by classify.
double next_critical_point(const DataBatch& batch, double t, double hi,
                           double eps);

// Sweep (0, alpha_max]: psis = 0 < c_1 < ... <= alpha_max, one pattern per
// open segment (taken at the midpoint) and one per interior boundary plus
// the right endpoint. eps controls the classification bands; feasible range
// always comes from the batch's own eps_bar.
Partition build_partition(const DataBatch& batch, double eps);

}  // namespace ltn
