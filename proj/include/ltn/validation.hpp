#pragma once

#include <cstdint>
#include <optional>
#include <utility>

#include "ltn/batch.hpp"
#include "ltn/partition.hpp"
#include "ltn/types.hpp"

namespace ltn {

// Distinct saturation patterns across a partition's segments and
// boundaries, in first-seen order.
std::vector<SaturationPattern> enumerate_E(const Partition& part);
std::vector<SaturationPattern> enumerate_E(const DataBatch& batch);

struct AssumptionReport {
  bool passed = false;
  int num_E_matrices = 0;
  double min_singular_value_seen = 0.0;
  std::optional<std::pair<int, int>> failing_pair;  // indices into the E list
  bool sampled = false;
  int pairs_checked = 0;
};

struct AssumptionOptions {
  bool sampled = false;    // check a random subset of pairs instead of all
  int max_pairs = 2000;    // pair budget when sampled
  std::uint64_t seed = 1;
  double rel_tol = 1e-10;  // pass iff sigma_min > rel_tol * sigma_max
};

// For every pattern pair (E1, E2), the rows interior in BOTH must leave
// [X P] with full column rank. Cheap Gram eigenvalue bound first, dense SVD
// only near the tolerance.
AssumptionReport check_assumption1(const DataBatch& batch,
                                   const AssumptionOptions& opts = {});
AssumptionReport check_assumption1(const std::vector<SaturationPattern>& ps,
                                   const DataBatch& batch,
                                   const AssumptionOptions& opts = {});

// Lower bound on the probability that the rank condition holds for T_d
// i.i.d. samples:
//   (1-(1-sigma1)^floor(T_d/2)) * sum_{l=m+n}^{ceil(T_d/2)}
//       C(ceil(T_d/2), l) sigma2^l (1-sigma2)^(ceil(T_d/2)-l)
// evaluated in log space and clamped to [0, 1]. Empty sum -> 0.
double prop2_bound(double sigma1, double sigma2, int T_d, int n, int m);

// Empirical frequencies for the two events behind prop2_bound, given the
// margin gamma: sigma1 = fraction of samples with vmax(x+ - x) >= gamma,
// sigma2 = fraction with vmin(x+ - x) > 0 and vmax(x+) < gamma.
std::pair<double, double> estimate_sigmas(
    const std::vector<DataSample>& samples, double gamma);

// Brute-force check of a solve: J on a uniform grid of num_points values
// alpha_max*j/num_points, j=1..num_points, classifying fresh at every
// point. Rank-deficient points are skipped and counted.
struct GridScan {
  double best_alpha = 0.0;
  double best_J = 0.0;
  int points = 0;
  int skipped = 0;
};
GridScan grid_oracle(const DataBatch& batch, double eps, int num_points);

}  // namespace ltn
