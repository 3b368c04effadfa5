#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "ltn/rng.hpp"
#include "ltn/solver.hpp"
#include "ltn/validation.hpp"

namespace ltn {

namespace {

std::string pattern_key(const SaturationPattern& p) {
  return std::string(reinterpret_cast<const char*>(p.e.data()), p.e.size());
}

void push_unique(std::vector<SaturationPattern>& out,
                 std::unordered_set<std::string>& seen,
                 const SaturationPattern& p) {
  if (seen.insert(pattern_key(p)).second) out.push_back(p);
}

struct PairCheck {
  double sigma_min = 0.0;
  bool pass = false;
};

// Full-column-rank test of [X P] restricted to the rows interior in both
// patterns. Cheap pass: arrowhead Gram, power iteration for the top
// eigenvalue, LDLT inverse iteration for the bottom one. The Gram squares
// the condition number, so anything within two decades of the tolerance is
// redone with a dense SVD of the masked matrix itself.
PairCheck check_pair(const DataBatch& batch, const SaturationPattern& e1,
                     const SaturationPattern& e2, double rel_tol) {
  const int N = batch.rows();
  std::vector<int> rows;
  rows.reserve(N);
  for (int r = 0; r < N; ++r)
    if (e1.e[r] == 0 && e2.e[r] == 0) rows.push_back(r);

  const int d = batch.h_dim() + 1;
  if (static_cast<int>(rows.size()) < d) return {};

  int max_len = 0;
  for (int i = 0; i < batch.n(); ++i) max_len = std::max(max_len, batch.block_len(i));
  std::vector<double> buf(static_cast<std::size_t>(std::max(max_len, 1)));

  Mat G = Mat::Zero(d, d);
  for (int r : rows) {
    const int i = batch.node_of(r);
    const int off = batch.offsets()[i];
    const int len = batch.block_len(i);
    batch.fill_p_bar(r, buf.data());
    Eigen::Map<const Vec> pb(buf.data(), len);
    const double xv = batch.X()[r];
    G(0, 0) += xv * xv;
    if (len > 0) {
      G.block(1 + off, 0, len, 1) += xv * pb;
      G.block(1 + off, 1 + off, len, len)
          .selfadjointView<Eigen::Lower>()
          .rankUpdate(pb);
    }
  }
  const Mat Gfull = G.selfadjointView<Eigen::Lower>();

  Vec z = Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
  double lmax = 0.0;
  for (int it = 0; it < 40; ++it) {
    Vec w = Gfull * z;
    const double nw = w.norm();
    if (nw <= 0.0) break;
    z = w / nw;
    lmax = nw;
  }

  double lmin = 0.0;
  Eigen::LDLT<Mat> ldlt(Gfull);
  if (ldlt.info() == Eigen::Success) {
    Vec q = Vec::Constant(d, 1.0 / std::sqrt(static_cast<double>(d)));
    bool ok = true;
    for (int it = 0; it < 30; ++it) {
      Vec y = ldlt.solve(q);
      const double ny = y.norm();
      if (!std::isfinite(ny) || ny > 1e290 || ny == 0.0) {
        ok = false;
        break;
      }
      q = y / ny;
    }
    if (ok) lmin = std::max(0.0, q.dot(Gfull * q));
  }

  const double smax_est = std::sqrt(std::max(lmax, 0.0));
  const double smin_est = std::sqrt(lmin);
  if (smin_est > std::max(10.0 * rel_tol, 1e-7) * smax_est)
    return {smin_est, true};

  Mat A = Mat::Zero(static_cast<int>(rows.size()), d);
  for (int k = 0; k < static_cast<int>(rows.size()); ++k) {
    const int r = rows[k];
    const int i = batch.node_of(r);
    const int len = batch.block_len(i);
    A(k, 0) = batch.X()[r];
    batch.fill_p_bar(r, buf.data());
    for (int c = 0; c < len; ++c) A(k, 1 + batch.offsets()[i] + c) = buf[c];
  }
  Eigen::BDCSVD<Mat> svd(A);
  const double smax = svd.singularValues()(0);
  const double smin = svd.singularValues()(svd.singularValues().size() - 1);
  return {smin, smin > rel_tol * smax};
}

}  // namespace

std::vector<SaturationPattern> enumerate_E(const Partition& part) {
  std::vector<SaturationPattern> out;
  std::unordered_set<std::string> seen;
  const int L = part.num_segments();
  for (int l = 0; l < L; ++l) {
    push_unique(out, seen, part.boundary_patterns[l]);
    push_unique(out, seen, part.segment_patterns[l]);
  }
  if (!part.boundary_patterns.empty())
    push_unique(out, seen, part.boundary_patterns.back());
  return out;
}

std::vector<SaturationPattern> enumerate_E(const DataBatch& batch) {
  return enumerate_E(build_partition(batch, batch.eps_bar()));
}

AssumptionReport check_assumption1(const DataBatch& batch,
                                   const AssumptionOptions& opts) {
  return check_assumption1(enumerate_E(batch), batch, opts);
}

AssumptionReport check_assumption1(const std::vector<SaturationPattern>& ps,
                                   const DataBatch& batch,
                                   const AssumptionOptions& opts) {
  AssumptionReport rep;
  rep.sampled = opts.sampled;
  const int K = static_cast<int>(ps.size());
  rep.num_E_matrices = K;
  if (K == 0) {
    rep.passed = true;
    return rep;
  }

  const long long total = static_cast<long long>(K) * (K + 1) / 2;
  std::vector<std::pair<int, int>> pairs;
  if (opts.sampled && total > opts.max_pairs) {
    auto eng = rng::make_stream(opts.seed, rng::kPairStream);
    std::unordered_set<long long> seen;
    long long attempts = 0;
    const long long attempt_cap = 20LL * opts.max_pairs + 100;
    while (static_cast<int>(pairs.size()) < opts.max_pairs &&
           attempts++ < attempt_cap) {
      auto t = static_cast<long long>(rng::uniform_double(eng, 0.0, 1.0) *
                                      static_cast<double>(total));
      t = std::min(t, total - 1);
      if (!seen.insert(t).second) continue;
      int i = 0;
      long long rem = t;
      while (rem >= K - i) {
        rem -= K - i;
        ++i;
      }
      pairs.emplace_back(i, i + static_cast<int>(rem));
    }
  } else {
    pairs.reserve(static_cast<std::size_t>(total));
    for (int i = 0; i < K; ++i)
      for (int j = i; j < K; ++j) pairs.emplace_back(i, j);
  }

  double minv = std::numeric_limits<double>::infinity();
  rep.passed = true;
  for (const auto& [i, j] : pairs) {
    const PairCheck pc = check_pair(batch, ps[i], ps[j], opts.rel_tol);
    ++rep.pairs_checked;
    minv = std::min(minv, pc.sigma_min);
    if (!pc.pass && rep.passed) {
      rep.passed = false;
      rep.failing_pair = std::make_pair(i, j);
    }
  }
  rep.min_singular_value_seen = rep.pairs_checked ? minv : 0.0;
  return rep;
}

double prop2_bound(double sigma1, double sigma2, int T_d, int n, int m) {
  if (!(sigma1 > 0.0 && sigma1 <= 1.0) || !(sigma2 > 0.0 && sigma2 <= 1.0))
    throw ConfigError("prop2_bound: sigma must lie in (0, 1]");
  if (T_d <= 0 || n <= 0 || m <= 0)
    throw ConfigError("prop2_bound: T_d, n, m must be positive");

  const int half_lo = T_d / 2;
  const int half_hi = T_d - half_lo;

  const double first =
      sigma1 >= 1.0 ? 1.0 : -std::expm1(half_lo * std::log1p(-sigma1));

  double sum = 0.0;
  for (int l = n + m; l <= half_hi; ++l) {
    double lt = std::lgamma(half_hi + 1.0) - std::lgamma(l + 1.0) -
                std::lgamma(half_hi - l + 1.0);
    if (l > 0) lt += l * std::log(sigma2);
    if (half_hi - l > 0) lt += (half_hi - l) * std::log1p(-sigma2);
    sum += std::exp(lt);
  }
  return std::clamp(first * sum, 0.0, 1.0);
}

std::pair<double, double> estimate_sigmas(
    const std::vector<DataSample>& samples, double gamma) {
  if (samples.empty()) throw DataError("estimate_sigmas: no samples");
  if (!std::isfinite(gamma) || gamma <= 0.0)
    throw ConfigError("estimate_sigmas: gamma must be positive");
  int c1 = 0, c2 = 0;
  for (const auto& s : samples) {
    const Vec diff = s.x_plus - s.x;
    if (diff.maxCoeff() >= gamma) ++c1;
    if (diff.minCoeff() > 0.0 && s.x_plus.maxCoeff() < gamma) ++c2;
  }
  const auto T = static_cast<double>(samples.size());
  return {c1 / T, c2 / T};
}

GridScan grid_oracle(const DataBatch& batch, double eps, int num_points) {
  if (num_points < 1) throw ConfigError("grid_oracle: num_points must be >= 1");
  const double amax = alpha_max(batch);
  GridScan out;
  out.points = num_points;
  double best_j = std::numeric_limits<double>::infinity();
  double best_a = 0.0;
  for (int j = 1; j <= num_points; ++j) {
    const double a = amax * j / num_points;
    const SaturationPattern pat = classify(batch, a, eps);
    double val;
    try {
      val = objective_J_serial(batch, a, pat);
    } catch (const RankDeficiencyError&) {
      ++out.skipped;
      continue;
    }
    if (val < best_j) {
      best_j = val;
      best_a = a;
    }
  }
  if (!std::isfinite(best_j))
    throw DataError("grid_oracle: every grid point was rank deficient");
  out.best_alpha = best_a;
  out.best_J = best_j;
  return out;
}

}  // namespace ltn
