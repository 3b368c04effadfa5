#include "ltn/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace ltn {
namespace {

// Roundoff slack for band comparisons so that classification at a computed
// critical point catches the exact ties the point was derived from.
double class_tol(const DataBatch& b) {
  double s = std::max(b.X().cwiseAbs().maxCoeff(),
                      b.X_plus().cwiseAbs().maxCoeff());
  return 1e-11 * std::max(1.0, s);
}

// Line that tops the residual envelope just right of alpha: largest
// r = X+ - alpha*X, ties broken by smallest X (steepest surviving slope),
// then smallest index.
int leader_after(const DataBatch& b, double alpha, double tie_tol) {
  const Vec& X = b.X();
  Vec r = b.X_plus() - alpha * X;
  const double vmax = r.maxCoeff();
  int best = -1;
  for (int i = 0; i < r.size(); ++i) {
    if (r[i] < vmax - tie_tol) continue;
    if (best < 0 || X[i] < X[best]) best = i;
  }
  return best;
}

struct Candidate {
  double alpha;
  bool envelope;  // family (a): argmax line intersection
};

void gen_candidates(const DataBatch& b, int k, double lo, double hi,
                    double eps, std::vector<Candidate>& out) {
  const Vec& X = b.X();
  const Vec& Xp = b.X_plus();
  const int N = static_cast<int>(X.size());
  const double margin = 1e-12;
  out.clear();
  auto push = [&](double num, double den, bool env) {
    if (std::abs(den) < 1e-300) return;
    const double a = num / den;
    if (!std::isfinite(a)) return;
    if (a > lo + margin && a <= hi + 1e-15)
      out.push_back({std::min(a, hi), env});
  };
  for (int i = 0; i < N; ++i) {
    if (i != k) {
      // r_i crosses the leading line r_k
      push(Xp[i] - Xp[k], X[i] - X[k], true);
      if (eps > 0.0)
        // r_i crosses the lower edge of the saturation band
        push(Xp[i] - Xp[k] + 2.0 * eps, X[i] - X[k] - 2.0 * eps, false);
    }
    // r_i crosses the zero band (1+alpha)*eps
    push(Xp[i] - eps, X[i] + eps, false);
  }
  std::sort(out.begin(), out.end(),
            [](const Candidate& a, const Candidate& b2) {
              return a.alpha < b2.alpha;
            });
}

}  // namespace

Vec residual(const DataBatch& batch, double alpha) {
  return batch.X_plus() - alpha * batch.X();
}

double alpha_max(const DataBatch& batch) {
  return alpha_max(batch, batch.eps_bar());
}

double alpha_max(const DataBatch& batch, double eps_bar) {
  const Vec& X = batch.X();
  const Vec& Xp = batch.X_plus();
  double best = 1.0;
  if (eps_bar == 0.0) {
    for (int i = 0; i < X.size(); ++i)
      if (X[i] != 0.0) best = std::min(best, Xp[i] / X[i]);
  } else {
    for (int i = 0; i < X.size(); ++i) {
      const double den = X[i] - eps_bar;
      if (den > 0.0) best = std::min(best, (Xp[i] + eps_bar) / den);
    }
  }
  if (!(best > 0.0)) throw DataError("alpha_max: empty feasible range");
  return best;
}

SaturationPattern classify(const DataBatch& batch, double alpha) {
  return classify(batch, alpha, batch.eps_bar());
}

SaturationPattern classify(const DataBatch& batch, double alpha, double eps) {
  const Vec r = residual(batch, alpha);
  const double vmax = r.maxCoeff();
  const double tol = class_tol(batch);
  const double s_cut = vmax - 2.0 * (1.0 + alpha) * eps - tol;
  const double z_cut = (1.0 + alpha) * eps + tol;
  SaturationPattern p;
  p.e.resize(r.size());
  p.d = 0;
  for (int i = 0; i < r.size(); ++i) {
    if (r[i] >= s_cut) {  // saturated wins when both bands hold
      p.e[i] = 1;
      ++p.d;
    } else if (r[i] <= z_cut) {
      p.e[i] = -1;
      ++p.d;
    } else {
      p.e[i] = 0;
    }
  }
  return p;
}

Mat build_C(const SaturationPattern& e) {
  const int N = static_cast<int>(e.e.size());
  Mat C = Mat::Zero(N, e.d);
  int j = 0;
  for (int i = 0; i < N; ++i)
    if (e.e[i] != 0) C(i, j++) = static_cast<double>(e.e[i]);
  return C;
}

double next_critical_point(const DataBatch& batch, double t, double hi,
                           double eps) {
  if (!(t < hi)) throw InternalError("next_critical_point: empty interval");
  const double tie_tol = class_tol(batch);
  int k = leader_after(batch, t, tie_tol);

  std::vector<Candidate> cands;
  gen_candidates(batch, k, t, hi, eps, cands);
  if (cands.empty()) return hi;

  SaturationPattern ref =
      classify(batch, 0.5 * (t + cands.front().alpha), eps);
  double last = -1.0;
  for (std::size_t ci = 0; ci < cands.size(); ++ci) {
    const double c = cands[ci].alpha;
    if (c - last <= 1e-12) continue;  // deduplicate near-equal roots
    last = c;
    if (classify(batch, c, eps) != ref) return c;
    const double eta = 1e-12 * std::max(1.0, std::abs(c));
    if (c + eta <= hi && classify(batch, c + eta, eps) != ref) return c;
    if (cands[ci].envelope) {
      // the top line changed hands without a pattern change; candidates
      // further right depend on the new leader
      const int k2 = leader_after(batch, std::min(c + eta, hi), tie_tol);
      if (k2 != k) {
        k = k2;
        gen_candidates(batch, k, c, hi, eps, cands);
        if (cands.empty()) return hi;
        ci = static_cast<std::size_t>(-1);
        last = c;
      }
    }
  }
  return hi;
}

Partition build_partition(const DataBatch& batch, double eps) {
  Partition part;
  part.alpha_max = alpha_max(batch);
  const double amax = part.alpha_max;
  const bool noisy = batch.eps_bar() > 0.0 || eps > 0.0;
  const long bound =
      (noisy ? 3L : 2L) * batch.n() * batch.T_d() + 1 + 10;

  part.psis.push_back(0.0);
  part.boundary_patterns.push_back(classify(batch, 0.0, eps));
  double t = 0.0;
  while (t < amax) {
    if (++part.iterations > bound)
      throw InternalError("build_partition: iteration bound exceeded");
    double c = next_critical_point(batch, t, amax, eps);
    if (!(c > t)) throw InternalError("build_partition: no progress");
    if (amax - c < 1e-12) c = amax;
    part.segment_patterns.push_back(classify(batch, 0.5 * (t + c), eps));
    part.psis.push_back(c);
    part.boundary_patterns.push_back(classify(batch, c, eps));
    t = c;
  }
  return part;
}

}  // namespace ltn
