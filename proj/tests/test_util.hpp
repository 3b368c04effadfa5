#pragma once

// Shared helpers for the test binaries: compact batch builders and the
// dense brute-force oracles the fast paths are checked against.

#include <cstdint>
#include <utility>
#include <vector>

#include "ltn/batch.hpp"
#include "ltn/packing.hpp"
#include "ltn/partition.hpp"
#include "ltn/rng.hpp"
#include "ltn/simulate.hpp"
#include "ltn/solver.hpp"
#include "ltn/types.hpp"

namespace tutil {

using namespace ltn;

inline Vec vec(std::initializer_list<double> v) {
  Vec out(static_cast<int>(v.size()));
  int i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

inline GenerationConfig small_cfg(int n, int m, int T_d, std::uint64_t seed) {
  GenerationConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.T_d = T_d;
  cfg.rng_seed = seed;
  cfg.dale_signs.assign(n, -1);
  for (int i = 0; i < (4 * n + 4) / 5 && i < n; ++i) cfg.dale_signs[i] = 1;
  return cfg;
}

inline DataBatch batch_of(std::vector<DataSample> samples, double eps = 0.0,
                          std::vector<char> mask = {}) {
  return DataBatch::build(std::move(samples), eps, std::move(mask));
}

// One-sample batch: stacked rows follow x/x_plus entry order directly.
inline DataBatch batch1(const Vec& x, const Vec& xp, const Vec& u,
                        double eps = 0.0) {
  DataSample s;
  s.x = x;
  s.u = u;
  s.x_plus = xp;
  return batch_of({s}, eps);
}

// Random exact-data batch: entries have no model behind them, which is fine
// for partition-level tests.
inline DataBatch random_batch(int n, int m, int T_d, std::uint64_t seed,
                              double eps = 0.0) {
  auto eng = rng::make_stream(seed, 0xBA7C4);
  std::vector<DataSample> ss(T_d);
  for (auto& s : ss) {
    s.x = Vec(n);
    s.u = Vec(m);
    s.x_plus = Vec(n);
    for (int i = 0; i < n; ++i) s.x[i] = rng::uniform_double(eng, 0.0, 3.0);
    for (int j = 0; j < m; ++j) s.u[j] = rng::uniform_double(eng, 0.0, 2.0);
    for (int i = 0; i < n; ++i)
      s.x_plus[i] = rng::uniform_double(eng, 0.0, 3.0);
  }
  return batch_of(std::move(ss), eps);
}

// Dense objective oracle: materializes Q = [C -P] and solves one full
// least-squares problem, no per-node decomposition.
inline double brute_J(const DataBatch& b, double alpha,
                      const SaturationPattern& e) {
  const Mat P = b.P_dense();
  const Mat C = build_C(e);
  Mat Q(b.rows(), C.cols() + P.cols());
  if (C.cols() > 0) Q.leftCols(C.cols()) = C;
  Q.rightCols(P.cols()) = -P;
  const Vec y = b.X_plus() - alpha * b.X();
  const Vec xi = Q.colPivHouseholderQr().solve(y);
  return 0.5 * (y - Q * xi).squaredNorm();
}

// Brute QP oracle for min 0.5||y + Q xi||^2 s.t. S xi <= 0: enumerate every
// active subset, solve the equality-constrained problem through a nullspace
// basis, keep the best feasible candidate. Valid because the optimum's
// active set is one of the subsets.
struct QpSol {
  Vec xi;
  double obj = 0.0;
};

inline QpSol qp_oracle(const Mat& Q, const Vec& y, const Mat& S) {
  const int p = static_cast<int>(Q.cols());
  const int c = static_cast<int>(S.rows());
  QpSol best;
  best.obj = std::numeric_limits<double>::infinity();
  for (int bits = 0; bits < (1 << c); ++bits) {
    std::vector<int> act;
    for (int r = 0; r < c; ++r)
      if (bits & (1 << r)) act.push_back(r);
    Vec xi;
    if (act.empty()) {
      xi = Q.colPivHouseholderQr().solve(-y);
    } else {
      Mat SA(static_cast<int>(act.size()), p);
      for (int w = 0; w < static_cast<int>(act.size()); ++w)
        SA.row(w) = S.row(act[w]);
      Eigen::ColPivHouseholderQR<Mat> qr(SA.transpose());
      const int rk = static_cast<int>(qr.rank());
      if (rk >= p) {
        xi = Vec::Zero(p);
      } else {
        const Mat Qfull = qr.householderQ();
        const Mat Z = Qfull.rightCols(p - rk);
        xi = Z * (Q * Z).colPivHouseholderQr().solve(-y);
      }
    }
    if (c > 0 && (S * xi).maxCoeff() > 1e-9) continue;
    const double obj = 0.5 * (y + Q * xi).squaredNorm();
    if (obj < best.obj - 1e-15 ||
        (best.xi.size() == 0 && obj <= best.obj)) {
      best.obj = obj;
      best.xi = xi;
    }
  }
  return best;
}

}  // namespace tutil
