#include <algorithm>
#include <cmath>
#include <vector>

#include "ltn/solver.hpp"

namespace ltn {

// min 0.5*||y + Q xi||^2  s.t.  S xi <= 0.
// Primal active-set method. Steps solve the equality-constrained problem on
// the current working set through a nullspace basis; blocking and dropping
// both pick the smallest constraint index (Bland), which rules out cycling.
ConstrainedLs constrained_ls(const Mat& Q, const Vec& y, const Mat& S) {
  const int p = static_cast<int>(Q.cols());
  const int c = static_cast<int>(S.rows());
  if (Q.rows() != y.size())
    throw DimensionError("constrained_ls: row count mismatch");
  if (c > 0 && S.cols() != p)
    throw DimensionError("constrained_ls: constraint width mismatch");

  ConstrainedLs out;
  out.mu = Vec::Zero(c);
  if (p == 0) {
    out.xi = Vec(0);
    return out;
  }

  const Vec xi_u = projection_residual(Q, -y).xi;
  const auto scale_tol = [](const Vec& v) {
    return 1e-11 * std::max(1.0, v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
  };
  if (c == 0 || (S * xi_u).maxCoeff() <= scale_tol(xi_u)) {
    out.xi = xi_u;
    return out;
  }

  Vec xi = Vec::Zero(p);  // S*0 = 0: always feasible
  std::vector<char> active(c, 0);
  const int cap = 10 * (c + 1);
  for (int iter = 1; iter <= cap; ++iter) {
    out.iterations = iter;
    std::vector<int> W;
    for (int r = 0; r < c; ++r)
      if (active[r]) W.push_back(r);

    Vec xi_star;
    Mat SW(static_cast<int>(W.size()), p);
    for (int w = 0; w < static_cast<int>(W.size()); ++w)
      SW.row(w) = S.row(W[w]);
    if (W.empty()) {
      xi_star = xi_u;
    } else {
      Eigen::ColPivHouseholderQR<Mat> qr(SW.transpose());
      const int rk = static_cast<int>(qr.rank());
      if (rk >= p) {
        xi_star = Vec::Zero(p);
      } else {
        const Mat Qfull = qr.householderQ();
        const Mat Z = Qfull.rightCols(p - rk);
        xi_star = Z * projection_residual(Q * Z, -y).xi;
      }
    }

    const double ftol =
        std::max(scale_tol(xi), scale_tol(xi_star));
    double viol = 0.0;
    for (int r = 0; r < c; ++r)
      if (!active[r]) viol = std::max(viol, S.row(r).dot(xi_star));

    if (viol <= ftol) {
      const Vec g = Q.transpose() * (y + Q * xi_star);
      if (W.empty()) {
        out.xi = xi_star;
        return out;
      }
      const Vec muW = SW.transpose().colPivHouseholderQr().solve(-g);
      const double mtol = 1e-11 * std::max(1.0, g.cwiseAbs().maxCoeff());
      int drop = -1;
      for (int w = 0; w < static_cast<int>(W.size()); ++w)
        if (muW[w] < -mtol) {
          drop = W[w];
          break;
        }
      if (drop < 0) {
        out.xi = xi_star;
        out.mu.setZero();
        for (int w = 0; w < static_cast<int>(W.size()); ++w)
          out.mu[W[w]] = std::max(0.0, muW[w]);
        return out;
      }
      active[drop] = 0;
      xi = xi_star;
      continue;
    }

    const Vec d = xi_star - xi;
    double t = 1.0;
    int blocker = -1;
    for (int r = 0; r < c; ++r) {
      if (active[r]) continue;
      const double sd = S.row(r).dot(d);
      if (sd <= 0.0) continue;
      double tr = -S.row(r).dot(xi) / sd;
      tr = std::max(tr, 0.0);
      if (tr < t) {
        t = tr;
        blocker = r;
      }
    }
    if (blocker < 0)
      throw InternalError("constrained_ls: infeasible target without blocker");
    xi += t * d;
    active[blocker] = 1;
  }
  throw SolverError("constrained_ls: iteration cap exceeded");
}

}  // namespace ltn
