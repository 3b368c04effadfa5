#include "ltn/solver.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <memory>

#include "ltn/packing.hpp"
#include "ltn/validation.hpp"

namespace ltn {
namespace {

// Least-squares kernel for one node's interior-row block. Householder QR
// with an escalation to SVD when the R diagonal looks suspicious; the
// 1e-10 relative singular-value cutoff decides rank deficiency.
class BlockSolver {
 public:
  BlockSolver(Mat A, int seg, double alpha) : A_(std::move(A)) {
    const int rows = static_cast<int>(A_.rows());
    const int cols = static_cast<int>(A_.cols());
    if (rows < cols)
      throw RankDeficiencyError("least-squares block has fewer rows than unknowns",
                                seg, alpha);
    qr_.compute(A_);
    const Vec d = qr_.matrixQR().diagonal().head(cols).cwiseAbs();
    if (d.minCoeff() <= 1e-8 * d.maxCoeff()) {
      svd_ = std::make_unique<Eigen::BDCSVD<Mat>>(
          A_, Eigen::ComputeThinU | Eigen::ComputeThinV);
      const auto& sv = svd_->singularValues();
      if (sv(cols - 1) <= 1e-10 * sv(0))
        throw RankDeficiencyError("rank-deficient least-squares block", seg,
                                  alpha);
    }
  }

  Vec solve(const Vec& b) const {
    if (svd_) return svd_->solve(b);
    return qr_.solve(b);
  }
  Vec project_out(const Vec& b) const { return b - A_ * solve(b); }

 private:
  Mat A_;
  Eigen::HouseholderQR<Mat> qr_;
  std::unique_ptr<Eigen::BDCSVD<Mat>> svd_;
};

// Interior rows of one node under a pattern: design block and the matching
// slices of X+ and X.
struct NodeRows {
  Mat A;
  Vec bp, bx;
  std::vector<int> rows;
};

NodeRows gather_node(const DataBatch& b, const SaturationPattern& e, int i) {
  const int n = b.n(), T = b.T_d();
  const int len = b.block_len(i);
  NodeRows nr;
  for (int k = 0; k < T; ++k)
    if (e.e[k * n + i] == 0) nr.rows.push_back(k * n + i);
  const int cnt = static_cast<int>(nr.rows.size());
  nr.A.resize(cnt, len);
  nr.bp.resize(cnt);
  nr.bx.resize(cnt);
  std::vector<double> buf(n + b.m());
  for (int q = 0; q < cnt; ++q) {
    const int rr = nr.rows[q];
    b.fill_p_bar(rr, buf.data());
    nr.A.row(q) = Eigen::Map<Eigen::RowVectorXd>(buf.data(), len);
    nr.bp[q] = b.X_plus()[rr];
    nr.bx[q] = b.X()[rr];
  }
  return nr;
}

struct ParabolaCoeffs {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // J(a) = c0 + c1 a + c2 a^2
};

// Projection residuals of X+ and X on each node's interior rows, one QR per
// node shared by both right-hand sides. Node results land in per-node slots
// and are reduced sequentially, so parallel and serial runs agree bitwise.
ParabolaCoeffs segment_coeffs(const DataBatch& b, const SaturationPattern& e,
                              int seg, double alpha_err, bool parallel) {
  const int n = b.n();
  std::vector<ParabolaCoeffs> part(n);
  std::exception_ptr ep = nullptr;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      NodeRows nr = gather_node(b, e, i);
      BlockSolver solver(std::move(nr.A), seg, alpha_err);
      const Vec rp = solver.project_out(nr.bp);
      const Vec rx = solver.project_out(nr.bx);
      part[i].c0 = 0.5 * rp.squaredNorm();
      part[i].c1 = -rp.dot(rx);
      part[i].c2 = 0.5 * rx.squaredNorm();
    } catch (...) {
#pragma omp critical(ltn_seg_err)
      if (!ep) ep = std::current_exception();
    }
  }
  if (ep) std::rethrow_exception(ep);
  ParabolaCoeffs out;
  for (int i = 0; i < n; ++i) {
    out.c0 += part[i].c0;
    out.c1 += part[i].c1;
    out.c2 += part[i].c2;
  }
  return out;
}

double objective_impl(const DataBatch& b, double alpha,
                      const SaturationPattern& e, bool parallel) {
  if (static_cast<int>(e.e.size()) != b.rows())
    throw DimensionError("objective_J: pattern length mismatch");
  const int n = b.n();
  std::vector<double> part(n, 0.0);
  std::exception_ptr ep = nullptr;
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (int i = 0; i < n; ++i) {
    try {
      NodeRows nr = gather_node(b, e, i);
      BlockSolver solver(std::move(nr.A), -1, alpha);
      const Vec res = solver.project_out(nr.bp - alpha * nr.bx);
      part[i] = 0.5 * res.squaredNorm();
    } catch (...) {
#pragma omp critical(ltn_obj_err)
      if (!ep) ep = std::current_exception();
    }
  }
  if (ep) std::rethrow_exception(ep);
  double J = 0.0;
  for (int i = 0; i < n; ++i) J += part[i];
  return J;
}

// Smallest singular value of [X P] restricted to the pattern's interior
// rows, via the arrowhead Gram matrix. A proxy: squaring loses the bottom
// digits, which is acceptable for a reported diagnostic.
double lambda_min_proxy_of(const DataBatch& b, const SaturationPattern& e) {
  const int hd = b.h_dim();
  Mat G = Mat::Zero(1 + hd, 1 + hd);
  std::vector<double> buf(b.n() + b.m());
  for (int rr = 0; rr < b.rows(); ++rr) {
    if (e.e[rr] != 0) continue;
    const int i = b.node_of(rr);
    const int len = b.block_len(i);
    const int off = 1 + b.offsets()[i];
    b.fill_p_bar(rr, buf.data());
    const double x = b.X()[rr];
    G(0, 0) += x * x;
    for (int a = 0; a < len; ++a) {
      G(0, off + a) += x * buf[a];
      for (int c = 0; c <= a; ++c) G(off + a, off + c) += buf[a] * buf[c];
    }
  }
  G = G.selfadjointView<Eigen::Lower>();
  Eigen::SelfAdjointEigenSolver<Mat> eig(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, eig.eigenvalues()(0)));
}

Mat node_dale_rows(const DataBatch& b, const std::vector<int>& signs, int i) {
  const int n = b.n();
  const bool loop = !b.self_loop_mask().empty() && b.self_loop_mask()[i];
  std::vector<std::pair<int, double>> rows;
  int p = 0;
  for (int j = 0; j < n; ++j) {
    if (j == i && !loop) continue;
    if (signs[j] != 0) rows.emplace_back(p, -static_cast<double>(signs[j]));
    ++p;
  }
  Mat S = Mat::Zero(static_cast<int>(rows.size()), b.block_len(i));
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    S(r, rows[r].first) = rows[r].second;
  return S;
}

IdentResult identify_core(const DataBatch& batch, const SolveOptions& opts,
                          int algo) {
  if (!opts.dale_signs.empty() &&
      static_cast<int>(opts.dale_signs.size()) != batch.n())
    throw ConfigError("solve: dale_signs must have one entry per node");
  const double eps_class =
      algo == 2 ? (opts.eps_bar_override >= 0.0 ? opts.eps_bar_override
                                                : batch.eps_bar())
                : 0.0;

  Partition part = build_partition(batch, eps_class);
  const int L = part.num_segments();

  std::vector<SegmentCandidate> cands(2 * L);
  std::exception_ptr ep = nullptr;
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (int l = 0; l < L; ++l) {
    try {
      cands[l] = segment_minimize(batch, part.segment_patterns[l],
                                  part.psis[l], part.psis[l + 1], l);
    } catch (...) {
#pragma omp critical(ltn_drv_err)
      if (!ep) ep = std::current_exception();
    }
  }
  if (ep) std::rethrow_exception(ep);
#pragma omp parallel for schedule(dynamic) if (opts.parallel)
  for (int l = 1; l <= L; ++l) {
    try {
      const double a = part.psis[l];
      const double J =
          objective_impl(batch, a, part.boundary_patterns[l], false);
      cands[L + l - 1] = {a, std::max(J, 0.0), l, true};
    } catch (...) {
#pragma omp critical(ltn_drv_err2)
      if (!ep) ep = std::current_exception();
    }
  }
  if (ep) std::rethrow_exception(ep);

  // total order: smaller J, then smaller alpha, then boundary over segment
  int best = 0;
  for (int c = 1; c < static_cast<int>(cands.size()); ++c) {
    const auto& a = cands[c];
    const auto& w = cands[best];
    const bool better =
        a.J_cand != w.J_cand
            ? a.J_cand < w.J_cand
            : (a.alpha_cand != w.alpha_cand ? a.alpha_cand < w.alpha_cand
                                            : (a.is_boundary && !w.is_boundary));
    if (better) best = c;
  }
  const SegmentCandidate winner = cands[best];
  if (opts.candidates_out) *opts.candidates_out = cands;

  IdentResult res;
  res.alpha_hat = winner.alpha_cand;
  res.alpha_max = part.alpha_max;
  res.J_value = winner.J_cand;
  res.algorithm = algo;
  res.eps_bar = batch.eps_bar();

  const SaturationPattern pat = classify(batch, res.alpha_hat, eps_class);
  const Vec r = residual(batch, res.alpha_hat);

  // h block per node from the interior rows; algorithm 2 pins the sign law
  // through inequality-constrained least squares
  const int n = batch.n();
  res.h_hat.resize(batch.h_dim());
  for (int i = 0; i < n; ++i) {
    NodeRows nr = gather_node(batch, pat, i);
    Vec ri(nr.rows.size());
    for (int q = 0; q < static_cast<int>(nr.rows.size()); ++q)
      ri[q] = r[nr.rows[q]];
    Vec hi;
    if (algo == 2 && !opts.dale_signs.empty()) {
      const Mat S = node_dale_rows(batch, opts.dale_signs, i);
      hi = constrained_ls(-nr.A, ri, S).xi;
    } else {
      BlockSolver solver(nr.A, -1, res.alpha_hat);
      hi = solver.solve(ri);
    }
    res.h_hat.segment(batch.offsets()[i], batch.block_len(i)) = hi;
  }

  // slack of every active row, ascending row order
  res.v_hat.resize(pat.d);
  {
    std::vector<double> buf(batch.n() + batch.m());
    int q = 0;
    for (int rr = 0; rr < batch.rows(); ++rr) {
      if (pat.e[rr] == 0) continue;
      const int i = batch.node_of(rr);
      batch.fill_p_bar(rr, buf.data());
      double ph = 0.0;
      const double* hb = res.h_hat.data() + batch.offsets()[i];
      for (int a = 0; a < batch.block_len(i); ++a) ph += buf[a] * hb[a];
      res.v_hat[q++] = static_cast<double>(pat.e[rr]) * (ph - r[rr]);
    }
  }

  if (algo == 2) {
    double sum = 0.0;
    int cnt = 0;
    for (int rr = 0; rr < batch.rows(); ++rr)
      if (pat.e[rr] == 1) {
        sum += r[rr];
        ++cnt;
      }
    res.s_D_hat = cnt > 0 ? sum / cnt : r.maxCoeff();
  } else {
    res.s_D_hat = r.maxCoeff();
  }

  // the ceiling estimate is only a lower bound when no saturated row shows
  // strictly positive slack
  {
    const double tol = 1e-9 * std::max(1.0, std::abs(res.s_D_hat));
    bool any = false;
    int q = 0;
    for (int rr = 0; rr < batch.rows() && !any; ++rr) {
      if (pat.e[rr] == 0) continue;
      if (pat.e[rr] == 1 && res.v_hat[q] > tol) any = true;
      ++q;
    }
    res.s_D_lower_bound_only = !any;
  }

  unpack_h(res.h_hat, n, batch.m(), batch.self_loop_mask(), res.W_D_hat,
           res.B_D_hat);

  res.diag.num_critical_points = static_cast<int>(part.psis.size()) - 1;
  res.diag.segments_solved = L;
  res.diag.iterations = part.iterations;
  res.diag.num_distinct_E = static_cast<int>(enumerate_E(part).size());
  res.diag.lambda_min_proxy = lambda_min_proxy_of(batch, pat);
  return res;
}

}  // namespace

Projection projection_residual(const Mat& Q, const Vec& y) {
  if (Q.rows() != y.size())
    throw DimensionError("projection_residual: row count mismatch");
  Projection out;
  if (Q.cols() == 0) {
    out.xi = Vec(0);
    out.residual = y;
    out.sq_norm = y.squaredNorm();
    return out;
  }
  if (Q.rows() < Q.cols())
    throw RankDeficiencyError("projection_residual: fewer rows than columns",
                              -1, 0.0);
  Eigen::ColPivHouseholderQR<Mat> qr(Q);
  const Vec d = qr.matrixQR().diagonal().head(Q.cols()).cwiseAbs();
  if (d.minCoeff() <= 1e-8 * d.maxCoeff()) {
    Eigen::BDCSVD<Mat> svd(Q, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    if (sv(Q.cols() - 1) <= 1e-10 * sv(0))
      throw RankDeficiencyError("projection_residual: rank-deficient matrix",
                                -1, 0.0);
    out.xi = svd.solve(y);
  } else {
    out.xi = qr.solve(y);
  }
  out.residual = y - Q * out.xi;
  out.sq_norm = out.residual.squaredNorm();
  return out;
}

double objective_J(const DataBatch& batch, double alpha,
                   const SaturationPattern& e) {
  return objective_impl(batch, alpha, e, true);
}

double objective_J_serial(const DataBatch& batch, double alpha,
                          const SaturationPattern& e) {
  return objective_impl(batch, alpha, e, false);
}

SegmentCandidate segment_minimize(const DataBatch& batch,
                                  const SaturationPattern& e, double lo,
                                  double hi, int segment_index) {
  if (!(lo <= hi)) throw InternalError("segment_minimize: inverted interval");
  const ParabolaCoeffs c =
      segment_coeffs(batch, e, segment_index, 0.5 * (lo + hi), false);
  const double lo_eff = std::min(std::max(lo, 1e-12), hi);
  double a;
  if (c.c2 > 0.0) {
    a = std::clamp(-c.c1 / (2.0 * c.c2), lo_eff, hi);
  } else {
    a = lo_eff;  // flat objective on the segment: keep the left end
  }
  const double J = c.c0 + a * (c.c1 + a * c.c2);
  return {a, std::max(J, 0.0), segment_index, false};
}

IdentResult algorithm1(const DataBatch& batch, const SolveOptions& opts) {
  return identify_core(batch, opts, 1);
}

IdentResult algorithm2(const DataBatch& batch, const SolveOptions& opts) {
  return identify_core(batch, opts, 2);
}

double rmse_h(const Vec& h_hat, const Vec& h_star, int h_dim) {
  if (h_hat.size() != h_star.size())
    throw DimensionError("rmse_h: length mismatch");
  if (h_dim < 1) {
    if (h_hat.size() == 0) return 0.0;
    throw DimensionError("rmse_h: h_dim must be positive");
  }
  return std::sqrt((h_hat - h_star).norm() / static_cast<double>(h_dim));
}

double rmse_h(const Vec& h_hat, const Vec& h_star) {
  return rmse_h(h_hat, h_star, static_cast<int>(h_hat.size()));
}

}  // namespace ltn
