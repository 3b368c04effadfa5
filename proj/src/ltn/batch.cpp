#include "ltn/batch.hpp"

#include <cmath>

#include "ltn/packing.hpp"

namespace ltn {

DataBatch DataBatch::build(std::vector<DataSample> samples, double eps_bar,
                           std::vector<char> self_loop_mask) {
  if (samples.empty()) throw DataError("batch: no samples");
  if (!(eps_bar >= 0.0) || !std::isfinite(eps_bar))
    throw DataError("batch: eps_bar must be finite and >= 0");

  DataBatch b;
  b.n_ = static_cast<int>(samples[0].x.size());
  b.m_ = static_cast<int>(samples[0].u.size());
  b.T_ = static_cast<int>(samples.size());
  if (b.n_ <= 0 || b.m_ <= 0) throw DataError("batch: empty state or input");
  b.eps_bar_ = eps_bar;
  if (!self_loop_mask.empty() &&
      static_cast<int>(self_loop_mask.size()) != b.n_)
    throw DimensionError("batch: self_loop_mask length mismatch");
  b.mask_ = std::move(self_loop_mask);
  b.offsets_ = h_offsets(b.n_, b.m_, b.mask_);

  b.X_.resize(b.n_ * b.T_);
  b.X_plus_.resize(b.n_ * b.T_);
  b.p_.reserve(b.T_);
  for (int k = 0; k < b.T_; ++k) {
    const auto& s = samples[k];
    if (s.x.size() != b.n_ || s.x_plus.size() != b.n_ || s.u.size() != b.m_)
      throw DimensionError("batch: inconsistent sample dimensions");
    if (!s.x.allFinite() || !s.u.allFinite() || !s.x_plus.allFinite())
      throw DataError("batch: non-finite sample entries");
    if (eps_bar == 0.0 &&
        (s.x.minCoeff() < 0.0 || s.x_plus.minCoeff() < 0.0))
      throw DataError("batch: negative state in exact data");
    Vec p(b.n_ + b.m_);
    p << s.x, s.u;
    b.p_.push_back(std::move(p));
    b.X_.segment(k * b.n_, b.n_) = s.x;
    b.X_plus_.segment(k * b.n_, b.n_) = s.x_plus;
  }
  b.samples_ = std::move(samples);
  return b;
}

void DataBatch::fill_p_bar(int row, double* dst) const {
  const int i = node_of(row);
  const Vec& p = p_[sample_of(row)];
  const bool loop = !mask_.empty() && mask_[i];
  int q = 0;
  for (int j = 0; j < n_; ++j) {
    if (j == i && !loop) continue;
    dst[q++] = p[j];
  }
  for (int j = 0; j < m_; ++j) dst[q++] = p[n_ + j];
}

Mat DataBatch::P_dense() const {
  if (rows() > 10000)
    throw InternalError("P_dense: matrix too large to materialize");
  Mat P = Mat::Zero(rows(), h_dim());
  std::vector<double> buf(n_ + m_);
  for (int r = 0; r < rows(); ++r) {
    const int i = node_of(r);
    fill_p_bar(r, buf.data());
    P.block(r, offsets_[i], 1, block_len(i)) =
        Eigen::Map<Eigen::RowVectorXd>(buf.data(), block_len(i));
  }
  return P;
}

Vec DataBatch::P_times(const Vec& h) const {
  if (h.size() != h_dim()) throw DimensionError("P_times: h length mismatch");
  Vec out(rows());
  std::vector<double> buf(n_ + m_);
  for (int r = 0; r < rows(); ++r) {
    const int i = node_of(r);
    const int len = block_len(i);
    fill_p_bar(r, buf.data());
    double acc = 0.0;
    const double* hb = h.data() + offsets_[i];
    for (int q = 0; q < len; ++q) acc += buf[q] * hb[q];
    out[r] = acc;
  }
  return out;
}

}  // namespace ltn
