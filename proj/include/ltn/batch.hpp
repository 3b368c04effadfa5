#pragma once

#include "ltn/types.hpp"

namespace ltn {

// T_d samples stacked into X, X_plus (length n*T_d, sample-major: row k*n+i
// is node i of sample k) and the block matrix P (n*T_d rows, h_dim columns).
// Row k*n+i of P holds p_bar_i(k) inside node i's h block and zeros
// elsewhere, where p(k) = col{x(k), u(k)} and p_bar_i drops entry i unless
// the node has a self loop. P is kept sparse-by-blocks; dense realization is
// allowed for n*T_d <= 1e4.
class DataBatch {
 public:
  static DataBatch build(std::vector<DataSample> samples, double eps_bar,
                         std::vector<char> self_loop_mask);

  int n() const { return n_; }
  int m() const { return m_; }
  int T_d() const { return T_; }
  int rows() const { return n_ * T_; }
  int h_dim() const { return offsets_.back(); }
  double eps_bar() const { return eps_bar_; }
  const std::vector<char>& self_loop_mask() const { return mask_; }
  const std::vector<int>& offsets() const { return offsets_; }
  int block_len(int i) const { return offsets_[i + 1] - offsets_[i]; }
  const std::vector<DataSample>& samples() const { return samples_; }

  const Vec& X() const { return X_; }
  const Vec& X_plus() const { return X_plus_; }

  // Writes p_bar_i(k) for stacked row r = k*n+i into dst (length block_len(i)).
  void fill_p_bar(int row, double* dst) const;

  Mat P_dense() const;          // rows() x h_dim(), guard rows() <= 1e4
  Vec P_times(const Vec& h) const;

  // Node and sample of a stacked row.
  int node_of(int row) const { return row % n_; }
  int sample_of(int row) const { return row / n_; }

 private:
  int n_ = 0, m_ = 0, T_ = 0;
  double eps_bar_ = 0.0;
  std::vector<char> mask_;
  std::vector<int> offsets_;
  std::vector<DataSample> samples_;
  std::vector<Vec> p_;  // per sample: col{x, u}
  Vec X_, X_plus_;
};

}  // namespace ltn
