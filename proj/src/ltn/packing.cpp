#include "ltn/packing.hpp"

namespace ltn {
namespace {

bool has_loop(const std::vector<char>& mask, int i) {
  return !mask.empty() && mask[i];
}

}  // namespace

std::vector<int> h_offsets(int n, int m, const std::vector<char>& mask) {
  if (n <= 0 || m <= 0) throw DimensionError("h_offsets: n, m must be positive");
  if (!mask.empty() && static_cast<int>(mask.size()) != n)
    throw DimensionError("h_offsets: mask length mismatch");
  std::vector<int> off(n + 1, 0);
  for (int i = 0; i < n; ++i)
    off[i + 1] = off[i] + (n - 1 + m) + (has_loop(mask, i) ? 1 : 0);
  return off;
}

int h_dim(int n, int m, const std::vector<char>& mask) {
  return h_offsets(n, m, mask).back();
}

Vec pack_h(const Mat& W_D, const Mat& B_D, const std::vector<char>& mask) {
  const int n = static_cast<int>(W_D.rows());
  const int m = static_cast<int>(B_D.cols());
  if (W_D.cols() != n || B_D.rows() != n)
    throw DimensionError("pack_h: W_D must be n x n, B_D n x m");
  auto off = h_offsets(n, m, mask);
  Vec h(off.back());
  for (int i = 0; i < n; ++i) {
    int p = off[i];
    for (int j = 0; j < n; ++j) {
      if (j == i && !has_loop(mask, i)) continue;
      h[p++] = W_D(i, j);
    }
    for (int j = 0; j < m; ++j) h[p++] = B_D(i, j);
  }
  return h;
}

void unpack_h(const Vec& h, int n, int m, const std::vector<char>& mask,
              Mat& W_D, Mat& B_D) {
  auto off = h_offsets(n, m, mask);
  if (h.size() != off.back())
    throw DimensionError("unpack_h: h length does not match layout");
  W_D.setZero(n, n);
  B_D.setZero(n, m);
  for (int i = 0; i < n; ++i) {
    int p = off[i];
    for (int j = 0; j < n; ++j) {
      if (j == i && !has_loop(mask, i)) continue;
      W_D(i, j) = h[p++];
    }
    for (int j = 0; j < m; ++j) B_D(i, j) = h[p++];
  }
}

Mat dale_constraint_matrix(int n, int m, const std::vector<int>& dale_signs,
                           const std::vector<char>& mask) {
  auto off = h_offsets(n, m, mask);
  if (!dale_signs.empty() && static_cast<int>(dale_signs.size()) != n)
    throw DimensionError("dale_constraint_matrix: dale_signs length mismatch");
  std::vector<std::pair<int, double>> rows;  // (h position, -sign)
  for (int i = 0; i < n; ++i) {
    int p = off[i];
    for (int j = 0; j < n; ++j) {
      if (j == i && !has_loop(mask, i)) continue;
      int s = dale_signs.empty() ? 0 : dale_signs[j];
      if (s != 0) rows.emplace_back(p, -static_cast<double>(s));
      ++p;
    }
  }
  Mat S = Mat::Zero(static_cast<int>(rows.size()), off.back());
  for (int r = 0; r < static_cast<int>(rows.size()); ++r)
    S(r, rows[r].first) = rows[r].second;
  return S;
}

}  // namespace ltn
