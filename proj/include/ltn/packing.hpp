#pragma once

#include "ltn/types.hpp"

// Packing between matrix parameters (W_D, B_D) and the stacked vector h.
// h = col{h1, ..., hn} where hi is row i of [W_D B_D] with entry i removed,
// or kept in place when self_loop_mask[i] is set (layout_version 1).

namespace ltn {

// Per-node block lengths and offsets into h. offsets has n+1 entries;
// offsets[n] == h_dim.
std::vector<int> h_offsets(int n, int m, const std::vector<char>& self_loop_mask);
int h_dim(int n, int m, const std::vector<char>& self_loop_mask);

Vec pack_h(const Mat& W_D, const Mat& B_D, const std::vector<char>& self_loop_mask);

// Inverse of pack_h; masked-off diagonal entries come back as exact zeros.
void unpack_h(const Vec& h, int n, int m, const std::vector<char>& self_loop_mask,
              Mat& W_D, Mat& B_D);

// Rows of the Dale inequality matrix W_S: one row per W_D entry present in h
// whose column j carries a sign constraint; the row holds -sign(j) at that
// h position so that W_S * h <= 0 encodes the sign law. Zero-row matrix when
// every sign is unconstrained.
Mat dale_constraint_matrix(int n, int m, const std::vector<int>& dale_signs,
                           const std::vector<char>& self_loop_mask);

}  // namespace ltn
