#pragma once

#include <string>

#include "ltn/batch.hpp"
#include "ltn/types.hpp"
#include "ltn/validation.hpp"

namespace ltn {

// All numeric text is written with %.17g and parsed with from_chars, so
// round-trips are bit exact and locale independent.
std::string fmt_g17(double v);
double parse_double(const std::string& s);

// samples.csv: header x_1..x_n,u_1..u_m,xplus_1..xplus_n, one sample per row.
void write_samples_csv(const std::string& path,
                       const std::vector<DataSample>& samples);
std::vector<DataSample> read_samples_csv(const std::string& path);

// model.json: n, m, alpha, s_D, W_D and B_D row-major, dale_signs,
// self_loop_mask, layout_version.
void write_model_json(const std::string& path, const LtnModel& model);
LtnModel read_model_json(const std::string& path);

// result.json: estimates, packed h_hat/v_hat, unpacked W/B, diagnostics.
void write_result_json(const std::string& path, const IdentResult& r, int n,
                       int m, int T_d,
                       const std::vector<char>& self_loop_mask);
IdentResult read_result_json(const std::string& path);

// trajectory.csv: t, x_1..x_n. reconstruction.csv adds recon_ columns.
void write_trajectory_csv(const std::string& path,
                          const std::vector<Vec>& states, double dt);

void write_assumption_report_json(const std::string& path,
                                  const AssumptionReport& rep);

// Generic small-table CSV writer: header row + rows of 17-digit numbers,
// cells already stringified by the caller where non numeric.
void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::vector<std::string>* hdr);

}  // namespace ltn
