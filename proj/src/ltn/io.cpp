#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ltn/io.hpp"
#include "ltn/version.hpp"

namespace ltn {

using nlohmann::json;

std::string fmt_g17(double v) {
  char buf[64];
  auto [p, ec] =
      std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  if (ec != std::errc())
    throw IoError("fmt_g17: formatting failed");
  return std::string(buf, p);
}

double parse_double(const std::string& s) {
  double v = 0.0;
  const char* b = s.data();
  const char* e = b + s.size();
  while (b < e && (*b == ' ' || *b == '\t')) ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  while (p < e && (*p == ' ' || *p == '\t' || *p == '\r')) ++p;
  if (ec != std::errc() || p != e)
    throw IoError("parse_double: invalid number '" + s + "'");
  return v;
}

namespace {

std::ofstream open_out(const std::string& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  return f;
}

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::size_t pos = 0;
  while (true) {
    const std::size_t c = line.find(',', pos);
    if (c == std::string::npos) {
      out.push_back(line.substr(pos));
      break;
    }
    out.push_back(line.substr(pos, c - pos));
    pos = c + 1;
  }
  if (!out.empty() && !out.back().empty() && out.back().back() == '\r')
    out.back().pop_back();
  return out;
}

json vec_to_json(const Vec& v) {
  json a = json::array();
  for (int i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vec vec_from_json(const json& a) {
  Vec v(static_cast<int>(a.size()));
  for (int i = 0; i < v.size(); ++i) v[i] = a.at(i).get<double>();
  return v;
}

json mat_to_json(const Mat& m) {  // row-major flat array
  json a = json::array();
  for (int r = 0; r < m.rows(); ++r)
    for (int c = 0; c < m.cols(); ++c) a.push_back(m(r, c));
  return a;
}

Mat mat_from_json(const json& a, int rows, int cols) {
  if (static_cast<int>(a.size()) != rows * cols)
    throw IoError("matrix field has wrong length");
  Mat m(rows, cols);
  int k = 0;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = a.at(k++).get<double>();
  return m;
}

json parse_json_file(const std::string& path) {
  try {
    return json::parse(slurp(path));
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void dump_json_file(const std::string& path, const json& j) {
  auto f = open_out(path);
  f << j.dump(2) << '\n';
}

}  // namespace

void write_samples_csv(const std::string& path,
                       const std::vector<DataSample>& samples) {
  if (samples.empty()) throw IoError("write_samples_csv: no samples");
  const int n = static_cast<int>(samples[0].x.size());
  const int m = static_cast<int>(samples[0].u.size());
  auto f = open_out(path);
  std::string line;
  for (int i = 0; i < n; ++i) line += "x_" + std::to_string(i + 1) + ",";
  for (int j = 0; j < m; ++j) line += "u_" + std::to_string(j + 1) + ",";
  for (int i = 0; i < n; ++i) {
    line += "xplus_" + std::to_string(i + 1);
    if (i + 1 < n) line += ",";
  }
  f << line << '\n';
  for (const auto& s : samples) {
    line.clear();
    for (int i = 0; i < n; ++i) line += fmt_g17(s.x[i]) + ",";
    for (int j = 0; j < m; ++j) line += fmt_g17(s.u[j]) + ",";
    for (int i = 0; i < n; ++i) {
      line += fmt_g17(s.x_plus[i]);
      if (i + 1 < n) line += ",";
    }
    f << line << '\n';
  }
}

std::vector<DataSample> read_samples_csv(const std::string& path) {
  std::vector<std::string> hdr;
  const auto rows = read_csv(path, &hdr);
  std::size_t k = 0;
  while (k < hdr.size() && hdr[k] == "x_" + std::to_string(k + 1)) ++k;
  const int n = static_cast<int>(k);
  while (k < hdr.size() && hdr[k] == "u_" + std::to_string(k - n + 1)) ++k;
  const int m = static_cast<int>(k) - n;
  std::vector<std::string> expect;
  for (int i = 0; i < n; ++i) expect.push_back("x_" + std::to_string(i + 1));
  for (int j = 0; j < m; ++j) expect.push_back("u_" + std::to_string(j + 1));
  for (int i = 0; i < n; ++i)
    expect.push_back("xplus_" + std::to_string(i + 1));
  if (n < 1 || hdr != expect)
    throw IoError(path + ": malformed samples header");

  std::vector<DataSample> out;
  out.reserve(rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto& row = rows[r];
    if (row.size() != std::size_t(2 * n + m))
      throw IoError(path + " row " + std::to_string(r + 2) + ": expected " +
                    std::to_string(2 * n + m) + " fields, got " +
                    std::to_string(row.size()));
    DataSample s;
    s.x = Vec(n);
    s.u = Vec(m);
    s.x_plus = Vec(n);
    try {
      for (int i = 0; i < n; ++i) s.x[i] = parse_double(row[i]);
      for (int j = 0; j < m; ++j) s.u[j] = parse_double(row[n + j]);
      for (int i = 0; i < n; ++i) s.x_plus[i] = parse_double(row[n + m + i]);
    } catch (const IoError& e) {
      throw IoError(path + " row " + std::to_string(r + 2) + ": " + e.what());
    }
    out.push_back(std::move(s));
  }
  if (out.empty()) throw IoError(path + ": no data rows");
  return out;
}

void write_model_json(const std::string& path, const LtnModel& model) {
  json j;
  j["n"] = model.n;
  j["m"] = model.m;
  j["alpha"] = model.alpha;
  j["s_D"] = model.s_D;
  j["W_D"] = mat_to_json(model.W_D);
  j["B_D"] = mat_to_json(model.B_D);
  j["dale_signs"] = model.dale_signs;
  json mask = json::array();
  for (char c : model.self_loop_mask) mask.push_back(c != 0);
  j["self_loop_mask"] = mask;
  j["layout_version"] = kLayoutVersion;
  dump_json_file(path, j);
}

LtnModel read_model_json(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    if (j.at("layout_version").get<int>() != kLayoutVersion)
      throw IoError(path + ": unsupported layout_version");
    LtnModel model;
    model.n = j.at("n").get<int>();
    model.m = j.at("m").get<int>();
    model.alpha = j.at("alpha").get<double>();
    model.s_D = j.at("s_D").get<double>();
    model.W_D = mat_from_json(j.at("W_D"), model.n, model.n);
    model.B_D = mat_from_json(j.at("B_D"), model.n, model.m);
    model.dale_signs = j.at("dale_signs").get<std::vector<int>>();
    model.self_loop_mask.clear();
    for (const auto& b : j.at("self_loop_mask"))
      model.self_loop_mask.push_back(b.get<bool>() ? 1 : 0);
    model.validate();
    return model;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_result_json(const std::string& path, const IdentResult& r, int n,
                       int m, int T_d,
                       const std::vector<char>& self_loop_mask) {
  json j;
  j["alpha_hat"] = r.alpha_hat;
  j["alpha_max"] = r.alpha_max;
  j["s_D_hat"] = r.s_D_hat;
  j["s_D_lower_bound_only"] = r.s_D_lower_bound_only;
  j["J_value"] = r.J_value;
  j["h_hat"] = vec_to_json(r.h_hat);
  j["v_hat"] = vec_to_json(r.v_hat);
  j["W_D_hat"] = mat_to_json(r.W_D_hat);
  j["B_D_hat"] = mat_to_json(r.B_D_hat);
  j["eps_bar"] = r.eps_bar;
  j["n"] = n;
  j["m"] = m;
  j["T_d"] = T_d;
  j["h_dim"] = static_cast<int>(r.h_hat.size());
  j["algorithm"] = r.algorithm;
  json mask = json::array();
  for (char c : self_loop_mask) mask.push_back(c != 0);
  j["self_loop_mask"] = mask;
  json d;
  d["num_critical_points"] = r.diag.num_critical_points;
  d["segments_solved"] = r.diag.segments_solved;
  d["iterations"] = r.diag.iterations;
  d["num_distinct_E"] = r.diag.num_distinct_E;
  d["lambda_min_proxy"] = r.diag.lambda_min_proxy;
  if (r.diag.rank_check_passed)
    d["rank_check_passed"] = *r.diag.rank_check_passed;
  else
    d["rank_check_passed"] = nullptr;
  j["diagnostics"] = d;
  j["layout_version"] = kLayoutVersion;
  j["tool_version"] = kVersion;
  dump_json_file(path, j);
}

IdentResult read_result_json(const std::string& path) {
  const json j = parse_json_file(path);
  try {
    if (j.at("layout_version").get<int>() != kLayoutVersion)
      throw IoError(path + ": unsupported layout_version");
    IdentResult r;
    r.alpha_hat = j.at("alpha_hat").get<double>();
    r.alpha_max = j.at("alpha_max").get<double>();
    r.s_D_hat = j.at("s_D_hat").get<double>();
    r.s_D_lower_bound_only = j.at("s_D_lower_bound_only").get<bool>();
    r.J_value = j.at("J_value").get<double>();
    r.h_hat = vec_from_json(j.at("h_hat"));
    r.v_hat = vec_from_json(j.at("v_hat"));
    const int n = j.at("n").get<int>();
    const int m = j.at("m").get<int>();
    r.W_D_hat = mat_from_json(j.at("W_D_hat"), n, n);
    r.B_D_hat = mat_from_json(j.at("B_D_hat"), n, m);
    r.eps_bar = j.at("eps_bar").get<double>();
    r.algorithm = j.at("algorithm").get<int>();
    const json& d = j.at("diagnostics");
    r.diag.num_critical_points = d.at("num_critical_points").get<int>();
    r.diag.segments_solved = d.at("segments_solved").get<int>();
    r.diag.iterations = d.at("iterations").get<int>();
    r.diag.num_distinct_E = d.at("num_distinct_E").get<int>();
    r.diag.lambda_min_proxy = d.at("lambda_min_proxy").get<double>();
    if (!d.at("rank_check_passed").is_null())
      r.diag.rank_check_passed = d.at("rank_check_passed").get<bool>();
    return r;
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void write_trajectory_csv(const std::string& path,
                          const std::vector<Vec>& states, double dt) {
  if (states.empty()) throw IoError("write_trajectory_csv: no states");
  const int n = static_cast<int>(states[0].size());
  auto f = open_out(path);
  std::string line = "t";
  for (int i = 0; i < n; ++i) line += ",x_" + std::to_string(i + 1);
  f << line << '\n';
  for (std::size_t k = 0; k < states.size(); ++k) {
    line = fmt_g17(static_cast<double>(k) * dt);
    for (int i = 0; i < n; ++i) line += "," + fmt_g17(states[k][i]);
    f << line << '\n';
  }
}

void write_assumption_report_json(const std::string& path,
                                  const AssumptionReport& rep) {
  json j;
  j["passed"] = rep.passed;
  j["num_E_matrices"] = rep.num_E_matrices;
  j["min_singular_value_seen"] = rep.min_singular_value_seen;
  if (rep.failing_pair)
    j["failing_pair"] = {rep.failing_pair->first, rep.failing_pair->second};
  else
    j["failing_pair"] = nullptr;
  j["sampled"] = rep.sampled;
  j["pairs_checked"] = rep.pairs_checked;
  dump_json_file(path, j);
}

void write_csv(const std::string& path,
               const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto f = open_out(path);
  std::string line;
  for (std::size_t i = 0; i < header.size(); ++i) {
    if (i) line += ",";
    line += header[i];
  }
  f << line << '\n';
  for (const auto& row : rows) {
    line.clear();
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) line += ",";
      line += row[i];
    }
    f << line << '\n';
  }
}

std::vector<std::vector<std::string>> read_csv(const std::string& path,
                                               std::vector<std::string>* hdr) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool first = true;
  while (std::getline(f, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto cells = split_line(line);
    if (first) {
      if (hdr) *hdr = std::move(cells);
      first = false;
      if (hdr) continue;
    }
    rows.push_back(std::move(cells));
  }
  if (first) throw IoError(path + ": empty file");
  return rows;
}

}  // namespace ltn
