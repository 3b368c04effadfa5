#include <omp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ltn/batch.hpp"
#include "ltn/cli.hpp"
#include "ltn/io.hpp"
#include "ltn/packing.hpp"
#include "ltn/partition.hpp"
#include "ltn/rng.hpp"
#include "ltn/simulate.hpp"
#include "ltn/solver.hpp"
#include "ltn/validation.hpp"
#include "ltn/version.hpp"

namespace ltn {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using Clock = std::chrono::steady_clock;

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double ms_since(Clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

const char* error_name(const LtnError& e) {
  if (dynamic_cast<const DimensionError*>(&e)) return "DimensionError";
  if (dynamic_cast<const ConfigError*>(&e)) return "ConfigError";
  if (dynamic_cast<const DataError*>(&e)) return "DataError";
  if (dynamic_cast<const RankDeficiencyError*>(&e)) return "RankDeficiencyError";
  if (dynamic_cast<const SolverError*>(&e)) return "SolverError";
  if (dynamic_cast<const InternalError*>(&e)) return "InternalError";
  if (dynamic_cast<const IoError*>(&e)) return "IoError";
  return "LtnError";
}

std::vector<std::string> split_names(const std::string& s) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : s) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != ' ') {
      cur += c;
    }
  }
  if (!cur.empty() || !out.empty()) out.push_back(cur);
  while (!out.empty() && out.back().empty()) out.pop_back();
  return out;
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  for (const auto& tok : split_names(s)) {
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      out.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("not an integer: '" + tok + "'");
    }
  }
  return out;
}

std::vector<double> parse_double_list(const std::string& s) {
  std::vector<double> out;
  for (const auto& tok : split_names(s)) out.push_back(parse_double(tok));
  return out;
}

std::vector<char> parse_self_loops(const std::string& spec, int n) {
  if (spec.empty() || spec == "none") return std::vector<char>(n, 0);
  if (spec == "all") return std::vector<char>(n, 1);
  std::vector<char> mask(n, 0);
  for (int idx : parse_int_list(spec)) {
    if (idx < 1 || idx > n)
      throw ConfigError("self-loop node index out of range: " +
                        std::to_string(idx));
    mask[idx - 1] = 1;
  }
  return mask;
}

std::vector<int> default_dale(int n) {
  const int exc = (4 * n + 4) / 5;  // ceil(0.8 n) excitatory, rest inhibitory
  std::vector<int> signs(n, -1);
  for (int i = 0; i < std::min(exc, n); ++i) signs[i] = 1;
  return signs;
}

json parse_json_file(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open: " + path);
  try {
    return json::parse(f);
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
}

void dump_json_file(const std::string& path, const json& j) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  f << j.dump(2) << '\n';
}

GenerationConfig load_gen_config(const std::string& path) {
  const json j = parse_json_file(path);
  GenerationConfig cfg;
  static const std::vector<std::string> known = {
      "n",        "m",        "T_d",      "x_lo",       "x_hi",
      "u_lo",     "u_hi",     "w_exc_lo", "w_exc_hi",   "w_inh_lo",
      "w_inh_hi", "b_lo",     "b_hi",     "alpha_star", "s_D_star",
      "rng_seed", "dale_signs", "self_loop_mask"};
  for (const auto& [key, val] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw ConfigError(path + ": unknown config key '" + key + "'");
    (void)val;
  }
  try {
    cfg.n = j.value("n", cfg.n);
    cfg.m = j.value("m", cfg.m);
    cfg.T_d = j.value("T_d", cfg.T_d);
    cfg.x_lo = j.value("x_lo", cfg.x_lo);
    cfg.x_hi = j.value("x_hi", cfg.x_hi);
    cfg.u_lo = j.value("u_lo", cfg.u_lo);
    cfg.u_hi = j.value("u_hi", cfg.u_hi);
    cfg.w_exc_lo = j.value("w_exc_lo", cfg.w_exc_lo);
    cfg.w_exc_hi = j.value("w_exc_hi", cfg.w_exc_hi);
    cfg.w_inh_lo = j.value("w_inh_lo", cfg.w_inh_lo);
    cfg.w_inh_hi = j.value("w_inh_hi", cfg.w_inh_hi);
    cfg.b_lo = j.value("b_lo", cfg.b_lo);
    cfg.b_hi = j.value("b_hi", cfg.b_hi);
    cfg.alpha_star = j.value("alpha_star", cfg.alpha_star);
    cfg.s_D_star = j.value("s_D_star", cfg.s_D_star);
    cfg.rng_seed = j.value("rng_seed", cfg.rng_seed);
    if (j.contains("dale_signs"))
      cfg.dale_signs = j.at("dale_signs").get<std::vector<int>>();
    if (j.contains("self_loop_mask")) {
      cfg.self_loop_mask.clear();
      for (const auto& b : j.at("self_loop_mask"))
        cfg.self_loop_mask.push_back(b.get<bool>() ? 1 : 0);
    }
  } catch (const json::exception& e) {
    throw IoError(path + ": " + e.what());
  }
  return cfg;
}

struct Ctx {
  std::uint64_t seed = 1;
  int threads = 0;
  std::string outdir = ".";

  std::string path(const std::string& name) const {
    return (fs::path(outdir) / name).string();
  }
};

void write_error_json(const Ctx& ctx, const std::string& kind,
                      const std::string& msg) {
  json j;
  j["error"] = kind;
  j["message"] = msg;
  j["tool_version"] = kVersion;
  dump_json_file(ctx.path("error.json"), j);
}

void write_run_record(const Ctx& ctx, const std::string& command,
                      const json& options, const json& timings,
                      const json& extra = json::object()) {
  json j;
  j["command"] = command;
  j["options"] = options;
  j["rng_seed"] = ctx.seed;
  j["threads"] = ctx.threads;
  j["output_dir"] = ctx.outdir;
  j["timings_ms"] = timings;
  j["tool_version"] = kVersion;
  for (const auto& [k, v] : extra.items()) j[k] = v;
  dump_json_file(ctx.path("run_record.json"), j);
}

std::vector<char> normalized_mask(const LtnModel& model) {
  if (!model.self_loop_mask.empty()) return model.self_loop_mask;
  return std::vector<char>(model.n, 0);
}

// ------------------------------------------------------------- landscape --

void write_landscape_svg(const std::string& path,
                         const std::vector<std::pair<double, double>>& grid,
                         double alpha_hat, double j_hat) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open for writing: " + path);
  const double W = 800, H = 420, L = 60, R = 20, T = 20, B = 40;
  double amax = alpha_hat, jmax = j_hat;
  for (const auto& [a, jv] : grid) {
    amax = std::max(amax, a);
    jmax = std::max(jmax, jv);
  }
  amax = std::max(amax, 1e-300);
  jmax = std::max(jmax, 1e-300);
  const auto px = [&](double a) { return L + (W - L - R) * a / amax; };
  const auto py = [&](double jv) { return H - B - (H - T - B) * jv / jmax; };
  f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W
    << "\" height=\"" << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n";
  f << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  f << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R
    << "\" y2=\"" << H - B << "\" stroke=\"#888\"/>\n";
  f << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\""
    << H - B << "\" stroke=\"#888\"/>\n";
  if (!grid.empty()) {
    f << "<polyline fill=\"none\" stroke=\"#36c\" stroke-width=\"1\" points=\"";
    char buf[64];
    for (const auto& [a, jv] : grid) {
      std::snprintf(buf, sizeof buf, "%.2f,%.2f ", px(a), py(jv));
      f << buf;
    }
    f << "\"/>\n";
  }
  f << "<circle cx=\"" << px(alpha_hat) << "\" cy=\"" << py(j_hat)
    << "\" r=\"4\" fill=\"#c33\"/>\n";
  f << "<text x=\"" << (W / 2) << "\" y=\"" << (H - 8)
    << "\" font-size=\"13\" text-anchor=\"middle\">alpha</text>\n";
  f << "<text x=\"14\" y=\"" << (H / 2)
    << "\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 14 "
    << (H / 2) << ")\">J</text>\n";
  f << "</svg>\n";
}

void write_landscape(const Ctx& ctx, const DataBatch& batch, double eps_class,
                     int grid_points,
                     const std::vector<SegmentCandidate>& cands,
                     double alpha_hat, double j_hat) {
  const double amax = alpha_max(batch);
  std::vector<std::vector<std::string>> rows;
  std::vector<std::pair<double, double>> grid;
  for (int j = 1; j <= grid_points; ++j) {
    const double a = amax * j / grid_points;
    const SaturationPattern pat = classify(batch, a, eps_class);
    double val;
    try {
      val = objective_J(batch, a, pat);
    } catch (const RankDeficiencyError&) {
      continue;
    }
    grid.emplace_back(a, val);
    rows.push_back({fmt_g17(a), fmt_g17(val), "grid"});
  }
  for (const auto& c : cands)
    rows.push_back({fmt_g17(c.alpha_cand), fmt_g17(c.J_cand),
                    c.is_boundary ? "boundary" : "segment"});
  write_csv(ctx.path("landscape.csv"), {"alpha", "J", "kind"}, rows);
  write_landscape_svg(ctx.path("landscape.svg"), grid, alpha_hat, j_hat);
}

// ---------------------------------------------------------------- generate --

struct GenArgs {
  std::string config;
  int n = -1, m = -1, T_d = -1;
  double alpha_star = kNan, s_d = kNan, eps_bar = 0.0;
  std::string dale, self_loops;
};

int cmd_generate(const Ctx& ctx, const GenArgs& a) {
  auto t0 = Clock::now();
  GenerationConfig cfg;
  if (!a.config.empty()) cfg = load_gen_config(a.config);
  if (a.n > 0) cfg.n = a.n;
  if (a.m > 0) cfg.m = a.m;
  if (a.T_d > 0) cfg.T_d = a.T_d;
  if (!std::isnan(a.alpha_star)) cfg.alpha_star = a.alpha_star;
  if (!std::isnan(a.s_d)) cfg.s_D_star = a.s_d;
  if (!a.dale.empty()) cfg.dale_signs = parse_int_list(a.dale);
  if (!a.self_loops.empty())
    cfg.self_loop_mask = parse_self_loops(a.self_loops, cfg.n);
  if (cfg.dale_signs.empty()) cfg.dale_signs = default_dale(cfg.n);
  cfg.rng_seed = ctx.seed;
  cfg.validate();
  if (!(std::isfinite(a.eps_bar)) || a.eps_bar < 0.0)
    throw ConfigError("--eps-bar must be a finite nonnegative number");

  SyntheticData data = generate_synthetic(cfg);
  std::vector<DataSample> samples = data.samples;
  if (a.eps_bar > 0.0)
    samples = add_noise(samples, a.eps_bar, ctx.seed, rng::kNoiseBase);
  const double gen_ms = ms_since(t0);

  t0 = Clock::now();
  write_model_json(ctx.path("model.json"), data.model);
  write_samples_csv(ctx.path("samples.csv"), samples);
  const double write_ms = ms_since(t0);

  json opts;
  opts["config"] = a.config;
  opts["n"] = cfg.n;
  opts["m"] = cfg.m;
  opts["T_d"] = cfg.T_d;
  opts["alpha_star"] = cfg.alpha_star;
  opts["s_D_star"] = cfg.s_D_star;
  opts["eps_bar"] = a.eps_bar;
  opts["dale_signs"] = cfg.dale_signs;
  write_run_record(ctx, "generate", opts,
                   {{"generate", gen_ms}, {"write", write_ms}});
  std::printf("wrote model.json and samples.csv  (n=%d m=%d T_d=%d eps_bar=%g)\n",
              cfg.n, cfg.m, cfg.T_d, a.eps_bar);
  return 0;
}

// ---------------------------------------------------------------- identify --

struct IdArgs {
  std::string samples, model, dale, self_loops, validate_mode = "none";
  double eps_bar = 0.0;
  int algorithm = 0;  // 0 = auto
  bool sampled = false;
  int grid_points = 2000;
  int max_pairs = 2000;
};

int cmd_identify(const Ctx& ctx, const IdArgs& a) {
  if (a.validate_mode != "none" && a.validate_mode != "check" &&
      a.validate_mode != "strict")
    throw ConfigError("--validate must be none, check or strict");
  if (!(std::isfinite(a.eps_bar)) || a.eps_bar < 0.0)
    throw ConfigError("--eps-bar must be a finite nonnegative number");
  if (a.grid_points < 1) throw ConfigError("--grid-points must be >= 1");

  auto t0 = Clock::now();
  const auto samples = read_samples_csv(a.samples);
  const int n = static_cast<int>(samples[0].x.size());
  const int m = static_cast<int>(samples[0].u.size());
  const auto mask = parse_self_loops(a.self_loops, n);
  const DataBatch batch = DataBatch::build(samples, a.eps_bar, mask);
  const double load_ms = ms_since(t0);

  const int algo = a.algorithm ? a.algorithm : (a.eps_bar > 0.0 ? 2 : 1);
  if (algo != 1 && algo != 2) throw ConfigError("--algorithm must be 1 or 2");
  SolveOptions sopts;
  if (!a.dale.empty()) sopts.dale_signs = parse_int_list(a.dale);
  std::vector<SegmentCandidate> cands;
  sopts.candidates_out = &cands;

  t0 = Clock::now();
  IdentResult res =
      algo == 1 ? algorithm1(batch, sopts) : algorithm2(batch, sopts);
  const double solve_ms = ms_since(t0);

  t0 = Clock::now();
  AssumptionReport rep;
  if (a.validate_mode != "none") {
    AssumptionOptions vo;
    vo.sampled = a.sampled;
    vo.max_pairs = a.max_pairs;
    vo.seed = ctx.seed;
    rep = check_assumption1(batch, vo);
    res.diag.rank_check_passed = rep.passed;
    write_assumption_report_json(ctx.path("assumption_report.json"), rep);
  }
  const double validate_ms = ms_since(t0);

  t0 = Clock::now();
  const double eps_class = algo == 2 ? batch.eps_bar() : 0.0;
  write_landscape(ctx, batch, eps_class, a.grid_points, cands, res.alpha_hat,
                  res.J_value);
  write_result_json(ctx.path("result.json"), res, n, m, batch.T_d(), mask);

  json extra;
  if (!a.model.empty()) {
    const LtnModel truth = read_model_json(a.model);
    if (truth.n != n || truth.m != m)
      throw ConfigError("truth model dimensions do not match the samples");
    if (normalized_mask(truth) != mask)
      throw ConfigError("--self-loops does not match the truth model mask");
    const Vec h_star = pack_h(truth.W_D, truth.B_D, mask);
    json t;
    t["alpha_err"] = std::abs(res.alpha_hat - truth.alpha);
    t["rmse_h"] = rmse_h(res.h_hat, h_star);
    t["s_D_err"] = std::abs(res.s_D_hat - truth.s_D);
    extra["truth"] = t;
    std::printf("vs truth: alpha_err=%.10g rmse_h=%.10g s_D_err=%.10g\n",
                t["alpha_err"].get<double>(), t["rmse_h"].get<double>(),
                t["s_D_err"].get<double>());
  }
  extra["result"] = parse_json_file(ctx.path("result.json"));
  const double write_ms = ms_since(t0);

  json opts;
  opts["samples"] = a.samples;
  opts["eps_bar"] = a.eps_bar;
  opts["algorithm"] = algo;
  opts["validate"] = a.validate_mode;
  opts["grid_points"] = a.grid_points;
  write_run_record(ctx, "identify", opts,
                   {{"load", load_ms},
                    {"solve", solve_ms},
                    {"validate", validate_ms},
                    {"write", write_ms}},
                   extra);

  if (res.diag.lambda_min_proxy < 1e-8)
    std::fprintf(stderr,
                 "warning: smallest singular value at alpha_hat is %.3g; the "
                 "recovered weights may be poorly determined\n",
                 res.diag.lambda_min_proxy);
  std::printf(
      "algorithm %d: alpha_hat=%.10g J=%.10g s_D_hat=%.10g%s psi=%d (%.1f ms)\n",
      algo, res.alpha_hat, res.J_value, res.s_D_hat,
      res.s_D_lower_bound_only ? " (lower bound)" : "",
      res.diag.num_critical_points, solve_ms);
  if (a.validate_mode != "none") {
    std::printf("assumption check: %s (%d patterns, %d pairs, min sigma %.3g)\n",
                rep.passed ? "passed" : "FAILED", rep.num_E_matrices,
                rep.pairs_checked, rep.min_singular_value_seen);
    if (a.validate_mode == "strict" && !rep.passed) return 2;
  }
  return 0;
}

// -------------------------------------------------------------- noise-sweep --

struct SweepArgs {
  std::string config, samples, model, eps_list;
  int trials = 1;
};

struct Hinges {
  double q1 = kNan, med = kNan, q3 = kNan;
};

Hinges tukey_hinges(std::vector<double> v) {
  Hinges h;
  if (v.empty()) return h;
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size();
  const auto med = [&](std::size_t lo, std::size_t hi) {
    const std::size_t c = hi - lo;
    return c % 2 ? v[lo + c / 2] : 0.5 * (v[lo + c / 2 - 1] + v[lo + c / 2]);
  };
  const std::size_t half = (k + 1) / 2;  // odd count: middle sits in both halves
  h.med = med(0, k);
  h.q1 = med(0, half);
  h.q3 = med(k - half, k);
  return h;
}

int cmd_noise_sweep(const Ctx& ctx, const SweepArgs& a) {
  const bool from_config = !a.config.empty();
  const bool from_files = !a.samples.empty() || !a.model.empty();
  if (from_config == from_files)
    throw ConfigError(
        "provide either --config or both --samples and --model, not both");
  if (from_files && (a.samples.empty() || a.model.empty()))
    throw ConfigError("--samples and --model must be given together");
  if (a.trials < 0) throw ConfigError("--trials must be >= 0");
  const auto epss = parse_double_list(a.eps_list);
  if (epss.empty()) throw ConfigError("--eps-list is empty");
  for (double e : epss)
    if (!std::isfinite(e) || e < 0.0)
      throw ConfigError("--eps-list entries must be finite and >= 0");

  auto t0 = Clock::now();
  LtnModel model;
  std::vector<DataSample> clean;
  if (from_config) {
    GenerationConfig cfg = load_gen_config(a.config);
    if (cfg.dale_signs.empty()) cfg.dale_signs = default_dale(cfg.n);
    cfg.rng_seed = ctx.seed;
    cfg.validate();
    SyntheticData data = generate_synthetic(cfg);
    model = std::move(data.model);
    clean = std::move(data.samples);
  } else {
    model = read_model_json(a.model);
    clean = read_samples_csv(a.samples);
    if (static_cast<int>(clean[0].x.size()) != model.n ||
        static_cast<int>(clean[0].u.size()) != model.m)
      throw ConfigError("samples do not match the model dimensions");
  }
  const auto mask = normalized_mask(model);
  const Vec h_star = pack_h(model.W_D, model.B_D, mask);
  const double setup_ms = ms_since(t0);

  const std::vector<std::string> header = {
      "eps_bar", "trial", "algo",    "alpha_err", "rmse_h",
      "sD_err",  "J",     "num_psi", "wall_ms",   "status"};
  std::vector<std::vector<std::string>> rows;
  // per (eps index, algo, metric): ok-run values for the summary
  std::map<std::pair<int, int>, std::vector<std::vector<double>>> acc;

  t0 = Clock::now();
  for (int e_idx = 0; e_idx < static_cast<int>(epss.size()); ++e_idx) {
    const double eps = epss[e_idx];
    for (int trial = 0; trial < a.trials; ++trial) {
      const auto noisy = add_noise(
          clean, eps, ctx.seed,
          rng::kTrialBase + static_cast<std::uint64_t>(e_idx) * 4096 + trial);
      const DataBatch batch = DataBatch::build(noisy, eps, mask);
      for (int algo : {1, 2}) {
        SolveOptions so;
        if (algo == 2) so.dale_signs = model.dale_signs;
        const auto tw = Clock::now();
        double alpha_err = kNan, rmse = kNan, sd_err = kNan, jv = kNan;
        double psi = kNan;
        std::string status = "ok";
        try {
          const IdentResult res =
              algo == 1 ? algorithm1(batch, so) : algorithm2(batch, so);
          alpha_err = std::abs(res.alpha_hat - model.alpha);
          rmse = rmse_h(res.h_hat, h_star);
          sd_err = std::abs(res.s_D_hat - model.s_D);
          jv = res.J_value;
          psi = res.diag.num_critical_points;
        } catch (const LtnError& err) {
          status = error_name(err);
        }
        const double wall = ms_since(tw);
        rows.push_back({fmt_g17(eps), std::to_string(trial),
                        std::to_string(algo), fmt_g17(alpha_err),
                        fmt_g17(rmse), fmt_g17(sd_err), fmt_g17(jv),
                        fmt_g17(psi), fmt_g17(wall), status});
        if (status == "ok") {
          auto& lists = acc[{e_idx, algo}];
          lists.resize(6);
          const double vals[6] = {alpha_err, rmse, sd_err, jv, psi, wall};
          for (int q = 0; q < 6; ++q) lists[q].push_back(vals[q]);
        }
      }
    }
  }
  const double sweep_ms = ms_since(t0);
  write_csv(ctx.path("sweep.csv"), header, rows);

  static const char* metric_names[6] = {"alpha_err", "rmse_h", "sD_err",
                                        "J",         "num_psi", "wall_ms"};
  std::vector<std::vector<std::string>> srows;
  for (int e_idx = 0; e_idx < static_cast<int>(epss.size()); ++e_idx)
    for (int algo : {1, 2}) {
      const auto it = acc.find({e_idx, algo});
      for (int q = 0; q < 6; ++q) {
        const Hinges h = it == acc.end() ? Hinges{} : tukey_hinges(it->second[q]);
        srows.push_back({fmt_g17(epss[e_idx]), std::to_string(algo),
                         metric_names[q], fmt_g17(h.q1), fmt_g17(h.med),
                         fmt_g17(h.q3)});
      }
    }
  write_csv(ctx.path("sweep_summary.csv"),
            {"eps_bar", "algo", "metric", "q1", "median", "q3"}, srows);

  json opts;
  opts["config"] = a.config;
  opts["samples"] = a.samples;
  opts["model"] = a.model;
  opts["eps_list"] = epss;
  opts["trials"] = a.trials;
  write_run_record(ctx, "noise-sweep", opts,
                   {{"setup", setup_ms}, {"sweep", sweep_ms}});
  std::printf("wrote sweep.csv (%zu rows) and sweep_summary.csv (%.1f ms)\n",
              rows.size(), sweep_ms);
  return 0;
}

// -------------------------------------------------------------- reconstruct --

struct RecArgs {
  std::string rates, state_cols, input_cols, time_col, dale, self_loops;
  std::string aug = "time,impulse,const", normalize = "raw";
  double delta_t = kNan, eps_bar = 0.0;
};

int cmd_reconstruct(const Ctx& ctx, const RecArgs& a) {
  if (a.normalize != "raw" && a.normalize != "zscore")
    throw ConfigError("--normalize must be raw or zscore");
  if (!(std::isfinite(a.eps_bar)) || a.eps_bar < 0.0)
    throw ConfigError("--eps-bar must be a finite nonnegative number");

  auto t0 = Clock::now();
  std::vector<std::string> hdr;
  const auto cells = read_csv(a.rates, &hdr);
  if (cells.size() < 2)
    throw DataError(a.rates + ": need at least two rows of measurements");
  const auto col_of = [&](const std::string& name) {
    const auto it = std::find(hdr.begin(), hdr.end(), name);
    if (it == hdr.end())
      throw DataError(a.rates + ": column not found: " + name);
    return static_cast<int>(it - hdr.begin());
  };

  int tc;
  if (!a.time_col.empty())
    tc = col_of(a.time_col);
  else if (std::find(hdr.begin(), hdr.end(), "t") != hdr.end())
    tc = col_of("t");
  else
    tc = 0;

  std::vector<int> in_idx;
  for (const auto& name : split_names(a.input_cols)) in_idx.push_back(col_of(name));
  std::vector<int> st_idx;
  std::vector<std::string> st_names;
  if (!a.state_cols.empty()) {
    for (const auto& name : split_names(a.state_cols)) {
      const int c = col_of(name);
      if (c == tc) throw ConfigError("state column equals the time column");
      st_idx.push_back(c);
      st_names.push_back(name);
    }
  } else {
    for (int c = 0; c < static_cast<int>(hdr.size()); ++c) {
      if (c == tc) continue;
      if (std::find(in_idx.begin(), in_idx.end(), c) != in_idx.end()) continue;
      st_idx.push_back(c);
      st_names.push_back(hdr[c]);
    }
  }
  if (st_idx.empty()) throw DataError(a.rates + ": no state columns");
  for (int c : st_idx)
    if (std::find(in_idx.begin(), in_idx.end(), c) != in_idx.end())
      throw ConfigError("column is both state and input: " + hdr[c]);

  const int T_rows = static_cast<int>(cells.size());
  const int ns = static_cast<int>(st_idx.size());
  const int ni = static_cast<int>(in_idx.size());
  const auto cell = [&](int r, int c) {
    if (c >= static_cast<int>(cells[r].size()))
      throw IoError(a.rates + " row " + std::to_string(r + 2) +
                    ": too few fields");
    try {
      return parse_double(cells[r][c]);
    } catch (const IoError& e) {
      throw IoError(a.rates + " row " + std::to_string(r + 2) + ": " +
                    e.what());
    }
  };

  std::vector<double> tv(T_rows);
  for (int r = 0; r < T_rows; ++r) tv[r] = cell(r, tc);
  double dt = std::isnan(a.delta_t) ? tv[1] - tv[0] : a.delta_t;
  if (!(dt > 0.0) || !std::isfinite(dt))
    throw DataError("time step must be positive and finite");
  for (int r = 0; r + 1 < T_rows; ++r) {
    const double d = tv[r + 1] - tv[r];
    if (std::abs(d - dt) > 1e-6 * std::max(1.0, std::abs(dt))) {
      std::string msg = "non-uniform time grid (expected dt=" + fmt_g17(dt) +
                        "); measured intervals:";
      for (int q = 0; q < std::min(T_rows - 1, 8); ++q)
        msg += " " + fmt_g17(tv[q + 1] - tv[q]);
      throw DataError(msg);
    }
  }

  Mat states(T_rows, ns), ext(T_rows, std::max(ni, 0));
  for (int r = 0; r < T_rows; ++r) {
    for (int c = 0; c < ns; ++c) states(r, c) = cell(r, st_idx[c]);
    for (int c = 0; c < ni; ++c) ext(r, c) = cell(r, in_idx[c]);
  }

  std::vector<double> mu(ns, 0.0), sd(ns, 1.0);
  if (a.normalize == "zscore") {
    for (int c = 0; c < ns; ++c) {
      mu[c] = states.col(c).mean();
      const double var =
          (states.col(c).array() - mu[c]).square().sum() / T_rows;
      sd[c] = std::sqrt(var);
      if (!(sd[c] > 0.0))
        throw DataError("constant state column cannot be z-scored: " +
                        st_names[c]);
      states.col(c) = (states.col(c).array() - mu[c]) / sd[c];
    }
  }

  std::vector<std::string> aug;
  for (const auto& tok : split_names(a.aug)) {
    if (tok == "none") continue;
    if (tok != "time" && tok != "impulse" && tok != "const")
      throw ConfigError("--aug-inputs entries must be time, impulse or const");
    aug.push_back(tok);
  }
  const int mt = ni + static_cast<int>(aug.size());
  if (mt < 1)
    throw ConfigError("no input columns; add --input-columns or --aug-inputs");

  const auto input_row = [&](int r) {
    Vec u(mt);
    for (int c = 0; c < ni; ++c) u[c] = ext(r, c);
    int k = ni;
    for (const auto& tok : aug) {
      if (tok == "time") u[k] = tv[r];
      else if (tok == "impulse") u[k] = std::abs(tv[r]) <= 1e-12 ? 1.0 : 0.0;
      else u[k] = 1.0;
      ++k;
    }
    return u;
  };

  std::vector<DataSample> samples(T_rows - 1);
  std::vector<Vec> inputs(T_rows - 1);
  for (int r = 0; r + 1 < T_rows; ++r) {
    samples[r].x = states.row(r).transpose();
    samples[r].x_plus = states.row(r + 1).transpose();
    samples[r].u = input_row(r);
    inputs[r] = samples[r].u;
  }
  const auto mask = parse_self_loops(a.self_loops, ns);
  const double load_ms = ms_since(t0);

  t0 = Clock::now();
  const DataBatch batch = DataBatch::build(samples, a.eps_bar, mask);
  SolveOptions so;
  if (!a.dale.empty()) so.dale_signs = parse_int_list(a.dale);
  IdentResult res;
  try {
    res = algorithm2(batch, so);
  } catch (const RankDeficiencyError&) {
    const AssumptionReport rep = check_assumption1(batch);
    write_assumption_report_json(ctx.path("assumption_report.json"), rep);
    throw;
  }
  const double solve_ms = ms_since(t0);

  t0 = Clock::now();
  LtnModel mh;
  mh.n = ns;
  mh.m = mt;
  mh.alpha = res.alpha_hat;
  mh.s_D = res.s_D_hat;
  mh.W_D = res.W_D_hat;
  mh.B_D = res.B_D_hat;
  mh.self_loop_mask = mask;
  const auto recon = simulate_trajectory(mh, states.row(0).transpose(), inputs);

  std::vector<std::string> header = {"t"};
  for (const auto& nme : st_names) header.push_back("meas_" + nme);
  for (const auto& nme : st_names) header.push_back("recon_" + nme);
  std::vector<std::vector<std::string>> rows(T_rows);
  double mae = 0.0;
  for (int r = 0; r < T_rows; ++r) {
    rows[r].push_back(fmt_g17(tv[r]));
    for (int c = 0; c < ns; ++c)
      rows[r].push_back(fmt_g17(states(r, c) * sd[c] + mu[c]));
    for (int c = 0; c < ns; ++c) {
      const double v = recon[r][c] * sd[c] + mu[c];
      rows[r].push_back(fmt_g17(v));
      mae += std::abs(v - (states(r, c) * sd[c] + mu[c]));
    }
  }
  mae /= static_cast<double>(T_rows) * ns;
  write_csv(ctx.path("reconstruction.csv"), header, rows);
  write_result_json(ctx.path("result.json"), res, ns, mt, batch.T_d(), mask);
  const double write_ms = ms_since(t0);

  json opts;
  opts["rates"] = a.rates;
  opts["eps_bar"] = a.eps_bar;
  opts["normalize"] = a.normalize;
  opts["aug_inputs"] = aug;
  opts["delta_t"] = dt;
  json extra;
  extra["mae"] = mae;
  extra["result"] = parse_json_file(ctx.path("result.json"));
  write_run_record(
      ctx, "reconstruct", opts,
      {{"load", load_ms}, {"solve", solve_ms}, {"write", write_ms}}, extra);
  std::printf(
      "reconstructed %d states over %d steps: alpha_hat=%.10g mae=%.10g\n", ns,
      T_rows - 1, res.alpha_hat, mae);
  return 0;
}

// ----------------------------------------------------------------- validate --

struct ValArgs {
  std::string samples, self_loops;
  double eps_bar = 0.0, gamma = kNan;
  bool sampled = false, strict = false;
  int max_pairs = 2000;
};

int cmd_validate(const Ctx& ctx, const ValArgs& a) {
  if (!(std::isfinite(a.eps_bar)) || a.eps_bar < 0.0)
    throw ConfigError("--eps-bar must be a finite nonnegative number");
  auto t0 = Clock::now();
  const auto samples = read_samples_csv(a.samples);
  const int n = static_cast<int>(samples[0].x.size());
  const int m = static_cast<int>(samples[0].u.size());
  const auto mask = parse_self_loops(a.self_loops, n);
  const DataBatch batch = DataBatch::build(samples, a.eps_bar, mask);
  const double load_ms = ms_since(t0);

  t0 = Clock::now();
  AssumptionOptions vo;
  vo.sampled = a.sampled;
  vo.max_pairs = a.max_pairs;
  vo.seed = ctx.seed;
  const AssumptionReport rep = check_assumption1(batch, vo);
  const double check_ms = ms_since(t0);

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
  if (!std::isnan(a.gamma)) {
    const auto [s1, s2] = estimate_sigmas(samples, a.gamma);
    j["gamma"] = a.gamma;
    j["sigma1_hat"] = s1;
    j["sigma2_hat"] = s2;
    j["rho_bound"] =
        (s1 > 0.0 && s2 > 0.0) ? prop2_bound(s1, s2, batch.T_d(), n, m) : 0.0;
  }
  dump_json_file(ctx.path("assumption_report.json"), j);

  json opts;
  opts["samples"] = a.samples;
  opts["eps_bar"] = a.eps_bar;
  opts["sampled"] = a.sampled;
  opts["max_pairs"] = a.max_pairs;
  write_run_record(ctx, "validate", opts,
                   {{"load", load_ms}, {"check", check_ms}});
  std::printf("assumption check: %s (%d patterns, %d pairs, min sigma %.3g)\n",
              rep.passed ? "passed" : "FAILED", rep.num_E_matrices,
              rep.pairs_checked, rep.min_singular_value_seen);
  return a.strict && !rep.passed ? 2 : 0;
}

// ----------------------------------------------------------------- simulate --

struct SimArgs {
  std::string model, x0, inputs;
  int steps = -1;
  double dt = 1.0;
};

int cmd_simulate(const Ctx& ctx, const SimArgs& a) {
  if (!(a.dt > 0.0) || !std::isfinite(a.dt))
    throw ConfigError("--dt must be positive");
  auto t0 = Clock::now();
  const LtnModel model = read_model_json(a.model);

  std::vector<Vec> inputs;
  if (!a.inputs.empty()) {
    std::vector<std::string> hdr;
    const auto cells = read_csv(a.inputs, &hdr);
    for (std::size_t r = 0; r < cells.size(); ++r) {
      if (static_cast<int>(cells[r].size()) != model.m)
        throw IoError(a.inputs + " row " + std::to_string(r + 2) +
                      ": expected " + std::to_string(model.m) + " fields");
      Vec u(model.m);
      for (int c = 0; c < model.m; ++c) u[c] = parse_double(cells[r][c]);
      inputs.push_back(std::move(u));
    }
    if (a.steps >= 0 && a.steps != static_cast<int>(inputs.size()))
      throw ConfigError("--steps does not match the input file row count");
  } else {
    if (a.steps < 1) throw ConfigError("--steps must be >= 1 without --inputs");
    inputs.assign(a.steps, Vec::Zero(model.m));
  }

  Vec x0 = Vec::Zero(model.n);
  if (!a.x0.empty()) {
    const auto vals = parse_double_list(a.x0);
    if (static_cast<int>(vals.size()) != model.n)
      throw ConfigError("--x0 must have n = " + std::to_string(model.n) +
                        " entries");
    for (int i = 0; i < model.n; ++i) x0[i] = vals[i];
  }

  const auto states = simulate_trajectory(model, x0, inputs);
  write_trajectory_csv(ctx.path("trajectory.csv"), states, a.dt);
  const double total_ms = ms_since(t0);

  json opts;
  opts["model"] = a.model;
  opts["steps"] = static_cast<int>(inputs.size());
  opts["dt"] = a.dt;
  write_run_record(ctx, "simulate", opts, {{"total", total_ms}});
  std::printf("wrote trajectory.csv (%zu rows)\n", states.size());
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"identification of linear-threshold network dynamics", "ltn"};
  app.require_subcommand(1);

  Ctx ctx;
  app.add_option("--seed", ctx.seed, "base RNG seed")->capture_default_str();
  app.add_option("--threads", ctx.threads,
                 "worker thread count (0 = library default)")
      ->capture_default_str();
  app.add_option("--output-dir", ctx.outdir, "directory for output files")
      ->capture_default_str();

  GenArgs ga;
  auto* gen = app.add_subcommand("generate", "draw a model and sample it");
  gen->fallthrough();
  gen->add_option("--config", ga.config, "generation config JSON");
  gen->add_option("--n", ga.n, "node count");
  gen->add_option("--m", ga.m, "input count");
  gen->add_option("--T-d", ga.T_d, "sample count");
  gen->add_option("--alpha-star", ga.alpha_star, "true leak factor");
  gen->add_option("--s-d", ga.s_d, "true saturation ceiling");
  gen->add_option("--eps-bar", ga.eps_bar,
                  "add uniform noise of this magnitude to the samples");
  gen->add_option("--dale-signs", ga.dale, "per-node +1/-1 list");
  gen->add_option("--self-loops", ga.self_loops, "none, all, or node list");

  IdArgs ia;
  auto* ident = app.add_subcommand("identify", "fit a model to samples");
  ident->fallthrough();
  ident->add_option("--samples", ia.samples, "samples CSV")->required();
  ident->add_option("--eps-bar", ia.eps_bar, "noise magnitude bound");
  ident->add_option("--algorithm", ia.algorithm,
                    "1 (exact) or 2 (noise robust); default by eps-bar");
  ident->add_option("--dale-signs", ia.dale, "per-node +1/-1 list");
  ident->add_option("--self-loops", ia.self_loops, "none, all, or node list");
  ident->add_option("--validate", ia.validate_mode, "none, check or strict")
      ->capture_default_str();
  ident->add_flag("--sampled", ia.sampled, "subsample pattern pairs");
  ident->add_option("--max-pairs", ia.max_pairs, "pair budget when sampled")
      ->capture_default_str();
  ident->add_option("--grid-points", ia.grid_points, "landscape grid size")
      ->capture_default_str();
  ident->add_option("--model", ia.model, "truth model JSON for error report");

  SweepArgs sa;
  auto* sweep = app.add_subcommand(
      "noise-sweep", "compare both algorithms across noise levels");
  sweep->fallthrough();
  sweep->add_option("--config", sa.config, "generation config JSON");
  sweep->add_option("--samples", sa.samples, "clean samples CSV");
  sweep->add_option("--model", sa.model, "truth model JSON");
  sweep->add_option("--eps-list", sa.eps_list, "comma list of noise levels")
      ->required();
  sweep->add_option("--trials", sa.trials, "noise draws per level")
      ->capture_default_str();

  RecArgs ra;
  auto* rec = app.add_subcommand(
      "reconstruct", "identify from a rate table and resimulate");
  rec->fallthrough();
  rec->add_option("--rates", ra.rates, "measured rates CSV")->required();
  rec->add_option("--state-columns", ra.state_cols,
                  "state column names (default: all but time/inputs)");
  rec->add_option("--input-columns", ra.input_cols, "input column names");
  rec->add_option("--time-column", ra.time_col,
                  "time column (default t, else the first column)");
  rec->add_option("--delta-t", ra.delta_t, "expected sampling interval");
  rec->add_option("--aug-inputs", ra.aug,
                  "synthetic inputs: time, impulse, const")
      ->capture_default_str();
  rec->add_option("--eps-bar", ra.eps_bar, "noise magnitude bound");
  rec->add_option("--normalize", ra.normalize, "raw or zscore")
      ->capture_default_str();
  rec->add_option("--dale-signs", ra.dale, "per-node +1/-1 list");
  rec->add_option("--self-loops", ra.self_loops, "none, all, or node list");

  ValArgs va;
  auto* val = app.add_subcommand("validate", "rank condition check");
  val->fallthrough();
  val->add_option("--samples", va.samples, "samples CSV")->required();
  val->add_option("--eps-bar", va.eps_bar, "noise magnitude bound");
  val->add_flag("--sampled", va.sampled, "subsample pattern pairs");
  val->add_option("--max-pairs", va.max_pairs, "pair budget when sampled")
      ->capture_default_str();
  val->add_option("--gamma", va.gamma,
                  "margin for the sample-frequency bound fields");
  val->add_flag("--strict", va.strict, "exit 2 when the check fails");
  val->add_option("--self-loops", va.self_loops, "none, all, or node list");

  SimArgs ma;
  auto* sim = app.add_subcommand("simulate", "roll a model forward");
  sim->fallthrough();
  sim->add_option("--model", ma.model, "model JSON")->required();
  sim->add_option("--steps", ma.steps, "step count (zero inputs)");
  sim->add_option("--x0", ma.x0, "comma list initial state (default zeros)");
  sim->add_option("--inputs", ma.inputs, "input CSV, one row per step");
  sim->add_option("--dt", ma.dt, "time column spacing in trajectory.csv")
      ->capture_default_str();

  std::vector<std::string> full = {"ltn"};
  full.insert(full.end(), args.begin(), args.end());
  std::vector<const char*> argv;
  argv.reserve(full.size());
  for (const auto& s : full) argv.push_back(s.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  if (ctx.threads < 0) {
    std::fprintf(stderr, "error: --threads must be >= 0\n");
    return 1;
  }
  if (ctx.threads > 0) omp_set_num_threads(ctx.threads);

  try {
    fs::create_directories(ctx.outdir);
    if (gen->parsed()) return cmd_generate(ctx, ga);
    if (ident->parsed()) return cmd_identify(ctx, ia);
    if (sweep->parsed()) return cmd_noise_sweep(ctx, sa);
    if (rec->parsed()) return cmd_reconstruct(ctx, ra);
    if (val->parsed()) return cmd_validate(ctx, va);
    if (sim->parsed()) return cmd_simulate(ctx, ma);
    return 1;
  } catch (const LtnError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    try {
      write_error_json(ctx, error_name(e), e.what());
    } catch (const LtnError&) {
    }
    return 1;
  }
}

}  // namespace ltn
