// Timing comparison between the serial reference kernels and the OpenMP
// ones on a freshly sampled identification problem. The two paths must agree
// bit for bit; this also reports how much the parallel path buys.
#include <omp.h>

#include <cstdio>
#include <cstdlib>
#include <vector>

#include "ltn/batch.hpp"
#include "ltn/partition.hpp"
#include "ltn/rng.hpp"
#include "ltn/simulate.hpp"
#include "ltn/solver.hpp"

using namespace ltn;

int main(int argc, char** argv) {
  int n = 10, m = 10, T_d = 250;
  double eps = 0.05;
  if (argc > 1) n = std::atoi(argv[1]);
  if (argc > 2) m = std::atoi(argv[2]);
  if (argc > 3) T_d = std::atoi(argv[3]);
  if (argc > 4) eps = std::atof(argv[4]);

  GenerationConfig cfg;
  cfg.n = n;
  cfg.m = m;
  cfg.T_d = T_d;
  cfg.dale_signs.assign(n, -1);
  for (int i = 0; i < (4 * n + 4) / 5 && i < n; ++i) cfg.dale_signs[i] = 1;
  cfg.rng_seed = 7;
  cfg.validate();
  SyntheticData data = generate_synthetic(cfg);
  const auto noisy = add_noise(data.samples, eps, 7, rng::kNoiseBase);
  const DataBatch batch = DataBatch::build(noisy, eps, cfg.self_loop_mask);

  std::printf("n=%d m=%d T_d=%d eps=%g threads=%d\n", n, m, T_d, eps,
              omp_get_max_threads());

  double t0 = omp_get_wtime();
  const Partition part = build_partition(batch, eps);
  std::printf("partition: %d segments in %.3f s\n", part.num_segments(),
              omp_get_wtime() - t0);

  const int probes = 200;
  std::vector<double> js(probes), jp(probes);
  t0 = omp_get_wtime();
  for (int k = 0; k < probes; ++k) {
    const double a = part.alpha_max * (k + 1) / probes;
    js[k] = objective_J_serial(batch, a, classify(batch, a, eps));
  }
  const double ts = omp_get_wtime() - t0;
  t0 = omp_get_wtime();
  for (int k = 0; k < probes; ++k) {
    const double a = part.alpha_max * (k + 1) / probes;
    jp[k] = objective_J(batch, a, classify(batch, a, eps));
  }
  const double tp = omp_get_wtime() - t0;
  bool same = true;
  for (int k = 0; k < probes; ++k) same = same && js[k] == jp[k];
  std::printf("objective x%d: serial %.3f s, parallel %.3f s (%.2fx), %s\n",
              probes, ts, tp, ts / tp,
              same ? "bitwise equal" : "MISMATCH");

  SolveOptions serial_opts;
  serial_opts.parallel = false;
  t0 = omp_get_wtime();
  const IdentResult rs = algorithm2(batch, serial_opts);
  const double as = omp_get_wtime() - t0;
  t0 = omp_get_wtime();
  const IdentResult rp = algorithm2(batch);
  const double ap = omp_get_wtime() - t0;
  std::printf("algorithm 2: serial %.3f s, parallel %.3f s (%.2fx), %s\n", as,
              ap, as / ap,
              rs.alpha_hat == rp.alpha_hat && rs.J_value == rp.J_value &&
                      (rs.h_hat.array() == rp.h_hat.array()).all()
                  ? "bitwise equal"
                  : "MISMATCH");
  return same && rs.alpha_hat == rp.alpha_hat ? 0 : 1;
}
