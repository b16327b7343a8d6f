// Low-SNR mixture: EM needs ~sqrt(n) steps to reach the statistical radius,
// adaptive Polyak needs ~log n. Prints one line per sample size.

#include <cstdio>

#include "polyak_rates/harness.hpp"

using namespace polyak;

int main() {
  ExperimentConfig cfg = default_config(ModelKind::Gmm, Regime::LowSnr);
  cfg.seed = 1;
  cfg.methods = {Method::EmUnitStep, Method::AdaptivePolyak};
  std::printf("%8s %10s %10s %10s %10s\n", "n", "radius", "em_iters", "apgd_iters", "em_dist");
  for (std::size_t n : {1000u, 4000u, 16000u, 64000u}) {
    const auto rows = run_cell(cfg, n, 0);
    const double target = cfg.radius_factor * theory_radius(cfg.model, cfg.regime, n, cfg.d);
    auto iters = [](const SweepRow& r) { return r.iters_to_radius ? static_cast<long>(*r.iters_to_radius) : -1L; };
    std::printf("%8zu %10.4f %10ld %10ld %10.4f\n", n, target, iters(rows[0]), iters(rows[1]), rows[0].min_dist);
  }
}
