// Population losses with zero signal: Polyak contracts geometrically by
// 1 - 1/(2p), fixed-step GD only polynomially.

#include <cstdio>

#include "polyak_rates/models/glm.hpp"
#include "polyak_rates/optimizers.hpp"

using namespace polyak;

int main() {
  for (int p : {2, 3}) {
    GlmSpec spec;
    spec.p = p;
    const Oracle pop = glm_population_oracle(spec);
    ParamVector t0(2);
    t0 << 0.3, 0.4;

    PolyakConfig pc;
    pc.f_opt = *pop.optimum_value();
    pc.max_iters = 60;
    pc.value_tol = 0.0;  // the gap is exact here, so run every step
    pc.grad_floor = 1e-300;
    const auto polyak = polyak_gd(pop, t0, pc, ParamVector::Zero(2));

    FixedStepConfig fc;
    fc.eta = 0.1;
    fc.max_iters = 1000;
    const auto gd = fixed_step_gd(pop, t0, fc, ParamVector::Zero(2));

    std::printf("p=%d\n%6s %14s %14s\n", p, "t", "polyak", "fixed_gd");
    for (std::size_t t : {0u, 10u, 20u, 40u, 60u})
      std::printf("%6zu %14.3e %14.3e\n", t, (*polyak.distances)[std::min(t, polyak.size() - 1)],
                  (*gd.distances)[t]);
    std::printf("%6d %14s %14.3e\n", 1000, "", gd.distances->back());
  }
}
