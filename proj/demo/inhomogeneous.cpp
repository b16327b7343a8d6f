// Exact Polyak steps on f = theta1^2 + theta2^4 from a few starts. When theta1
// is tiny relative to theta2 the quadratic coordinate is repeatedly overshot.

#include <cstdio>

#include "polyak_rates/probe.hpp"

using namespace polyak;

int main() {
  for (const auto& [a, b] : {std::pair{1.0, 0.0}, {0.0, 1.0}, {0.5, 0.5}, {1e-6, 0.3}}) {
    ParamVector t0(2);
    t0 << a, b;
    const auto rep = inhomogeneous_demo(t0, 40);
    const auto& last = rep.trajectory.iterates.back();
    std::printf("start (%g, %g): stable %d, intermediate %d, unstable %d, theta1 sign flips %d, "
                "end (%.3g, %.3g)%s\n",
                a, b, rep.stable_steps, rep.intermediate_steps, rep.unstable_steps, rep.theta1_sign_flips, last[0],
                last[1], rep.instability_flag ? "  [unstable]" : "");
  }
}
