#include "cmaccm/fading.hpp"

#include <cmath>
#include <stdexcept>

#include "cmaccm/rates.hpp"
#include "cmaccm/rng.hpp"
#include "cmaccm/util.hpp"

namespace cmaccm {

void validate(const RayleighSpec& spec) {
  const bool sigmas_ok = std::isfinite(spec.sigma1) && spec.sigma1 > 0.0 &&
                         std::isfinite(spec.sigma2) && spec.sigma2 > 0.0 &&
                         std::isfinite(spec.sigma3) && spec.sigma3 > 0.0;
  if (!sigmas_ok)
    throw std::invalid_argument("fading means must be finite and positive");
  if (!(std::isfinite(spec.nu) && spec.nu > 0.0 && std::isfinite(spec.mu) &&
        spec.mu > 0.0))
    throw std::invalid_argument("noise variances must be finite and positive");
  if (spec.n_samples < 1)
    throw std::invalid_argument("n_samples must be at least 1");
}

std::vector<FadingState> sample_states(const RayleighSpec& spec) {
  validate(spec);
  SplitMix64 rng(spec.seed);
  std::vector<FadingState> states;
  states.reserve(spec.n_samples);
  for (int i = 0; i < spec.n_samples; ++i) {
    FadingState st;
    // inverse CDF of the exponential; log1p keeps u ~ 0 exact
    st.h1sq = -spec.sigma1 * std::log1p(-rng.next_unit());
    st.h2sq = -spec.sigma2 * std::log1p(-rng.next_unit());
    st.g1sq = -spec.sigma3 * std::log1p(-rng.next_unit());
    st.nu = spec.nu;
    st.mu = spec.mu;
    states.push_back(st);
  }
  return states;
}

ErgodicBoundaryPoint ergodic_boundary_point(const RayleighSpec& spec,
                                            double gamma1, double p1,
                                            double p2,
                                            const SolverOptions& opt) {
  const std::vector<FadingState> states = sample_states(spec);
  ErgodicBoundaryPoint out;
  out.solve = solve_multipliers_empirical(states, gamma1, p1, p2, opt);

  const std::size_t n = states.size();
  std::vector<RatePair> contrib(n);
  parallel_for(n, [&](std::size_t i) {
    contrib[i] = rate_contribution_fading(states[i], out.solve.allocation[i]);
  });

  double sum0 = 0.0, sum1 = 0.0;
  for (const RatePair& r : contrib) {
    sum0 += r.r0;
    sum1 += r.r1;
  }
  const double inv_n = 1.0 / static_cast<double>(n);
  out.rates.r0 = sum0 * inv_n;
  out.rates.r1 = sum1 * inv_n;

  if (n > 1) {
    double var0 = 0.0, var1 = 0.0;
    for (const RatePair& r : contrib) {
      var0 += (r.r0 - out.rates.r0) * (r.r0 - out.rates.r0);
      var1 += (r.r1 - out.rates.r1) * (r.r1 - out.rates.r1);
    }
    const double scale = 1.0 / (static_cast<double>(n) - 1.0);
    out.se_r0 = std::sqrt(var0 * scale * inv_n);
    out.se_r1 = std::sqrt(var1 * scale * inv_n);
  }
  return out;
}

}  // namespace cmaccm
