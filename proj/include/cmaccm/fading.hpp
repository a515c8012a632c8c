#pragma once

#include <cstdint>
#include <vector>

#include "cmaccm/allocator.hpp"
#include "cmaccm/types.hpp"

namespace cmaccm {

// Rayleigh fading scenario: squared gain magnitudes are independent
// exponentials with means sigma1 (user1->dest), sigma2 (user2->dest) and
// sigma3 (user1->user2).
struct RayleighSpec {
  double sigma1 = 1.0;
  double sigma2 = 1.0;
  double sigma3 = 1.0;
  double nu = 1.0;
  double mu = 1.0;
  int n_samples = 20000;
  std::uint64_t seed = 0;
};

void validate(const RayleighSpec& spec);

// Deterministic batch for a given spec: splitmix64 stream seeded with
// spec.seed, three draws per state in the order h1sq, h2sq, g1sq.
std::vector<FadingState> sample_states(const RayleighSpec& spec);

struct ErgodicBoundaryPoint {
  RatePair rates;     // sample-average rates at the optimized allocation
  double se_r0 = 0.0; // standard error of the mean over states
  double se_r1 = 0.0;
  SolveResult solve;
};

// One point of the ergodic boundary under the empirical state distribution:
// samples the batch, solves the sample-average budget problem, averages the
// per-state rates.
ErgodicBoundaryPoint ergodic_boundary_point(const RayleighSpec& spec,
                                            double gamma1, double p1,
                                            double p2,
                                            const SolverOptions& opt = {});

}  // namespace cmaccm
