#pragma once

#include <span>
#include <vector>

#include "cmaccm/types.hpp"

namespace cmaccm {

// Pieces of the closed-form allocation, exposed for diagnostics and for the
// branch-continuity tests.
//
//   s1       water level offset for the combined common-message power
//   s2       candidate confidential power from the secrecy stationarity root
//   phi      positive root of the crossing quadratic; splits user-1 power
//            between the messages when the secrecy branch is active
//   omega    price-side quantity compared against threshold_rhs
//   beta     lambda1 / lambda2
//
// s2 and phi are only defined on the secrecy branch and are NaN otherwise.
struct ClosedFormIntermediates {
  double s1 = 0.0;
  double s2 = 0.0;
  double phi = 0.0;
  double omega = 0.0;
  double beta = 0.0;
  double threshold_rhs = 0.0;
  bool secrecy_branch = false;  // true when b may be positive
};

ClosedFormIntermediates subchannel_intermediates(const Subchannel& sub,
                                                 double gamma1,
                                                 const MultiplierPair& mult);

// Per-link maximizer of r0 + gamma1*r1 - lambda1*(a+b) - lambda2*p2 for the
// parallel channel (half-log rates). Exact equality omega == threshold takes
// the no-secrecy branch.
PowerAllocation allocate_subchannel(const Subchannel& sub, double gamma1,
                                    const MultiplierPair& mult);

ClosedFormIntermediates fading_intermediates(const FadingState& state,
                                             double gamma1,
                                             const MultiplierPair& mult);

// Per-state closed form for the fading channel (full-log rates), implemented
// exactly as published. The per-state grid oracle cross-checks it; see
// check_closed_form_consistency in oracle.hpp for the discrepancy reporting.
// h1sq == h2sq == 0 returns the zero allocation.
PowerAllocation allocate_fading_state(const FadingState& state, double gamma1,
                                      const MultiplierPair& mult);

struct SolverOptions {
  double rel_tol = 1e-6;      // budget match, relative
  double abs_tol = 1e-9;      // budget match, absolute floor
  int max_iter = 200;         // per bisection level
  double bracket_lo = 1e-9;   // initial multiplier bracket
  double bracket_hi = 1e3;
  double lambda_floor = 1e-12;
  double lambda_ceil = 1e18;
};

struct SolveResult {
  MultiplierPair multipliers;
  std::vector<PowerAllocation> allocation;  // per subchannel / per state
  double power_used_1 = 0.0;  // sum over links, or sample average for states
  double power_used_2 = 0.0;
  double residual_1 = 0.0;    // signed, power_used - budget
  double residual_2 = 0.0;
  bool converged = false;
  // A budget that cannot be exhausted even as its price drops to the floor
  // (e.g. a zero budget) is held as <= and flagged here.
  bool degenerate_1 = false;
  bool degenerate_2 = false;
  int outer_iterations = 0;
};

// Nested bisection: the outer level prices user-1 power, the inner level
// re-solves the user-2 price for every probe. Brackets grow geometrically
// from [bracket_lo, bracket_hi] until the residual changes sign.
SolveResult solve_multipliers(const ParallelInstance& inst, double gamma1,
                              const SolverOptions& opt = {});

// Same search against sample-average budget constraints over a fixed state
// batch. Budgets p1/p2 are linear.
SolveResult solve_multipliers_empirical(std::span<const FadingState> states,
                                        double gamma1, double p1, double p2,
                                        const SolverOptions& opt = {});

}  // namespace cmaccm
