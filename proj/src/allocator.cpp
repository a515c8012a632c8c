#include "cmaccm/allocator.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmaccm/rates.hpp"
#include "cmaccm/util.hpp"

namespace cmaccm {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

// Larger root of x^2 + p*x + q = 0. The allocation quadratics always have
// q < 0 on the branch that needs them, so the discriminant is positive up to
// rounding; tiny negatives are squashed, anything worse is a branch bug.
double larger_root(double p, double q) {
  double disc = p * p - 4.0 * q;
  if (disc < 0.0) {
    if (disc < -1e-12)
      throw std::logic_error("allocation quadratic has negative discriminant");
    disc = 0.0;
  }
  return 0.5 * (-p + std::sqrt(disc));
}

}  // namespace

ClosedFormIntermediates subchannel_intermediates(const Subchannel& sub,
                                                 double gamma1,
                                                 const MultiplierPair& mult) {
  validate(sub);
  validate_gamma1(gamma1);
  validate(mult);
  const double l1 = mult.lambda1;
  const double l2 = mult.lambda2;

  ClosedFormIntermediates im;
  im.beta = l1 / l2;
  im.s1 = (l1 + l2) / (2.0 * l1 * l2 * kLn2) - sub.nu;
  im.omega = 2.0 * kLn2 * l1 * l1 / (l1 + l2);
  im.threshold_rhs =
      (gamma1 * (sub.mu - sub.nu) - sub.mu) / (sub.mu * sub.nu);
  im.s2 = kNaN;
  im.phi = kNaN;
  im.secrecy_branch =
      classify(sub) == SetLabel::A && im.omega < im.threshold_rhs;
  if (im.secrecy_branch) {
    const double gap = sub.mu - sub.nu;  // > 0 on A
    im.s2 = 0.5 * (std::sqrt(gap * (gap + 2.0 * gamma1 / (l1 * kLn2))) -
                   (sub.mu + sub.nu));
    const double x = 1.0 / im.omega;
    const double d = gamma1 * gap - sub.mu;
    im.phi = larger_root(sub.mu + sub.nu + x, sub.mu * sub.nu - d * x);
  }
  return im;
}

PowerAllocation allocate_subchannel(const Subchannel& sub, double gamma1,
                                    const MultiplierPair& mult) {
  const ClosedFormIntermediates im =
      subchannel_intermediates(sub, gamma1, mult);
  const double l1 = mult.lambda1;
  const double l2 = mult.lambda2;
  const double sum = l1 + l2;
  const double ca = (l2 / sum) * (l2 / sum);
  const double cp = (l1 / sum) * (l1 / sum);

  PowerAllocation out;
  if (im.secrecy_branch) {
    out.b = pos(std::min(im.s2, im.phi));
    const double spend = pos(im.s1 - im.phi);
    out.a = ca * spend;
    out.p2 = cp * spend;
  } else {
    const double spend = pos(im.s1);
    out.a = ca * spend;
    out.p2 = cp * spend;
  }
  return out;
}

ClosedFormIntermediates fading_intermediates(const FadingState& state,
                                             double gamma1,
                                             const MultiplierPair& mult) {
  validate(state);
  validate_gamma1(gamma1);
  validate(mult);
  if (state.h1sq == 0.0 && state.h2sq == 0.0)
    throw std::invalid_argument(
        "fading intermediates undefined when both direct gains vanish");

  const double l1 = mult.lambda1;
  const double l2 = mult.lambda2;
  const double lam = l1 * state.h2sq + l2 * state.h1sq;

  ClosedFormIntermediates im;
  im.beta = l1 / l2;
  im.s1 = lam / (l1 * l2 * kLn2) - state.nu;
  im.omega = kLn2 * l1 * l1 * state.h2sq / lam;
  im.threshold_rhs =
      (gamma1 * (state.mu * state.h1sq - state.nu * state.g1sq) -
       state.mu * state.h1sq) /
      (state.mu * state.nu);
  im.s2 = kNaN;
  im.phi = kNaN;
  im.secrecy_branch = in_set_a(state) && im.omega < im.threshold_rhs;
  if (im.secrecy_branch) {
    // membership in A forces h1sq > 0
    const double n = state.nu / state.h1sq;
    const double m = state.g1sq > 0.0 ? state.mu / state.g1sq : kInf;

    if (std::isfinite(m)) {
      const double gap = m - n;  // > 0: the branch condition implies m > n
      im.s2 = 0.5 * (std::sqrt(gap * (gap + 2.0 * gamma1 / (l1 * kLn2))) -
                     (m + n));
    } else {
      im.s2 = gamma1 / (2.0 * l1 * kLn2) - n;
    }

    if (im.omega > 0.0 && std::isfinite(m)) {
      const double x = 1.0 / im.omega;
      const double d = gamma1 * (m - n) - m;
      im.phi = larger_root(m + n + x, m * n - d * x);
    } else if (im.omega > 0.0) {
      // silent eavesdropper limit of the crossing quadratic
      im.phi = (gamma1 - 1.0) / im.omega - n;
    } else if (std::isfinite(m)) {
      // h2sq == 0: the 1/omega terms dominate the quadratic
      im.phi = gamma1 * (m - n) - m;
    } else {
      im.phi = kInf;
    }
  }
  return im;
}

PowerAllocation allocate_fading_state(const FadingState& state, double gamma1,
                                      const MultiplierPair& mult) {
  validate(state);
  validate_gamma1(gamma1);
  validate(mult);
  if (state.h1sq == 0.0 && state.h2sq == 0.0) return {};

  const ClosedFormIntermediates im =
      fading_intermediates(state, gamma1, mult);
  const double l1 = mult.lambda1;
  const double l2 = mult.lambda2;
  const double lam = l1 * state.h2sq + l2 * state.h1sq;
  const double ca = l2 * l2 * state.h1sq / (lam * lam);
  const double cp = l1 * l1 * state.h2sq / (lam * lam);

  PowerAllocation out;
  if (im.secrecy_branch) {
    out.b = pos(std::min(im.s2, im.phi));
    const double spend = pos(im.s1 - im.phi);
    out.a = ca * spend;
    out.p2 = cp * spend;
  } else {
    const double spend = pos(im.s1);
    out.a = ca * spend;
    out.p2 = cp * spend;
  }
  return out;
}

namespace {

struct PowerSums {
  double used1 = 0.0;
  double used2 = 0.0;
};

struct BisectResult {
  double lambda = 0.0;
  double residual = 0.0;
  bool converged = false;
  bool degenerate = false;
  int iterations = 0;
};

// Finds lambda with power(lambda) ~ target for a non-increasing power curve.
// Geometric bracket growth, then bisection on the geometric midpoint.
template <typename PowerFn>
BisectResult bisect_price(PowerFn&& power, double target,
                          const SolverOptions& opt) {
  BisectResult out;
  const double tol = std::max(opt.rel_tol * target, opt.abs_tol);

  if (target <= 0.0) {
    out.lambda = opt.lambda_ceil;
    out.residual = power(out.lambda) - target;
    out.degenerate = true;
    out.converged = std::abs(out.residual) <= tol;
    return out;
  }

  double lo = opt.bracket_lo;
  double r_lo = power(lo) - target;
  ++out.iterations;
  while (r_lo < 0.0 && lo > opt.lambda_floor) {
    lo = std::max(lo / 8.0, opt.lambda_floor);
    r_lo = power(lo) - target;
    ++out.iterations;
  }
  if (r_lo < 0.0) {
    // budget not exhaustible even at a near-free price: hold it as <=
    out.lambda = lo;
    out.residual = r_lo;
    out.degenerate = true;
    out.converged = true;
    return out;
  }
  if (std::abs(r_lo) <= tol) {
    out.lambda = lo;
    out.residual = r_lo;
    out.converged = true;
    return out;
  }

  double hi = opt.bracket_hi;
  double r_hi = power(hi) - target;
  ++out.iterations;
  while (r_hi > 0.0 && hi < opt.lambda_ceil) {
    hi = std::min(hi * 8.0, opt.lambda_ceil);
    r_hi = power(hi) - target;
    ++out.iterations;
  }
  if (r_hi > 0.0) {
    out.lambda = hi;
    out.residual = r_hi;
    return out;  // not converged
  }
  if (std::abs(r_hi) <= tol) {
    out.lambda = hi;
    out.residual = r_hi;
    out.converged = true;
    return out;
  }

  double best_lambda = std::abs(r_lo) < std::abs(r_hi) ? lo : hi;
  double best_res = std::abs(r_lo) < std::abs(r_hi) ? r_lo : r_hi;
  for (int it = 0; it < opt.max_iter; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double r = power(mid) - target;
    ++out.iterations;
    if (std::abs(r) < std::abs(best_res)) {
      best_res = r;
      best_lambda = mid;
    }
    if (std::abs(r) <= tol) {
      out.lambda = mid;
      out.residual = r;
      out.converged = true;
      return out;
    }
    if (r > 0.0)
      lo = mid;
    else
      hi = mid;
    if (hi - lo <= 1e-15 * hi) break;
  }
  out.lambda = best_lambda;
  out.residual = best_res;
  return out;  // iteration cap or collapsed bracket: best effort
}

// Two-level search. eval(l1, l2) returns the spent power under the closed
// form at those prices and must be coordinatewise non-increasing.
template <typename EvalFn>
SolveResult solve_nested(EvalFn&& eval, double p1, double p2,
                         const SolverOptions& opt) {
  SolverOptions inner_opt = opt;
  inner_opt.rel_tol = opt.rel_tol * 0.25;
  inner_opt.abs_tol = opt.abs_tol * 0.25;

  auto inner = [&](double l1) {
    return bisect_price(
        [&](double l2) { return eval(l1, l2).used2; }, p2, inner_opt);
  };

  BisectResult outer = bisect_price(
      [&](double l1) { return eval(l1, inner(l1).lambda).used1; }, p1, opt);
  const BisectResult inner_final = inner(outer.lambda);

  SolveResult res;
  res.multipliers = {outer.lambda, inner_final.lambda};
  const PowerSums sums = eval(outer.lambda, inner_final.lambda);
  res.power_used_1 = sums.used1;
  res.power_used_2 = sums.used2;
  res.residual_1 = sums.used1 - p1;
  res.residual_2 = sums.used2 - p2;
  res.degenerate_1 = outer.degenerate;
  res.degenerate_2 = inner_final.degenerate;
  const double tol1 = std::max(opt.rel_tol * p1, opt.abs_tol);
  const double tol2 = std::max(opt.rel_tol * p2, opt.abs_tol);
  const bool ok1 = std::abs(res.residual_1) <= tol1 ||
                   (res.degenerate_1 && res.residual_1 <= 0.0);
  const bool ok2 = std::abs(res.residual_2) <= tol2 ||
                   (res.degenerate_2 && res.residual_2 <= 0.0);
  res.converged = ok1 && ok2;
  res.outer_iterations = outer.iterations;
  return res;
}

}  // namespace

SolveResult solve_multipliers(const ParallelInstance& inst, double gamma1,
                              const SolverOptions& opt) {
  validate(inst);
  validate_gamma1(gamma1);

  auto eval = [&](double l1, double l2) {
    PowerSums sums;
    for (const Subchannel& sub : inst.subchannels) {
      const PowerAllocation al = allocate_subchannel(sub, gamma1, {l1, l2});
      sums.used1 += al.a + al.b;
      sums.used2 += al.p2;
    }
    return sums;
  };

  SolveResult res = solve_nested(eval, inst.p1_total, inst.p2_total, opt);
  res.allocation.reserve(inst.subchannels.size());
  for (const Subchannel& sub : inst.subchannels)
    res.allocation.push_back(
        allocate_subchannel(sub, gamma1, res.multipliers));
  return res;
}

SolveResult solve_multipliers_empirical(std::span<const FadingState> states,
                                        double gamma1, double p1, double p2,
                                        const SolverOptions& opt) {
  if (states.empty())
    throw std::invalid_argument("empirical solve needs at least one state");
  for (const FadingState& st : states) validate(st);
  validate_gamma1(gamma1);
  if (!(std::isfinite(p1) && p1 >= 0.0 && std::isfinite(p2) && p2 >= 0.0))
    throw std::invalid_argument("power budgets must be finite and nonnegative");

  const std::size_t n = states.size();
  std::vector<PowerAllocation> buffer(n);
  auto eval = [&](double l1, double l2) {
    parallel_for(n, [&](std::size_t i) {
      buffer[i] = allocate_fading_state(states[i], gamma1, {l1, l2});
    });
    PowerSums sums;
    for (const PowerAllocation& al : buffer) {  // sequential on purpose
      sums.used1 += al.a + al.b;
      sums.used2 += al.p2;
    }
    sums.used1 /= static_cast<double>(n);
    sums.used2 /= static_cast<double>(n);
    return sums;
  };

  SolveResult res = solve_nested(eval, p1, p2, opt);
  eval(res.multipliers.lambda1, res.multipliers.lambda2);
  res.allocation = std::move(buffer);
  return res;
}

}  // namespace cmaccm
