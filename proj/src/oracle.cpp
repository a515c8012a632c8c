#include "cmaccm/oracle.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "cmaccm/allocator.hpp"
#include "cmaccm/rates.hpp"
#include "cmaccm/util.hpp"

namespace cmaccm {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void validate_grid(const GridSpec& grid) {
  if (grid.points_per_axis < 8)
    throw std::invalid_argument("grid needs at least 8 points per axis");
  if (grid.refinement_rounds < 0)
    throw std::invalid_argument("refinement_rounds must be nonnegative");
}

bool lex_less(const PowerAllocation& x, const PowerAllocation& y) {
  if (x.a != y.a) return x.a < y.a;
  if (x.b != y.b) return x.b < y.b;
  return x.p2 < y.p2;
}

template <std::size_t N>
bool lex_less(const std::array<PowerAllocation, N>& x,
              const std::array<PowerAllocation, N>& y, std::size_t count) {
  for (std::size_t j = 0; j < count; ++j) {
    if (lex_less(x[j], y[j])) return true;
    if (lex_less(y[j], x[j])) return false;
  }
  return false;
}

// Weighted objective contribution of one link.
double link_term(const Subchannel& sub, bool in_a, double gamma1,
                 const PowerAllocation& al, bool coherent) {
  const double cross = coherent ? 2.0 * std::sqrt(al.a * al.p2) : 0.0;
  const double common = al.a + al.p2 + cross;
  if (!in_a) return 0.5 * log2_1p(common / sub.nu);
  return 0.5 * log2_1p(common / (al.b + sub.nu)) +
         gamma1 * 0.5 * (log2_1p(al.b / sub.nu) - log2_1p(al.b / sub.mu));
}

struct LinkBest {
  double value = kNegInf;
  PowerAllocation alloc;
};

// The a/b division of user-1 power u on one link is separable from the rest
// of the instance, so a 1-D refine suffices and keeps the outer grid small.
LinkBest best_split(const Subchannel& sub, bool in_a, double gamma1, double u,
                    double q, bool coherent, const GridSpec& grid) {
  if (!in_a || u <= 0.0) {
    PowerAllocation al{u, 0.0, q};
    return {link_term(sub, in_a, gamma1, al, coherent), al};
  }
  const int p = grid.points_per_axis;
  double lo = 0.0;
  double width = 1.0;
  LinkBest best;
  double best_f = 0.0;
  for (int round = 0; round <= grid.refinement_rounds; ++round) {
    for (int k = 0; k < p; ++k) {
      const double f = lo + width * k / (p - 1);
      const PowerAllocation al{u * (1.0 - f), u * f, q};
      const double v = link_term(sub, in_a, gamma1, al, coherent);
      if (v > best.value ||
          (v == best.value && lex_less(al, best.alloc))) {
        best = {v, al};
        best_f = f;
      }
    }
    width /= 4.0;
    lo = std::clamp(best_f - width / 2.0, 0.0, 1.0 - width);
  }
  return best;
}

struct Incumbent {
  double value = kNegInf;
  std::array<PowerAllocation, 3> alloc{};
  std::array<double, 4> coords{};
  bool seen = false;
};

GridResult grid_optimize_impl(const ParallelInstance& inst, double gamma1,
                              const GridSpec& grid, bool coherent) {
  validate(inst);
  validate_gamma1(gamma1);
  validate_grid(grid);
  const std::size_t count = inst.subchannels.size();
  if (count > 3)
    throw std::invalid_argument(
        "grid oracle is limited to instances with at most 3 subchannels");

  std::array<bool, 3> in_a{};
  for (std::size_t j = 0; j < count; ++j)
    in_a[j] = classify(inst.subchannels[j]) == SetLabel::A;

  const int dims = 2 * (static_cast<int>(count) - 1);
  const int p = grid.points_per_axis;
  std::array<double, 4> lo{};
  std::array<double, 4> width{};
  width.fill(1.0);

  // Splits user budgets across links from grid coordinates; the first
  // count-1 coordinates drive user 1, the rest user 2.
  auto decode = [&](const std::array<double, 4>& c,
                    std::array<double, 3>& u, std::array<double, 3>& q) {
    switch (count) {
      case 1:
        u[0] = inst.p1_total;
        q[0] = inst.p2_total;
        break;
      case 2:
        u[0] = c[0] * inst.p1_total;
        u[1] = (1.0 - c[0]) * inst.p1_total;
        q[0] = c[1] * inst.p2_total;
        q[1] = (1.0 - c[1]) * inst.p2_total;
        break;
      default:
        u[0] = c[0] * inst.p1_total;
        u[1] = c[1] * (1.0 - c[0]) * inst.p1_total;
        u[2] = (1.0 - c[1]) * (1.0 - c[0]) * inst.p1_total;
        q[0] = c[2] * inst.p2_total;
        q[1] = c[3] * (1.0 - c[2]) * inst.p2_total;
        q[2] = (1.0 - c[3]) * (1.0 - c[2]) * inst.p2_total;
        break;
    }
  };

  Incumbent best;
  GridResult out;
  out.round_objectives.reserve(grid.refinement_rounds + 1);

  std::array<int, 4> idx{};
  std::array<double, 4> c{};
  std::array<double, 3> u{};
  std::array<double, 3> q{};
  std::array<PowerAllocation, 3> alloc{};

  for (int round = 0; round <= grid.refinement_rounds; ++round) {
    idx.fill(0);
    bool done = false;
    while (!done) {
      for (int d = 0; d < dims; ++d)
        c[d] = lo[d] + width[d] * idx[d] / (p - 1);
      decode(c, u, q);
      double value = 0.0;
      for (std::size_t j = 0; j < count; ++j) {
        const LinkBest lb = best_split(inst.subchannels[j], in_a[j], gamma1,
                                       u[j], q[j], coherent, grid);
        value += lb.value;
        alloc[j] = lb.alloc;
      }
      if (!best.seen || value > best.value ||
          (value == best.value && lex_less(alloc, best.alloc, count))) {
        best.value = value;
        best.alloc = alloc;
        best.coords = c;
        best.seen = true;
      }
      // odometer over the outer axes; dims == 0 runs the body once
      done = true;
      for (int d = 0; d < dims; ++d) {
        if (++idx[d] < p) {
          done = false;
          break;
        }
        idx[d] = 0;
      }
    }
    out.round_objectives.push_back(best.value);
    for (int d = 0; d < dims; ++d) {
      width[d] /= 4.0;
      lo[d] = std::clamp(best.coords[d] - width[d] / 2.0, 0.0,
                         1.0 - width[d]);
    }
  }

  out.allocation.assign(best.alloc.begin(), best.alloc.begin() + count);
  const RatePair rates = coherent
                             ? rate_pair_parallel(inst, out.allocation)
                             : rate_pair_parallel_async(inst, out.allocation);
  out.objective = rates.r0 + gamma1 * rates.r1;
  return out;
}

}  // namespace

GridSpec recommended_grid(std::size_t subchannel_count) {
  if (subchannel_count <= 1) return {257, 3};
  if (subchannel_count == 2) return {33, 4};
  return {11, 5};
}

GridResult grid_optimize(const ParallelInstance& inst, double gamma1,
                         const GridSpec& grid) {
  return grid_optimize_impl(inst, gamma1, grid, true);
}

GridResult grid_optimize_async(const ParallelInstance& inst, double gamma1,
                               const GridSpec& grid) {
  return grid_optimize_impl(inst, gamma1, grid, false);
}

namespace {

double state_lagrangian(const FadingState& state, double gamma1,
                        const MultiplierPair& mult,
                        const PowerAllocation& al) {
  const RatePair r = rate_contribution_fading(state, al);
  return r.r0 + gamma1 * r.r1 - mult.lambda1 * (al.a + al.b) -
         mult.lambda2 * al.p2;
}

// Per-axis box edges beyond which the price term provably beats any rate
// gain, so the maximizer lives inside [0,cap_a] x [0,cap_p2] x [0,cap_b].
//  - common-rate marginal in a is sqrt(chi)*sqrt(h1sq/a)/(ln2*(D+chi)) with
//    D >= nu and D+chi >= 2*sqrt(D*chi), hence below lambda1 for every
//    a > h1sq/(4*nu*(lambda1*ln2)^2); p2 against lambda2 is symmetric
//  - confidential marginal in b is at most gamma1*h1sq/(ln2*(nu+b*h1sq)),
//    below lambda1 once b >= gamma1/(lambda1*ln2) - nu/h1sq, while the
//    common rate only loses from b
std::array<double, 3> lagrangian_axis_caps(const FadingState& state,
                                           double gamma1,
                                           const MultiplierPair& mult,
                                           bool has_b) {
  const double qa = mult.lambda1 * kLn2;
  const double qp = mult.lambda2 * kLn2;
  std::array<double, 3> caps{};
  caps[0] = state.h1sq / (4.0 * state.nu * qa * qa) + 1.0;
  caps[1] = state.h2sq / (4.0 * state.nu * qp * qp) + 1.0;
  if (has_b)  // membership guarantees h1sq > 0
    caps[2] = pos(gamma1 / qa - state.nu / state.h1sq) + 1.0;
  return caps;
}

}  // namespace

StateGridResult lagrangian_grid_optimize_state(const FadingState& state,
                                               double gamma1,
                                               const MultiplierPair& mult,
                                               const GridSpec& grid) {
  validate(state);
  validate_gamma1(gamma1);
  validate(mult);
  validate_grid(grid);

  const bool has_b = in_set_a(state);
  const std::array<double, 3> caps =
      lagrangian_axis_caps(state, gamma1, mult, has_b);
  const int dims = has_b ? 3 : 2;  // axes: a, p2 and optionally b
  const int p = grid.points_per_axis;

  std::array<double, 3> lo{};
  std::array<double, 3> width = caps;

  double best_value = kNegInf;
  PowerAllocation best_alloc;
  std::array<double, 3> best_coord{};
  bool seen = false;

  std::array<int, 3> idx{};
  for (int round = 0; round <= grid.refinement_rounds; ++round) {
    idx.fill(0);
    bool done = false;
    while (!done) {
      PowerAllocation al;
      al.a = lo[0] + width[0] * idx[0] / (p - 1);
      al.p2 = lo[1] + width[1] * idx[1] / (p - 1);
      al.b = has_b ? lo[2] + width[2] * idx[2] / (p - 1) : 0.0;
      const double v = state_lagrangian(state, gamma1, mult, al);
      if (!seen || v > best_value ||
          (v == best_value && lex_less(al, best_alloc))) {
        best_value = v;
        best_alloc = al;
        best_coord = {al.a, al.p2, al.b};
        seen = true;
      }
      done = true;
      for (int d = 0; d < dims; ++d) {
        if (++idx[d] < p) {
          done = false;
          break;
        }
        idx[d] = 0;
      }
    }
    for (int d = 0; d < dims; ++d) {
      width[d] /= 4.0;
      lo[d] = std::clamp(best_coord[d] - width[d] / 2.0, 0.0,
                         caps[d] - width[d]);
    }
  }

  StateGridResult out;
  out.allocation = best_alloc;
  out.lagrangian = best_value;
  out.box_cap = 0.0;
  out.resolution = 0.0;
  for (int d = 0; d < dims; ++d) {
    out.box_cap = std::max(out.box_cap, caps[d]);
    // step of the last scanned grid on this axis
    out.resolution = std::max(out.resolution, width[d] * 4.0 / (p - 1));
  }
  return out;
}

double KktReport::max_active_residual() const {
  double worst = 0.0;
  for (const KktEntry& e : entries)
    if (e.active) worst = std::max(worst, e.residual);
  return worst;
}

KktReport kkt_residuals(const Subchannel& sub, double gamma1,
                        const MultiplierPair& mult,
                        const PowerAllocation& alloc) {
  validate(sub);
  validate_gamma1(gamma1);
  validate(mult);
  validate_allocation(alloc);

  const bool in_a = classify(sub) == SetLabel::A;
  const double sa = std::sqrt(alloc.a);
  const double sp = std::sqrt(alloc.p2);
  const double denom = sub.nu + alloc.a + alloc.p2 + 2.0 * sa * sp +
                       (in_a ? alloc.b : 0.0);
  const double theta = (sa + sp) / denom;

  KktReport rep;
  KktEntry ea{"stationarity_a", 0.0, alloc.a > 0.0};
  if (ea.active)
    ea.residual = std::abs(theta / (2.0 * kLn2 * sa) - mult.lambda1);
  KktEntry ep{"stationarity_p2", 0.0, alloc.p2 > 0.0};
  if (ep.active)
    ep.residual = std::abs(theta / (2.0 * kLn2 * sp) - mult.lambda2);
  KktEntry er{"price_ratio", 0.0, alloc.a > 0.0};
  if (er.active) {
    const double lhs = alloc.p2 * mult.lambda2 * mult.lambda2;
    const double rhs = alloc.a * mult.lambda1 * mult.lambda1;
    er.residual = std::abs(lhs - rhs) / rhs;
  }
  rep.entries = {ea, ep, er};
  return rep;
}

KktReport kkt_residuals(const FadingState& state, double gamma1,
                        const MultiplierPair& mult,
                        const PowerAllocation& alloc) {
  validate(state);
  validate_gamma1(gamma1);
  validate(mult);
  validate_allocation(alloc);

  const double sa = std::sqrt(alloc.a * state.h1sq);
  const double sp = std::sqrt(alloc.p2 * state.h2sq);
  const double chi = (sa + sp) * (sa + sp);
  const double denom =
      (in_set_a(state) ? alloc.b * state.h1sq : 0.0) + state.nu + chi;
  const double theta = (sa + sp) / denom;

  KktReport rep;
  KktEntry ea{"stationarity_a", 0.0, alloc.a > 0.0 && state.h1sq > 0.0};
  if (ea.active)
    ea.residual = std::abs(theta * std::sqrt(state.h1sq) /
                               (kLn2 * std::sqrt(alloc.a)) -
                           mult.lambda1);
  KktEntry ep{"stationarity_p2", 0.0, alloc.p2 > 0.0 && state.h2sq > 0.0};
  if (ep.active)
    ep.residual = std::abs(theta * std::sqrt(state.h2sq) /
                               (kLn2 * std::sqrt(alloc.p2)) -
                           mult.lambda2);
  KktEntry er{"price_ratio", 0.0,
              alloc.a > 0.0 && state.h1sq > 0.0 && state.h2sq > 0.0};
  if (er.active) {
    const double lhs =
        alloc.p2 * mult.lambda2 * mult.lambda2 * state.h1sq;
    const double rhs = alloc.a * mult.lambda1 * mult.lambda1 * state.h2sq;
    er.residual = std::abs(lhs - rhs) / rhs;
  }
  rep.entries = {ea, ep, er};
  return rep;
}

ClosedFormConsistency check_closed_form_consistency(
    std::span<const FadingState> states, double gamma1,
    const MultiplierPair& mult, const GridSpec& grid) {
  validate_gamma1(gamma1);
  validate(mult);
  validate_grid(grid);
  if (states.empty())
    throw std::invalid_argument("consistency check needs at least one state");

  struct PerState {
    double coord_gap = 0.0;
    double lagrangian_gap = 0.0;
    double agree_tol = 0.0;
    bool skipped = false;
  };
  std::vector<PerState> checks(states.size());

  parallel_for(states.size(), [&](std::size_t i) {
    const FadingState& st = states[i];
    if (st.h1sq == 0.0 && st.h2sq == 0.0) {
      checks[i].skipped = true;
      return;
    }
    const PowerAllocation closed =
        allocate_fading_state(st, gamma1, mult);
    const StateGridResult oracle =
        lagrangian_grid_optimize_state(st, gamma1, mult, grid);
    const double closed_value = state_lagrangian(st, gamma1, mult, closed);
    PerState& ps = checks[i];
    ps.coord_gap = std::max({std::abs(closed.a - oracle.allocation.a),
                             std::abs(closed.b - oracle.allocation.b),
                             std::abs(closed.p2 - oracle.allocation.p2)});
    ps.lagrangian_gap = oracle.lagrangian - closed_value;
    ps.agree_tol =
        std::max(4.0 * oracle.resolution, 1e-6 * std::max(1.0, oracle.box_cap));
  });

  ClosedFormConsistency out;
  for (const PerState& ps : checks) {
    if (ps.skipped) continue;
    ++out.states_checked;
    if (ps.coord_gap <= ps.agree_tol) ++out.states_agreeing;
    out.worst_coordinate_gap = std::max(out.worst_coordinate_gap, ps.coord_gap);
    out.worst_lagrangian_gap =
        std::max(out.worst_lagrangian_gap, ps.lagrangian_gap);
    // the oracle maximizes the same function, so the closed form may only
    // exceed it by grid resolution error; anything more is an internal bug
    if (-ps.lagrangian_gap > 1e-3 * std::max(1.0, std::abs(ps.lagrangian_gap)))
      out.oracle_beaten = true;
  }
  out.agree_fraction =
      out.states_checked == 0
          ? 1.0
          : static_cast<double>(out.states_agreeing) / out.states_checked;
  out.discrepancy = out.agree_fraction < 0.95;
  return out;
}

}  // namespace cmaccm
