#include "cmaccm/rates.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "cmaccm/util.hpp"

namespace cmaccm {

SetLabel classify(const Subchannel& sub) {
  validate(sub);
  return sub.nu < sub.mu ? SetLabel::A : SetLabel::Abar;
}

bool in_set_a(const FadingState& state) {
  validate(state);
  return state.h1sq * state.mu > state.g1sq * state.nu;
}

namespace {

RatePair rate_pair_impl(const ParallelInstance& inst,
                        std::span<const PowerAllocation> alloc,
                        bool coherent) {
  validate(inst);
  if (alloc.size() != inst.subchannels.size())
    throw std::invalid_argument(
        "allocation length " + std::to_string(alloc.size()) +
        " does not match subchannel count " +
        std::to_string(inst.subchannels.size()));

  double r0 = 0.0;
  double r1 = 0.0;
  for (std::size_t j = 0; j < alloc.size(); ++j) {
    const Subchannel& sub = inst.subchannels[j];
    const PowerAllocation& al = alloc[j];
    validate_allocation(al);
    const bool in_a = classify(sub) == SetLabel::A;
    if (!in_a && al.b != 0.0)
      throw std::invalid_argument("confidential power on an Abar subchannel " +
                                  std::to_string(j));
    const double cross = coherent ? 2.0 * std::sqrt(al.a * al.p2) : 0.0;
    const double common = al.a + al.p2 + cross;
    if (in_a) {
      r0 += 0.5 * log2_1p(common / (al.b + sub.nu));
      r1 += 0.5 * (log2_1p(al.b / sub.nu) - log2_1p(al.b / sub.mu));
    } else {
      r0 += 0.5 * log2_1p(common / sub.nu);
    }
  }
  return {r0, r1};
}

}  // namespace

RatePair rate_pair_parallel(const ParallelInstance& inst,
                            std::span<const PowerAllocation> alloc) {
  return rate_pair_impl(inst, alloc, true);
}

RatePair rate_pair_parallel_async(const ParallelInstance& inst,
                                  std::span<const PowerAllocation> alloc) {
  return rate_pair_impl(inst, alloc, false);
}

RatePair rate_contribution_fading(const FadingState& state,
                                  const PowerAllocation& alloc) {
  validate(state);
  validate_allocation(alloc);
  const bool in_a = in_set_a(state);
  if (!in_a && alloc.b != 0.0)
    throw std::invalid_argument("confidential power on an Abar fading state");

  const double amp = std::sqrt(alloc.a * state.h1sq) +
                     std::sqrt(alloc.p2 * state.h2sq);
  const double chi = amp * amp;
  RatePair out;
  if (in_a) {
    out.r0 = log2_1p(chi / (alloc.b * state.h1sq + state.nu));
    out.r1 = log2_1p(alloc.b * state.h1sq / state.nu) -
             log2_1p(alloc.b * state.g1sq / state.mu);
  } else {
    out.r0 = log2_1p(chi / state.nu);
  }
  return out;
}

}  // namespace cmaccm
