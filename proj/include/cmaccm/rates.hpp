#pragma once

#include <span>

#include "cmaccm/types.hpp"

namespace cmaccm {

// A iff nu < mu strictly; nu == mu goes to Abar.
SetLabel classify(const Subchannel& sub);

// A iff h1sq / nu > g1sq / mu strictly (compared cross-multiplied, so zero
// gains need no special care); ties go to Abar.
bool in_set_a(const FadingState& state);

// Boundary rate pair of the parallel channel for a given allocation, with
// coherent combining of the two common-message signals. Half-log convention
// (real channel). Throws on length mismatch, negative or non-finite powers,
// or confidential power on an Abar link.
RatePair rate_pair_parallel(const ParallelInstance& inst,
                            std::span<const PowerAllocation> alloc);

// Same allocation evaluated without carrier phase alignment: the coherent
// cross term 2*sqrt(a*p2) disappears from every common-rate summand. r1 is
// computed by the identical code path, so it matches the coherent value
// bit for bit.
RatePair rate_pair_parallel_async(const ParallelInstance& inst,
                                  std::span<const PowerAllocation> alloc);

// Single-state rate contribution for the fading channel (full logs, complex
// channel). For Abar states r1 is 0 and b must be 0.
RatePair rate_contribution_fading(const FadingState& state,
                                  const PowerAllocation& alloc);

}  // namespace cmaccm
