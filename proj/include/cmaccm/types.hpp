#pragma once

#include <vector>

namespace cmaccm {

// Link classification. A collects the links on which the destination hears
// user 1 strictly better than user 2's receiver does; confidential power may
// flow only there. Ties land in Abar.
enum class SetLabel { A, Abar };

// One parallel Gaussian link, described by its two noise variances
// (linear power units, > 0).
struct Subchannel {
  double nu = 1.0;  // noise variance at the destination
  double mu = 1.0;  // noise variance at user 2's receiver
};

// Transmit powers on one link (linear units, >= 0).
//   a   user 1, common message
//   b   user 1, confidential message; must be 0 on Abar links
//   p2  user 2 (common message only)
struct PowerAllocation {
  double a = 0.0;
  double b = 0.0;
  double p2 = 0.0;
};

struct ParallelInstance {
  std::vector<Subchannel> subchannels;
  double p1_total = 0.0;  // user-1 sum-power budget
  double p2_total = 0.0;  // user-2 sum-power budget
};

// One fading realization: squared channel gain magnitudes plus the noise
// variances. Complex-channel convention, so rates use full (not half) logs.
// The user1 -> user2 cross gain never enters any rate and is not stored.
struct FadingState {
  double h1sq = 0.0;  // |h1|^2, user 1 -> destination
  double h2sq = 0.0;  // |h2|^2, user 2 -> destination
  double g1sq = 0.0;  // |g1|^2, user 1 -> user 2
  double nu = 1.0;    // destination noise variance
  double mu = 1.0;    // user-2 noise variance
};

// Rates in bits per channel use.
struct RatePair {
  double r0 = 0.0;  // common message
  double r1 = 0.0;  // confidential message
};

// Shadow prices of the two sum-power budgets.
struct MultiplierPair {
  double lambda1 = 0.0;
  double lambda2 = 0.0;
};

// All throw std::invalid_argument with a descriptive message.
void validate(const Subchannel& sub);
void validate(const ParallelInstance& inst);
void validate(const FadingState& state);
void validate(const MultiplierPair& mult);
void validate_allocation(const PowerAllocation& alloc);
void validate_gamma1(double gamma1);

}  // namespace cmaccm
