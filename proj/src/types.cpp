#include "cmaccm/types.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace cmaccm {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

bool finite_pos(double x) { return std::isfinite(x) && x > 0.0; }
bool finite_nonneg(double x) { return std::isfinite(x) && x >= 0.0; }

}  // namespace

void validate(const Subchannel& sub) {
  require(finite_pos(sub.nu) && finite_pos(sub.mu),
          "subchannel noise variances must be finite and positive");
}

void validate(const ParallelInstance& inst) {
  require(!inst.subchannels.empty(), "instance needs at least one subchannel");
  for (const auto& sub : inst.subchannels) validate(sub);
  require(finite_nonneg(inst.p1_total) && finite_nonneg(inst.p2_total),
          "power budgets must be finite and nonnegative");
}

void validate(const FadingState& state) {
  require(finite_nonneg(state.h1sq) && finite_nonneg(state.h2sq) &&
              finite_nonneg(state.g1sq),
          "squared channel gains must be finite and nonnegative");
  require(finite_pos(state.nu) && finite_pos(state.mu),
          "state noise variances must be finite and positive");
}

void validate(const MultiplierPair& mult) {
  require(finite_pos(mult.lambda1) && finite_pos(mult.lambda2),
          "multipliers must be finite and positive");
}

void validate_allocation(const PowerAllocation& alloc) {
  require(finite_nonneg(alloc.a) && finite_nonneg(alloc.b) &&
              finite_nonneg(alloc.p2),
          "power allocation components must be finite and nonnegative");
}

void validate_gamma1(double gamma1) {
  require(std::isfinite(gamma1) && gamma1 >= 0.0,
          "gamma1 must be finite and nonnegative");
}

}  // namespace cmaccm
