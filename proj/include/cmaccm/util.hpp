#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>

namespace cmaccm {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr double kLn2 = std::numbers::ln2;

// log2(1 + x) without cancellation for small x.
inline double log2_1p(double x) { return std::log1p(x) / kLn2; }

// (x)+ clamp.
inline double pos(double x) { return x > 0.0 ? x : 0.0; }

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

// Chunked parallel fan-out over [0, n). fn(i) must write only to slot i of
// preallocated storage; reductions stay sequential at the call site, so the
// thread count (CMACCM_THREADS, default 1) never changes any result.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

int thread_count();

}  // namespace cmaccm
