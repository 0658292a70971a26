#pragma once
// Shared plumbing: error types, float formatting, environment-controlled
// parallel loops, and a few tiny numeric helpers used across the library.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace blowuplab {

// ---------------------------------------------------------------------------
// Errors. Every failure the library can diagnose is thrown as one of these so
// the CLI can map them to stable exit codes and one-line messages.
// ---------------------------------------------------------------------------

// Invalid arguments / parameter domain violations (e.g. alpha out of (0,1/3]).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A quadrature failed to reach its requested tolerance. Carries the achieved
// error estimate so callers (and error messages) can report how close it got.
class QuadratureError : public std::runtime_error {
 public:
  QuadratureError(const std::string& msg, double achieved_estimate)
      : std::runtime_error(msg), achieved(achieved_estimate) {}
  double achieved;
};

// An iteration (Picard, CG, ...) exhausted its budget without converging.
// Carries the residual history so diagnostics can show the stall.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> history_in)
      : std::runtime_error(msg), history(std::move(history_in)) {}
  std::vector<double> history;
};

// Structural problems with grids/fields (non-monotone nodes, shape mismatch).
class GridError : public std::invalid_argument {
 public:
  explicit GridError(const std::string& msg) : std::invalid_argument(msg) {}
};

// I/O and manifest problems (unwritable path, malformed config/manifest).
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

// ---------------------------------------------------------------------------
// Formatting. All floating-point output (CSV cells, manifest values, log
// lines) goes through fmt_g17 so files are reproducible byte-for-byte.
// ---------------------------------------------------------------------------

inline std::string fmt_g17(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string strprintf(const char* fmt, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, fmt);
  std::vsnprintf(buf, sizeof buf, fmt, ap);
  va_end(ap);
  return buf;
}

// ---------------------------------------------------------------------------
// Threads. BLOWUPLAB_THREADS caps worker threads (default: hardware
// concurrency, min 1). parallel_for splits [begin,end) into contiguous chunks
// so results are bitwise independent of the thread count whenever the body
// writes only to disjoint slots.
// ---------------------------------------------------------------------------

inline int thread_budget() {
  if (const char* env = std::getenv("BLOWUPLAB_THREADS")) {
    const long n = std::strtol(env, nullptr, 10);
    if (n >= 1) return static_cast<int>(n);
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw ? static_cast<int>(hw) : 1;
}

inline void parallel_for(std::size_t begin, std::size_t end,
                         const std::function<void(std::size_t)>& body) {
  const std::size_t n = end > begin ? end - begin : 0;
  const int want = thread_budget();
  if (n == 0) return;
  if (want <= 1 || n == 1) {
    for (std::size_t i = begin; i < end; ++i) body(i);
    return;
  }
  const std::size_t workers = std::min<std::size_t>(want, n);
  const std::size_t chunk = (n + workers - 1) / workers;
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    const std::size_t lo = begin + w * chunk;
    const std::size_t hi = std::min(end, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([lo, hi, &body] {
      for (std::size_t i = lo; i < hi; ++i) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

// ---------------------------------------------------------------------------
// Small numeric helpers.
// ---------------------------------------------------------------------------

inline double sq(double x) { return x * x; }

// <x> = sqrt(1 + x^2), the smoothed absolute value used by the weights.
inline double bracket(double x) { return std::sqrt(1.0 + x * x); }

// sign with sgn(0) = 0.
inline double sgn(double x) { return (x > 0) - (x < 0); }

// |x|^p that is exact for x = 0 and avoids pow's domain quirks for x < 0.
inline double abspow(double x, double p) {
  const double a = std::fabs(x);
  return a == 0.0 ? 0.0 : std::pow(a, p);
}

// Relative difference with an absolute floor, used throughout the tests:
// |a-b| / max(|b|, floor).
inline double rel_err(double a, double b, double floor_abs = 1e-300) {
  return std::fabs(a - b) / std::max(std::fabs(b), floor_abs);
}

}  // namespace blowuplab
