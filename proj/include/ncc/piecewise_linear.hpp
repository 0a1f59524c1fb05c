#pragma once

#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace ncc {

// Comparison tolerances: time in seconds, data in bits.
inline constexpr double kEpsTime = 1e-12;
inline constexpr double kEpsBits = 1e-3;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

// One breakpoint of a left-continuous piecewise-linear function.
// `y` is the right-limit f(t+); `slope` is valid on (t, t_next].
// The value AT t is the limit from the left of the previous segment;
// y above that left limit encodes an instantaneous jump at t+.
struct Breakpoint {
    double t = 0.0;
    double y = 0.0;
    double slope = 0.0;
};

bool operator==(const Breakpoint& a, const Breakpoint& b);

// Left-continuous piecewise-linear function of time, zero for t <= 0.
// Monotonicity is NOT required at this level (backlog curves and
// Go-Back-N-rewound traces live here); CumulativeFunction adds the
// non-decreasing/non-negative invariants.
//
// Values are evaluated as:
//   f(t) = 0                                   for t <= 0
//   f(t) = y_i + slope_i * (t - t_i)           for t in (t_i, t_{i+1}]
// The final segment extrapolates past the horizon.
class PiecewiseLinear {
  public:
    PiecewiseLinear() : horizon_(0.0) { pts_.push_back({0.0, 0.0, 0.0}); }
    PiecewiseLinear(std::vector<Breakpoint> pts, double horizon);

    // Left-continuous value f(t).
    double eval(double t) const;
    // Right limit f(t+).
    double evalRight(double t) const;

    double horizon() const { return horizon_; }
    const std::vector<Breakpoint>& breakpoints() const { return pts_; }

    // Jump height at breakpoint index i (0 for the first one at t=0 if y=0).
    double jumpAt(std::size_t i) const;

    bool isNonDecreasing() const;
    // max over sampled breakpoints of f - g (exact: checked at all
    // breakpoints of both plus segment interiors are affine).
    static double maxDifference(const PiecewiseLinear& f, const PiecewiseLinear& g);

    PiecewiseLinear withHorizon(double h) const;

    // f(t) for t > cut replaced by tail(t - cut) + offset; the past is kept.
    // Throws on a decreasing junction unless allow_rewind.
    PiecewiseLinear replaceFrom(double cut, const PiecewiseLinear& tail, double offset,
                                bool allow_rewind = false) const;

    // h(t) = f(t - d) (right shift by d >= 0, zero-padded).
    PiecewiseLinear delayed(double d) const;

    // First t in (from, ub] with f(t) > level (strictly); infimum semantics:
    // returns the earliest boundary of the region where the condition holds.
    std::optional<double> firstTimeAbove(double level, double from, double ub) const;
    // Same with f(t) >= level.
    std::optional<double> firstTimeAtLeast(double level, double from, double ub) const;

    std::string toCsv() const;  // rows: t,y,slope,jump

    bool operator==(const PiecewiseLinear& o) const {
        return horizon_ == o.horizon_ && pts_ == o.pts_;
    }

  protected:
    // Index of the segment governing (t_i, t_{i+1}] that contains t from the left.
    std::size_t segmentIndexLeft(double t) const;

    std::vector<Breakpoint> pts_;
    double horizon_;
};

PiecewiseLinear add(const PiecewiseLinear& f, const PiecewiseLinear& g);
PiecewiseLinear subtract(const PiecewiseLinear& f, const PiecewiseLinear& g);

// Canonical form: first breakpoint pinned at t=0, strictly increasing times,
// near-zero jumps and collinear continuations merged.
std::vector<Breakpoint> canonicalize(std::vector<Breakpoint> pts, double horizon);

}  // namespace ncc
