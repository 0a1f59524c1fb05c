#pragma once

#include <optional>
#include <vector>

#include "ncc/piecewise_linear.hpp"

namespace ncc {

// Decomposition unit used by the convolution: the piece on (t_start, t_end]
// with value y_start + slope*(t - t_start), preceded by an instantaneous
// `jump` at t_start+.
struct Segment {
    double t_start = 0.0;
    double t_end = 0.0;
    double y_start = 0.0;
    double slope = 0.0;
    double jump = 0.0;
};

// Left-continuous, non-decreasing, non-negative piecewise-linear function,
// zero for t <= 0. The workhorse for arrival, admitted, departure and
// service functions.
class CumulativeFunction : public PiecewiseLinear {
  public:
    CumulativeFunction() = default;
    CumulativeFunction(std::vector<Breakpoint> pts, double horizon);
    explicit CumulativeFunction(const PiecewiseLinear& plf);

    static CumulativeFunction zero(double horizon);
    // max(r*t, 0)
    static CumulativeFunction rate(double r, double horizon);
    // 0 for t <= 0, W for t > 0
    static CumulativeFunction window(double w, double horizon);
    // max(b + r*t, 0)
    static CumulativeFunction tokenBucket(double b, double r, double horizon);

    std::vector<Segment> decompose() const;

    CumulativeFunction truncated(double h) const { return CumulativeFunction(withHorizon(h)); }

    void validate() const;  // throws on any invariant violation
};

// Incremental builder for arrival patterns: bursts and rate changes in
// non-decreasing time order.
class ArrivalBuilder {
  public:
    ArrivalBuilder& burst(double t, double bits);
    ArrivalBuilder& rate(double t, double bits_per_second);
    CumulativeFunction build(double horizon) const;

  private:
    struct Item {
        double t;
        double jump;
        double slope;
        bool has_slope;
    };
    std::vector<Item> items_;
};

// Exact (min,+) convolution: pairwise segment convolution followed by the
// lower envelope of all candidate pieces. Operands are re-truncated to the
// shorter horizon first.
CumulativeFunction convolve(const CumulativeFunction& f, const CumulativeFunction& g);

CumulativeFunction pointwise_min(const CumulativeFunction& f, const CumulativeFunction& g);
CumulativeFunction add(const CumulativeFunction& f, const CumulativeFunction& g);

// h(t) = f(t + dt) - dy for t > 0, clamped to 0 for t <= 0. Throws if the
// result would be decreasing/negative beyond tolerance.
CumulativeFunction shift(const CumulativeFunction& f, double dt, double dy);

// inf{ t in (t_from, ub] : f(t) < g(t) } (strict), or nullopt. The returned
// time is an infimum and need not satisfy the inequality itself. ub defaults
// to the shared horizon; searches never look past it.
std::optional<double> first_crossing_below(const PiecewiseLinear& f, const PiecewiseLinear& g,
                                           double t_from,
                                           double ub = kInfinity);

}  // namespace ncc
