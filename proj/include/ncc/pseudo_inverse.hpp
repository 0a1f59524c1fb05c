#pragma once

#include "ncc/cumulative.hpp"

namespace ncc {

// F_up(y)   = sup{ x >= 0 : F(x) <= y }   (upper pseudo-inverse)
// F_down(y) = inf{ x >= 0 : F(x) >= y }   (lower pseudo-inverse)
// Plateaus of F become jumps of the inverse; jumps of F become plateaus.
// Queries above sup F return +infinity (the horizon sentinel).
// The input must be non-decreasing (CumulativeFunction, or a PLF the caller
// knows to be monotone).
double upper_inverse_at(const PiecewiseLinear& f, double y);
double lower_inverse_at(const PiecewiseLinear& f, double y);

// Piecewise-linear map bits -> time. The upper inverse is right-continuous
// at its breakpoints, the lower inverse left-continuous; eval() honors the
// convention of the map it represents.
class PseudoInverseMap {
  public:
    PseudoInverseMap(const PiecewiseLinear& f, bool upper);

    double eval(double y) const;
    // Limit from the other side, used when composing with one-sided values.
    double evalLeft(double y) const;
    double evalRight(double y) const;

    bool upper() const { return upper_; }
    const std::vector<Breakpoint>& breakpoints() const { return pts_; }
    double supValue() const { return y_max_; }  // sup of f over its domain
    std::string toCsv() const;                  // rows: y,t,slope,jump

  private:
    std::vector<Breakpoint> pts_;  // t-axis is bits (y of f); y-axis is time
    bool upper_;
    double y_max_;  // queries beyond this map to +infinity for the upper inverse
};

}  // namespace ncc
