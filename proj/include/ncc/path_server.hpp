#pragma once

#include "ncc/cumulative.hpp"
#include "ncc/pseudo_inverse.hpp"

namespace ncc {

// Exact service curve of the path server or of a CCA shaper.
struct ServiceCurve {
    enum class Kind { Rate, Window, TokenBucket, General };

    Kind kind = Kind::Rate;
    double rate = 0.0;    // bits/s (Rate, TokenBucket)
    double burst = 0.0;   // bits   (Window: W, TokenBucket: b)
    CumulativeFunction general;  // Kind::General only

    static ServiceCurve rateCurve(double r);
    static ServiceCurve windowCurve(double w);
    static ServiceCurve tokenBucketCurve(double b, double r);
    static ServiceCurve generalCurve(CumulativeFunction f);

    CumulativeFunction realize(double horizon) const;
};

// D = admitted (x) S, exact.
CumulativeFunction departures(const CumulativeFunction& admitted, const ServiceCurve& s);

// Extends a known departure prefix past `from` after the admitted function
// changed at/after `from`. Exact for rate servers:
//   D(t) = min( D(from) + C (t - from),  inf_{from<=s<=t} A(s) + C (t-s) ).
// Falls back to a full convolution for other service kinds.
CumulativeFunction extend_departures(const CumulativeFunction& departed_prefix,
                                     const CumulativeFunction& admitted, const ServiceCurve& s,
                                     double from);

// B(t) = admitted(t) - departed(t); throws if negative beyond tolerance.
double backlog(const CumulativeFunction& admitted, const CumulativeFunction& departed, double t);
PiecewiseLinear backlog_fn(const PiecewiseLinear& admitted, const PiecewiseLinear& departed);

// RTT(t) = t - admitted_down(D(t - delta_r)); requires t >= delta_r.
double rtt(const CumulativeFunction& admitted, const CumulativeFunction& departed,
           double delta_r, double t);

}  // namespace ncc
