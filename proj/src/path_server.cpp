#include "ncc/path_server.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncc {

ServiceCurve ServiceCurve::rateCurve(double r) {
    ServiceCurve s;
    s.kind = Kind::Rate;
    s.rate = r;
    return s;
}

ServiceCurve ServiceCurve::windowCurve(double w) {
    ServiceCurve s;
    s.kind = Kind::Window;
    s.burst = w;
    return s;
}

ServiceCurve ServiceCurve::tokenBucketCurve(double b, double r) {
    ServiceCurve s;
    s.kind = Kind::TokenBucket;
    s.burst = b;
    s.rate = r;
    return s;
}

ServiceCurve ServiceCurve::generalCurve(CumulativeFunction f) {
    ServiceCurve s;
    s.kind = Kind::General;
    s.general = std::move(f);
    return s;
}

CumulativeFunction ServiceCurve::realize(double horizon) const {
    switch (kind) {
        case Kind::Rate:
            return CumulativeFunction::rate(rate, horizon);
        case Kind::Window:
            return CumulativeFunction::window(burst, horizon);
        case Kind::TokenBucket:
            return CumulativeFunction::tokenBucket(burst, rate, horizon);
        case Kind::General:
            return general.horizon() == horizon ? general
                                                : CumulativeFunction(general.breakpoints(),
                                                                     horizon);
    }
    throw std::logic_error("unreachable");
}

CumulativeFunction departures(const CumulativeFunction& admitted, const ServiceCurve& s) {
    return convolve(admitted, s.realize(admitted.horizon()));
}

CumulativeFunction extend_departures(const CumulativeFunction& departed_prefix,
                                     const CumulativeFunction& admitted, const ServiceCurve& s,
                                     double from) {
    if (s.kind != ServiceCurve::Kind::Rate || from <= 0.0)
        return departures(admitted, s);
    const double T = admitted.horizon();
    if (from >= T) return departed_prefix;
    const double c = s.rate;
    const double d_from = departed_prefix.eval(from);

    // Suffix of the admitted function rebased to (from, A(from+)-...).
    // Candidate 1: drain of the state at `from` at full rate.
    // Candidate 2: suffix convolution inf_{from<=u<=t} A(u) + C(t-u), which is
    // shift-invariant, so run the regular convolution on the rebased suffix.
    std::vector<Breakpoint> suf;
    const double base = admitted.eval(from);  // left value; the jump at from+ stays in the suffix
    suf.push_back({0.0, admitted.evalRight(from) - base, 0.0});
    {
        // slope right of `from`
        const auto& pts = admitted.breakpoints();
        for (const Breakpoint& p : pts)
            if (p.t <= from) suf.front().slope = p.slope;
        for (const Breakpoint& p : pts)
            if (p.t > from + kEpsTime) suf.push_back({p.t - from, p.y - base, p.slope});
    }
    CumulativeFunction a_suffix(std::move(suf), T - from);
    CumulativeFunction d_suffix = convolve(a_suffix, CumulativeFunction::rate(c, T - from));

    // Lower envelope of the two candidates on [from, T].
    CumulativeFunction drain({{0.0, 0.0, c}}, T - from);
    // candidate values are relative to different bases; express both relative
    // to d_from: suffix convolution candidate has base A(from) >= D(from).
    const double gap = base - d_from;  // backlog at `from` (>= 0)
    CumulativeFunction suffix_cand =
        gap > kEpsBits ? CumulativeFunction(add(static_cast<const PiecewiseLinear&>(d_suffix),
                                                PiecewiseLinear({{0.0, gap, 0.0}}, T - from)))
                       : d_suffix;
    CumulativeFunction tail = pointwise_min(drain, suffix_cand);
    PiecewiseLinear stitched = departed_prefix.replaceFrom(from, tail, d_from);
    return CumulativeFunction(stitched);
}

double backlog(const CumulativeFunction& admitted, const CumulativeFunction& departed, double t) {
    const double b = admitted.eval(t) - departed.eval(t);
    if (b < -kEpsBits) throw std::runtime_error("negative backlog: departures exceed arrivals");
    return std::max(b, 0.0);
}

PiecewiseLinear backlog_fn(const PiecewiseLinear& admitted, const PiecewiseLinear& departed) {
    return subtract(admitted, departed);
}

double rtt(const CumulativeFunction& admitted, const CumulativeFunction& departed, double delta_r,
           double t) {
    if (t < delta_r) throw std::invalid_argument("rtt: t < delta_r");
    const double acked = departed.eval(t - delta_r);
    const double entered = lower_inverse_at(admitted, acked);
    return t - entered;
}

}  // namespace ncc
