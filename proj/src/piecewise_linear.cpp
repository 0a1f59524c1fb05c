#include "ncc/piecewise_linear.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ncc {

bool operator==(const Breakpoint& a, const Breakpoint& b) {
    return a.t == b.t && a.y == b.y && a.slope == b.slope;
}

std::vector<Breakpoint> canonicalize(std::vector<Breakpoint> pts, double horizon) {
    if (pts.empty()) pts.push_back({0.0, 0.0, 0.0});
    std::stable_sort(pts.begin(), pts.end(),
                     [](const Breakpoint& a, const Breakpoint& b) { return a.t < b.t; });
    for (const Breakpoint& p : pts) {
        if (!std::isfinite(p.t) || !std::isfinite(p.y) || !std::isfinite(p.slope))
            throw std::invalid_argument("piecewise-linear breakpoint is not finite");
    }
    if (pts.front().t < -kEpsTime)
        throw std::invalid_argument("breakpoint before t=0");
    pts.front().t = std::max(pts.front().t, 0.0);
    if (pts.front().t > 0.0) pts.insert(pts.begin(), {0.0, 0.0, 0.0});

    // Collapse breakpoints that coincide in time (the last right-limit wins).
    std::vector<Breakpoint> dedup;
    for (const Breakpoint& p : pts) {
        if (!dedup.empty() && p.t - dedup.back().t <= kEpsTime)
            dedup.back() = {dedup.back().t, p.y, p.slope};
        else
            dedup.push_back(p);
    }

    // Drop breakpoints that neither jump nor change slope.
    std::vector<Breakpoint> out;
    out.reserve(dedup.size());
    out.push_back(dedup.front());
    for (std::size_t i = 1; i < dedup.size(); ++i) {
        const Breakpoint& prev = out.back();
        Breakpoint cur = dedup[i];
        const double left = prev.y + prev.slope * (cur.t - prev.t);
        const double jump = cur.y - left;
        const double scale = std::max({1.0, std::fabs(cur.y), std::fabs(left)});
        const bool zero_jump = std::fabs(jump) <= std::max(kEpsBits, 1e-12 * scale);
        const double sscale = std::max({1.0, std::fabs(cur.slope), std::fabs(prev.slope)});
        const bool same_slope = std::fabs(cur.slope - prev.slope) <= 1e-12 * sscale;
        if (zero_jump && same_slope) continue;
        if (zero_jump) cur.y = left;  // snap fp dust at slope changes
        out.push_back(cur);
    }
    if (horizon < out.back().t - kEpsTime)
        throw std::invalid_argument("horizon before last breakpoint");
    return out;
}

PiecewiseLinear::PiecewiseLinear(std::vector<Breakpoint> pts, double horizon)
    : pts_(canonicalize(std::move(pts), horizon)), horizon_(std::max(horizon, pts_.back().t)) {}

std::size_t PiecewiseLinear::segmentIndexLeft(double t) const {
    // Last i with pts_[i].t < t. Caller guarantees t > 0 (= pts_[0].t is 0).
    auto it = std::lower_bound(pts_.begin(), pts_.end(), t,
                               [](const Breakpoint& p, double v) { return p.t < v; });
    return static_cast<std::size_t>(it - pts_.begin()) - 1;
}

double PiecewiseLinear::eval(double t) const {
    if (t <= 0.0) return 0.0;
    if (std::isinf(t)) {
        const Breakpoint& last = pts_.back();
        return last.slope > 0.0 ? kInfinity : last.y;
    }
    const Breakpoint& p = pts_[segmentIndexLeft(t)];
    return p.y + p.slope * (t - p.t);
}

double PiecewiseLinear::evalRight(double t) const {
    if (t < 0.0) return 0.0;
    if (std::isinf(t)) return eval(t);
    auto it = std::upper_bound(pts_.begin(), pts_.end(), t,
                               [](double v, const Breakpoint& p) { return v < p.t; });
    if (it == pts_.begin()) return 0.0;
    const Breakpoint& p = *(it - 1);
    return p.y + p.slope * (t - p.t);
}

double PiecewiseLinear::jumpAt(std::size_t i) const {
    if (i == 0) return pts_[0].y;  // left value at t=0 is 0 by definition
    const Breakpoint& prev = pts_[i - 1];
    return pts_[i].y - (prev.y + prev.slope * (pts_[i].t - prev.t));
}

bool PiecewiseLinear::isNonDecreasing() const {
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (pts_[i].slope < -kEpsBits) return false;
        if (jumpAt(i) < -kEpsBits) return false;
    }
    return true;
}

double PiecewiseLinear::maxDifference(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    double worst = -kInfinity;
    auto probe = [&](double t) {
        worst = std::max(worst, f.eval(t) - g.eval(t));
        worst = std::max(worst, f.evalRight(t) - g.evalRight(t));
    };
    for (const Breakpoint& p : f.pts_) probe(p.t);
    for (const Breakpoint& p : g.pts_) probe(p.t);
    probe(std::min(f.horizon(), g.horizon()));
    return worst;
}

PiecewiseLinear PiecewiseLinear::withHorizon(double h) const {
    std::vector<Breakpoint> pts;
    for (const Breakpoint& p : pts_) {
        if (p.t <= h + kEpsTime) pts.push_back(p);
    }
    return PiecewiseLinear(std::move(pts), h);
}

PiecewiseLinear PiecewiseLinear::replaceFrom(double cut, const PiecewiseLinear& tail,
                                             double offset, bool allow_rewind) const {
    if (cut < 0.0) throw std::invalid_argument("replaceFrom: negative cut");
    const double left_value = eval(cut);
    const double new_right = tail.evalRight(0.0) + offset;
    if (new_right < left_value - kEpsBits && !allow_rewind)
        throw std::runtime_error("stitch would decrease at the junction");

    std::vector<Breakpoint> pts;
    for (const Breakpoint& p : pts_) {
        if (p.t < cut - kEpsTime)
            pts.push_back(p);
        else
            break;
    }
    const auto& tp = tail.breakpoints();
    pts.push_back({cut, tp.front().y + offset, tp.front().slope});
    for (std::size_t i = 1; i < tp.size(); ++i)
        pts.push_back({tp[i].t + cut, tp[i].y + offset, tp[i].slope});
    const double h = std::max(horizon_, cut + tail.horizon());
    return PiecewiseLinear(std::move(pts), h);
}

PiecewiseLinear PiecewiseLinear::delayed(double d) const {
    if (d < 0.0) throw std::invalid_argument("delayed: negative delay");
    if (d == 0.0) return *this;
    std::vector<Breakpoint> pts;
    pts.push_back({0.0, 0.0, 0.0});
    for (const Breakpoint& p : pts_) pts.push_back({p.t + d, p.y, p.slope});
    return PiecewiseLinear(std::move(pts), horizon_ + d);
}

namespace {

double slopeRight(const PiecewiseLinear& f, double t) {
    const auto& pts = f.breakpoints();
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](double v, const Breakpoint& p) { return v < p.t; });
    if (it == pts.begin()) return 0.0;
    return (it - 1)->slope;
}

// First t in (from, ub] where f(t) is above `level` (strictly or not),
// with infimum semantics: the returned time is the left boundary of the
// region where the condition holds and need not satisfy it itself.
std::optional<double> firstTime(const PiecewiseLinear& f, double level, double from, double ub,
                                bool strict) {
    if (!(ub > from)) return std::nullopt;
    auto holds = [&](double v) { return strict ? v > level : v >= level; };
    std::vector<double> ts;
    ts.push_back(from);
    for (const Breakpoint& p : f.breakpoints())
        if (p.t > from && p.t < ub) ts.push_back(p.t);
    ts.push_back(ub);
    std::sort(ts.begin(), ts.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double u = ts[i], v = ts[i + 1];
        if (u > from && holds(f.eval(u))) return u;
        const double y0 = f.evalRight(u);
        const double s = slopeRight(f, u);
        if (holds(y0)) return u;
        if (!strict && y0 == level) return u;
        if (strict && y0 >= level && s > 0.0) return u;
        if (s > 0.0 && y0 < level) {
            const double tc = u + (level - y0) / s;
            if (tc <= v + kEpsTime) return std::min(std::max(tc, u), v);
        }
    }
    if (holds(f.eval(ub))) return ub;
    return std::nullopt;
}

std::vector<double> mergedTimes(const PiecewiseLinear& f, const PiecewiseLinear& g, double cap) {
    std::vector<double> ts;
    for (const Breakpoint& p : f.breakpoints())
        if (p.t <= cap) ts.push_back(p.t);
    for (const Breakpoint& p : g.breakpoints())
        if (p.t <= cap) ts.push_back(p.t);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [](double a, double b) { return b - a <= kEpsTime; }),
             ts.end());
    return ts;
}

}  // namespace

std::optional<double> PiecewiseLinear::firstTimeAbove(double level, double from, double ub) const {
    return firstTime(*this, level, from, ub, true);
}

std::optional<double> PiecewiseLinear::firstTimeAtLeast(double level, double from,
                                                        double ub) const {
    return firstTime(*this, level, from, ub, false);
}

PiecewiseLinear add(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    const double h = std::min(f.horizon(), g.horizon());
    std::vector<Breakpoint> pts;
    for (double t : mergedTimes(f, g, h)) {
        pts.push_back({t, f.evalRight(t) + g.evalRight(t), slopeRight(f, t) + slopeRight(g, t)});
    }
    return PiecewiseLinear(std::move(pts), h);
}

PiecewiseLinear subtract(const PiecewiseLinear& f, const PiecewiseLinear& g) {
    const double h = std::min(f.horizon(), g.horizon());
    std::vector<Breakpoint> pts;
    for (double t : mergedTimes(f, g, h)) {
        pts.push_back({t, f.evalRight(t) - g.evalRight(t), slopeRight(f, t) - slopeRight(g, t)});
    }
    return PiecewiseLinear(std::move(pts), h);
}

std::string PiecewiseLinear::toCsv() const {
    std::string out = "t,y,slope,jump\n";
    char buf[128];
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", pts_[i].t, pts_[i].y,
                      pts_[i].slope, jumpAt(i));
        out += buf;
    }
    return out;
}

}  // namespace ncc
