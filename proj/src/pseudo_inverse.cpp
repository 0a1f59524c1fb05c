#include "ncc/pseudo_inverse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace ncc {

namespace {

struct SegView {
    double t0, t1;  // (t0, t1]
    double left;    // f(t0)
    double y0;      // f(t0+)
    double slope;
};

std::vector<SegView> segViews(const PiecewiseLinear& f) {
    const auto& pts = f.breakpoints();
    std::vector<SegView> out;
    out.reserve(pts.size());
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double left =
            (i == 0) ? 0.0 : pts[i - 1].y + pts[i - 1].slope * (pts[i].t - pts[i - 1].t);
        const double end = (i + 1 < pts.size()) ? pts[i + 1].t : f.horizon();
        out.push_back({pts[i].t, end, left, pts[i].y, pts[i].slope});
    }
    return out;
}

}  // namespace

double upper_inverse_at(const PiecewiseLinear& f, double y) {
    if (y < 0.0) return 0.0;
    const auto segs = segViews(f);
    for (const SegView& s : segs) {
        if (s.y0 > y) return s.t0;  // f exceeds y across the jump at t0+
        const bool last = (&s == &segs.back());
        if (s.slope > 0.0) {
            const double xc = s.t0 + (y - s.y0) / s.slope;
            if (xc <= s.t1 || last) return xc;  // last segment extrapolates
        }
    }
    return kInfinity;  // f stays <= y forever
}

double lower_inverse_at(const PiecewiseLinear& f, double y) {
    if (y <= 0.0) return 0.0;
    const auto segs = segViews(f);
    for (const SegView& s : segs) {
        if (y <= s.y0) return s.t0;  // y lands in the jump at t0+
        const bool last = (&s == &segs.back());
        if (s.slope > 0.0) {
            const double xc = s.t0 + (y - s.y0) / s.slope;
            if (xc <= s.t1 || last) return xc;
        }
    }
    return kInfinity;  // f never reaches y
}

PseudoInverseMap::PseudoInverseMap(const PiecewiseLinear& f, bool upper) : upper_(upper) {
    const auto segs = segViews(f);
    auto push = [this](double y, double x, double slope) {
        if (!pts_.empty() && y - pts_.back().t <= kEpsBits) {
            pts_.back() = {pts_.back().t, x, slope};
            return;
        }
        pts_.push_back({y, x, slope});
    };
    for (const SegView& s : segs) {
        const bool last = (&s == &segs.back());
        const double jump = s.y0 - s.left;
        if (upper_) {
            if (jump > 0.0) push(s.left, s.t0, 0.0);  // jump of f -> plateau at t0
            if (s.slope > 0.0)
                push(s.y0, s.t0, 1.0 / s.slope);
            else if (!last)
                push(s.y0, s.t1, 0.0);  // plateau of f -> map jumps to its end
        } else {
            if (jump > 0.0) push(s.left, s.t0, 0.0);  // values in the jump -> t0
            if (s.slope > 0.0) push(s.y0, s.t0, 1.0 / s.slope);
        }
    }
    if (pts_.empty()) pts_.push_back({0.0, 0.0, 0.0});
    const SegView& tail = segs.back();
    y_max_ = tail.slope > 0.0 ? kInfinity : tail.y0;
}

double PseudoInverseMap::evalRight(double y) const {
    if (y < 0.0) return 0.0;
    if (y >= y_max_ && upper_) return kInfinity;
    if (y > y_max_) return kInfinity;
    auto it = std::upper_bound(pts_.begin(), pts_.end(), y,
                               [](double v, const Breakpoint& p) { return v < p.t; });
    if (it == pts_.begin()) return 0.0;
    const Breakpoint& p = *(it - 1);
    return p.y + p.slope * (y - p.t);
}

double PseudoInverseMap::evalLeft(double y) const {
    if (y <= 0.0) return 0.0;
    if (y > y_max_) return kInfinity;
    auto it = std::lower_bound(pts_.begin(), pts_.end(), y,
                               [](const Breakpoint& p, double v) { return p.t < v; });
    if (it == pts_.begin()) return 0.0;
    const Breakpoint& p = *(it - 1);
    return p.y + p.slope * (y - p.t);
}

double PseudoInverseMap::eval(double y) const { return upper_ ? evalRight(y) : evalLeft(y); }

std::string PseudoInverseMap::toCsv() const {
    std::string out = "y,t,slope,jump\n";
    char buf[128];
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        double jump;
        if (i == 0) {
            jump = pts_[0].y;
        } else {
            jump = pts_[i].y - (pts_[i - 1].y + pts_[i - 1].slope * (pts_[i].t - pts_[i - 1].t));
        }
        std::snprintf(buf, sizeof(buf), "%.12g,%.12g,%.12g,%.12g\n", pts_[i].t, pts_[i].y,
                      pts_[i].slope, jump);
        out += buf;
    }
    return out;
}

}  // namespace ncc
