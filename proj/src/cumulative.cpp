#include "ncc/cumulative.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncc {

CumulativeFunction::CumulativeFunction(std::vector<Breakpoint> pts, double horizon)
    : PiecewiseLinear(std::move(pts), horizon) {
    // Snap fp dust on values; slopes are carried exactly by all operations.
    for (Breakpoint& p : pts_) {
        if (p.y < 0.0 && p.y >= -kEpsBits) p.y = 0.0;
    }
    validate();
}

CumulativeFunction::CumulativeFunction(const PiecewiseLinear& plf)
    : CumulativeFunction(plf.breakpoints(), plf.horizon()) {}

CumulativeFunction CumulativeFunction::zero(double horizon) {
    return CumulativeFunction({{0.0, 0.0, 0.0}}, horizon);
}

CumulativeFunction CumulativeFunction::rate(double r, double horizon) {
    if (r < 0.0) throw std::invalid_argument("rate curve: negative rate");
    return CumulativeFunction({{0.0, 0.0, r}}, horizon);
}

CumulativeFunction CumulativeFunction::window(double w, double horizon) {
    if (w < 0.0) throw std::invalid_argument("window curve: negative window");
    return CumulativeFunction({{0.0, w, 0.0}}, horizon);
}

CumulativeFunction CumulativeFunction::tokenBucket(double b, double r, double horizon) {
    if (b < 0.0 || r < 0.0) throw std::invalid_argument("token bucket: negative parameter");
    return CumulativeFunction({{0.0, b, r}}, horizon);
}

void CumulativeFunction::validate() const {
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        if (pts_[i].slope < 0.0)
            throw std::runtime_error("cumulative function has a negative slope");
        if (pts_[i].y < -kEpsBits)
            throw std::runtime_error("cumulative function has a negative value");
        if (jumpAt(i) < -kEpsBits)
            throw std::runtime_error("cumulative function decreases at a breakpoint");
        if (i > 0 && pts_[i].t - pts_[i - 1].t <= 0.0)
            throw std::runtime_error("cumulative function breakpoints not increasing");
    }
}

std::vector<Segment> CumulativeFunction::decompose() const {
    std::vector<Segment> segs;
    for (std::size_t i = 0; i < pts_.size(); ++i) {
        const double end = (i + 1 < pts_.size()) ? pts_[i + 1].t : horizon_;
        if (end - pts_[i].t <= 0.0) continue;
        segs.push_back({pts_[i].t, end, pts_[i].y, pts_[i].slope, jumpAt(i)});
    }
    return segs;
}

ArrivalBuilder& ArrivalBuilder::burst(double t, double bits) {
    if (bits < 0.0) throw std::invalid_argument("burst: negative size");
    items_.push_back({t, bits, 0.0, false});
    return *this;
}

ArrivalBuilder& ArrivalBuilder::rate(double t, double bits_per_second) {
    if (bits_per_second < 0.0) throw std::invalid_argument("rate: negative rate");
    items_.push_back({t, 0.0, bits_per_second, true});
    return *this;
}

CumulativeFunction ArrivalBuilder::build(double horizon) const {
    std::vector<Item> items = items_;
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& a, const Item& b) { return a.t < b.t; });
    std::vector<Breakpoint> pts;
    double y = 0.0, slope = 0.0, t_prev = 0.0;
    pts.push_back({0.0, 0.0, 0.0});
    for (const Item& it : items) {
        if (it.t < 0.0) throw std::invalid_argument("arrival item before t=0");
        y += slope * (it.t - t_prev);
        t_prev = it.t;
        y += it.jump;
        if (it.has_slope) slope = it.slope;
        pts.push_back({it.t, y, slope});
    }
    return CumulativeFunction(std::move(pts), horizon);
}

namespace {

// Affine candidate piece on the closed interval [t0, t1].
struct EnvPiece {
    double t0, t1, y0, slope;
    double at(double t) const { return y0 + slope * (t - t0); }
};

// Point of the decomposition: (t_i, value at t_i from the left).
struct DecompPoint {
    double t, y;
};

void decomposeFor(const CumulativeFunction& f, std::vector<DecompPoint>& points,
                  std::vector<EnvPiece>& segs) {
    const auto& pts = f.breakpoints();
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double left =
            (i == 0) ? 0.0
                     : pts[i - 1].y + pts[i - 1].slope * (pts[i].t - pts[i - 1].t);
        points.push_back({pts[i].t, left});
        const double end = (i + 1 < pts.size()) ? pts[i + 1].t : f.horizon();
        if (end - pts[i].t > 0.0) segs.push_back({pts[i].t, end, pts[i].y, pts[i].slope});
    }
}

void pushClipped(std::vector<EnvPiece>& out, EnvPiece p, double cap) {
    if (p.t0 >= cap) return;
    p.t1 = std::min(p.t1, cap);
    if (p.t1 - p.t0 <= 0.0) return;
    out.push_back(p);
}

// Lower envelope of two piece lists (disjoint interiors within each list).
std::vector<EnvPiece> mergeEnvelopes(const std::vector<EnvPiece>& a,
                                     const std::vector<EnvPiece>& b) {
    if (a.empty()) return b;
    if (b.empty()) return a;
    std::vector<double> ts;
    ts.reserve(2 * (a.size() + b.size()));
    for (const EnvPiece& p : a) {
        ts.push_back(p.t0);
        ts.push_back(p.t1);
    }
    for (const EnvPiece& p : b) {
        ts.push_back(p.t0);
        ts.push_back(p.t1);
    }
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end()), ts.end());

    std::vector<EnvPiece> out;
    out.reserve(a.size() + b.size());
    std::size_t ia = 0, ib = 0;
    auto emit = [&out](const EnvPiece& src, double u, double v) {
        if (v - u <= 0.0) return;
        EnvPiece p{u, v, src.at(u), src.slope};
        if (!out.empty()) {
            EnvPiece& last = out.back();
            if (last.t1 == u && last.slope == p.slope &&
                std::fabs(last.at(u) - p.y0) <= 1e-9 * std::max(1.0, std::fabs(p.y0))) {
                last.t1 = v;  // extend collinear run
                return;
            }
        }
        out.push_back(p);
    };
    for (std::size_t k = 0; k + 1 < ts.size(); ++k) {
        const double u = ts[k], v = ts[k + 1];
        if (v - u <= 0.0) continue;
        while (ia < a.size() && a[ia].t1 <= u) ++ia;
        while (ib < b.size() && b[ib].t1 <= u) ++ib;
        const EnvPiece* pa = (ia < a.size() && a[ia].t0 <= u && a[ia].t1 >= v) ? &a[ia] : nullptr;
        const EnvPiece* pb = (ib < b.size() && b[ib].t0 <= u && b[ib].t1 >= v) ? &b[ib] : nullptr;
        if (!pa && !pb) continue;
        if (pa && !pb) {
            emit(*pa, u, v);
            continue;
        }
        if (pb && !pa) {
            emit(*pb, u, v);
            continue;
        }
        const double d0 = pa->at(u) - pb->at(u);
        const double d1 = pa->at(v) - pb->at(v);
        if (d0 <= 0.0 && d1 <= 0.0) {
            emit(*pa, u, v);
        } else if (d0 >= 0.0 && d1 >= 0.0) {
            emit(*pb, u, v);
        } else {
            const double tau = u + d0 * (v - u) / (d0 - d1);
            if (d0 < 0.0) {
                emit(*pa, u, tau);
                emit(*pb, tau, v);
            } else {
                emit(*pb, u, tau);
                emit(*pa, tau, v);
            }
        }
    }
    return out;
}

std::vector<EnvPiece> lowerEnvelope(std::vector<std::vector<EnvPiece>> lists) {
    if (lists.empty()) return {};
    while (lists.size() > 1) {
        std::vector<std::vector<EnvPiece>> next;
        next.reserve((lists.size() + 1) / 2);
        for (std::size_t i = 0; i + 1 < lists.size(); i += 2)
            next.push_back(mergeEnvelopes(lists[i], lists[i + 1]));
        if (lists.size() % 2 == 1) next.push_back(std::move(lists.back()));
        lists = std::move(next);
    }
    return std::move(lists.front());
}

}  // namespace

CumulativeFunction convolve(const CumulativeFunction& f0, const CumulativeFunction& g0) {
    const double T = std::min(f0.horizon(), g0.horizon());
    const CumulativeFunction f = f0.horizon() > T ? f0.truncated(T) : f0;
    const CumulativeFunction g = g0.horizon() > T ? g0.truncated(T) : g0;

    std::vector<DecompPoint> fp, gp;
    std::vector<EnvPiece> fs, gs;
    decomposeFor(f, fp, fs);
    decomposeFor(g, gp, gs);

    std::vector<std::vector<EnvPiece>> lists;
    lists.reserve(fs.size() * gp.size() + gs.size() * fp.size() + fs.size() * gs.size());

    auto addList = [&lists](std::vector<EnvPiece> v) {
        if (!v.empty()) lists.push_back(std::move(v));
    };

    // segment of f shifted by a point of g (and vice versa)
    for (const EnvPiece& s : fs) {
        for (const DecompPoint& p : gp) {
            std::vector<EnvPiece> v;
            pushClipped(v, {s.t0 + p.t, s.t1 + p.t, s.y0 + p.y, s.slope}, T);
            addList(std::move(v));
        }
    }
    for (const EnvPiece& s : gs) {
        for (const DecompPoint& p : fp) {
            std::vector<EnvPiece> v;
            pushClipped(v, {s.t0 + p.t, s.t1 + p.t, s.y0 + p.y, s.slope}, T);
            addList(std::move(v));
        }
    }
    // segment x segment: concatenation in ascending slope order
    for (const EnvPiece& sf : fs) {
        for (const EnvPiece& sg : gs) {
            const EnvPiece& lo = (sf.slope <= sg.slope) ? sf : sg;
            const EnvPiece& hi = (sf.slope <= sg.slope) ? sg : sf;
            const double a = sf.t0 + sg.t0;
            const double len_lo = lo.t1 - lo.t0;
            const double len_hi = hi.t1 - hi.t0;
            const double y = sf.y0 + sg.y0;
            std::vector<EnvPiece> v;
            pushClipped(v, {a, a + len_lo, y, lo.slope}, T);
            pushClipped(v, {a + len_lo, a + len_lo + len_hi, y + lo.slope * len_lo, hi.slope}, T);
            addList(std::move(v));
        }
    }

    std::vector<EnvPiece> env = lowerEnvelope(std::move(lists));
    std::vector<Breakpoint> pts;
    pts.reserve(env.size());
    for (const EnvPiece& p : env) pts.push_back({p.t0, p.y0, p.slope});
    return CumulativeFunction(std::move(pts), T);
}

CumulativeFunction pointwise_min(const CumulativeFunction& f, const CumulativeFunction& g) {
    const double T = std::min(f.horizon(), g.horizon());
    std::vector<DecompPoint> fp, gp;
    std::vector<EnvPiece> fs, gs;
    decomposeFor(f.horizon() > T ? f.truncated(T) : f, fp, fs);
    decomposeFor(g.horizon() > T ? g.truncated(T) : g, gp, gs);
    std::vector<EnvPiece> env = mergeEnvelopes(fs, gs);
    std::vector<Breakpoint> pts;
    for (const EnvPiece& p : env) pts.push_back({p.t0, p.y0, p.slope});
    return CumulativeFunction(std::move(pts), T);
}

CumulativeFunction add(const CumulativeFunction& f, const CumulativeFunction& g) {
    return CumulativeFunction(
        add(static_cast<const PiecewiseLinear&>(f), static_cast<const PiecewiseLinear&>(g)));
}

CumulativeFunction shift(const CumulativeFunction& f, double dt, double dy) {
    if (dt < 0.0) throw std::invalid_argument("shift: negative time offset");
    const double first = f.evalRight(dt) - dy;
    if (first < -kEpsBits)
        throw std::runtime_error("shift would produce a decreasing function");
    std::vector<Breakpoint> pts;
    // Slope right of dt governs the first new segment.
    double slope0 = 0.0;
    for (const Breakpoint& p : f.breakpoints()) {
        if (p.t <= dt) slope0 = p.slope;
    }
    pts.push_back({0.0, std::max(first, 0.0), slope0});
    for (const Breakpoint& p : f.breakpoints()) {
        if (p.t > dt + kEpsTime) pts.push_back({p.t - dt, std::max(p.y - dy, 0.0), p.slope});
    }
    const double h = std::max(f.horizon() - dt, pts.back().t);
    return CumulativeFunction(std::move(pts), h);
}

std::optional<double> first_crossing_below(const PiecewiseLinear& f, const PiecewiseLinear& g,
                                           double t_from, double ub) {
    const double cap = std::min({ub, f.horizon(), g.horizon()});
    if (!(cap > t_from)) return std::nullopt;
    std::vector<double> ts;
    ts.push_back(t_from);
    for (const Breakpoint& p : f.breakpoints())
        if (p.t > t_from && p.t < cap) ts.push_back(p.t);
    for (const Breakpoint& p : g.breakpoints())
        if (p.t > t_from && p.t < cap) ts.push_back(p.t);
    ts.push_back(cap);
    std::sort(ts.begin(), ts.end());
    ts.erase(std::unique(ts.begin(), ts.end(),
                         [](double a, double b) { return b - a <= kEpsTime; }),
             ts.end());
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        const double u = ts[i], v = ts[i + 1];
        if (u > t_from && f.eval(u) < g.eval(u) - kEpsBits) return u;
        const double d0 = f.evalRight(u) - g.evalRight(u);
        const double d1 = (f.eval(v) - g.eval(v));
        if (d0 < -kEpsBits) return u;
        const double sd = (d1 - d0) / (v - u);
        if (sd < 0.0) {
            const double tau = u - d0 / sd;
            if (tau <= v + kEpsTime) return std::min(std::max(tau, u), v);
        }
    }
    if (f.eval(cap) < g.eval(cap) - kEpsBits) return cap;
    return std::nullopt;
}

}  // namespace ncc
