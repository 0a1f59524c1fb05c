#include "ncc/trace.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

namespace ncc {

const char* to_string(EventKind k) {
    switch (k) {
        case EventKind::Timeout: return "timeout";
        case EventKind::AdditiveIncrease: return "additive_increase";
        case EventKind::Cnp: return "cnp";
        case EventKind::Pause: return "pause";
        case EventKind::Resume: return "resume";
        case EventKind::WindowUpdate: return "window_update";
        case EventKind::FlightComplete: return "flight_complete";
        case EventKind::SlowStartExit: return "slow_start_exit";
    }
    return "unknown";
}

std::string event_log_csv(const EventLog& log) {
    std::string out = "t,event_kind,flow_id,detail\n";
    char buf[256];
    for (const Event& e : log) {
        std::snprintf(buf, sizeof(buf), "%.12g,%s,%d,%s\n", e.t, to_string(e.kind), e.flow_id,
                      e.detail.c_str());
        out += buf;
    }
    return out;
}

void StepSeries::set(double t, double value) {
    if (!pts_.empty() && t < pts_.back().first)
        return;  // out-of-order writes are dropped; series is append-only
    if (!pts_.empty() && t == pts_.back().first) {
        pts_.back().second = value;
        return;
    }
    pts_.push_back({t, value});
}

double StepSeries::at(double t) const {
    if (pts_.empty()) return 0.0;
    auto it = std::upper_bound(pts_.begin(), pts_.end(), t,
                               [](double v, const std::pair<double, double>& p) {
                                   return v < p.first;
                               });
    if (it == pts_.begin()) return pts_.front().second;
    return (it - 1)->second;
}

std::string FlowTrace::csv(double resolution) const {
    std::string out = "# ncc-csv v1\nt,rate_or_window,backlog,admitted,departed\n";
    char buf[256];
    const double h = admitted.horizon();
    for (double t = 0.0; t <= h + resolution * 0.5; t += resolution) {
        const double adm = admitted.eval(t);
        const double dep = departed.eval(t);
        std::snprintf(buf, sizeof(buf), "%.9g,%.9g,%.9g,%.9g,%.9g\n", t, control.at(t),
                      std::max(adm - dep, 0.0), adm, dep);
        out += buf;
    }
    return out;
}

std::vector<std::string> check_flow_invariants(const FlowTrace& tr, double sample_step) {
    std::vector<std::string> bad;
    const double h = tr.admitted.horizon();
    auto is_rewind = [&tr](double t) {
        for (double r : tr.rewind_times)
            if (std::fabs(r - t) <= 1e-9) return true;
        return false;
    };

    // D <= admitted <= A pointwise, backlog >= 0.
    for (double t = 0.0; t <= h + sample_step * 0.5; t += sample_step) {
        const double a = tr.source.eval(t);
        const double adm = tr.admitted.eval(t);
        const double dep = tr.departed.eval(t);
        if (adm > a + kEpsBits) {
            bad.push_back("admitted exceeds source at t=" + std::to_string(t));
            break;
        }
        if (dep > adm + kEpsBits) {
            bad.push_back("departed exceeds admitted at t=" + std::to_string(t));
            break;
        }
    }

    // Monotone within epochs: down-steps only at recorded timeout junctions.
    auto check_monotone = [&](const PiecewiseLinear& f, const std::string& name) {
        const auto& pts = f.breakpoints();
        for (std::size_t i = 0; i < pts.size(); ++i) {
            if (pts[i].slope < 0.0) {
                bad.push_back(name + " has a negative slope at t=" + std::to_string(pts[i].t));
                return;
            }
            if (f.jumpAt(i) < -kEpsBits && !is_rewind(pts[i].t)) {
                bad.push_back(name + " decreases outside a timeout junction at t=" +
                              std::to_string(pts[i].t));
                return;
            }
        }
    };
    check_monotone(tr.admitted, "admitted");
    check_monotone(tr.departed, "departed");
    check_monotone(tr.transmitted, "transmitted");
    if (!tr.transmitted.isNonDecreasing())
        bad.push_back("transmitted counter is not monotone");
    return bad;
}

}  // namespace ncc
