#include "ncc/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ncc {
namespace oracle {

std::vector<GridSample> grid_convolve(const CumulativeFunction& f, const CumulativeFunction& g,
                                      int n_points) {
    if (n_points < 100) throw std::invalid_argument("grid_convolve: n_points < 100");
    const double T = std::min(f.horizon(), g.horizon());

    std::vector<double> f_marks, g_marks;
    for (const Breakpoint& p : f.breakpoints()) f_marks.push_back(p.t);
    for (const Breakpoint& p : g.breakpoints()) g_marks.push_back(p.t);

    std::vector<GridSample> out;
    out.reserve(static_cast<std::size_t>(n_points) + 1);
    for (int k = 0; k <= n_points; ++k) {
        const double t = T * static_cast<double>(k) / static_cast<double>(n_points);
        // s-candidates: uniform grid + breakpoints of f + (t - breakpoints of g)
        std::vector<double> ss;
        ss.reserve(static_cast<std::size_t>(n_points) + f_marks.size() + g_marks.size() + 2);
        for (int j = 0; j <= n_points; ++j) {
            const double s = t * static_cast<double>(j) / static_cast<double>(n_points);
            ss.push_back(s);
        }
        for (double s : f_marks)
            if (s >= 0.0 && s <= t) ss.push_back(s);
        for (double c : g_marks)
            if (t - c >= 0.0 && t - c <= t) ss.push_back(t - c);
        double best = kInfinity;
        for (double s : ss) {
            const double u = t - s;
            best = std::min(best, f.eval(s) + g.eval(u));
            // One-sided limits: both combinations that can realize the infimum
            // at discontinuities (the mixed limits collapse by left-continuity).
            best = std::min(best, f.evalRight(s) + g.eval(u));
            best = std::min(best, f.eval(s) + g.evalRight(u));
        }
        out.push_back({t, best});
    }
    return out;
}

FifoResult packet_fifo_sim(const std::vector<PacketTrace>& traces, double rate_c, double delta_r,
                           double horizon) {
    if (rate_c <= 0.0) throw std::invalid_argument("packet_fifo_sim: rate must be positive");
    struct Job {
        double arrival;
        int flow;
        double size;
    };
    std::vector<Job> jobs;
    for (std::size_t fl = 0; fl < traces.size(); ++fl) {
        double prev = 0.0;
        for (const Packet& p : traces[fl]) {
            if (p.size <= 0.0) throw std::invalid_argument("packet_fifo_sim: non-positive size");
            if (p.arrival < prev - kEpsTime)
                throw std::invalid_argument("packet_fifo_sim: arrivals must be non-decreasing");
            prev = p.arrival;
            jobs.push_back({p.arrival, static_cast<int>(fl), p.size});
        }
    }
    // FIFO with ties broken by ascending flow id, then input order.
    std::stable_sort(jobs.begin(), jobs.end(), [](const Job& a, const Job& b) {
        if (a.arrival != b.arrival) return a.arrival < b.arrival;
        return a.flow < b.flow;
    });

    std::vector<std::vector<Breakpoint>> steps(traces.size());
    std::vector<Breakpoint> agg_steps;
    std::vector<double> flow_total(traces.size(), 0.0);
    double agg_total = 0.0;
    double server_free = 0.0;
    for (const Job& j : jobs) {
        const double start = std::max(server_free, j.arrival);
        const double finish = start + j.size / rate_c;
        server_free = finish;
        const double t_dep = finish + delta_r;
        flow_total[j.flow] += j.size;
        agg_total += j.size;
        steps[j.flow].push_back({t_dep, flow_total[j.flow], 0.0});
        agg_steps.push_back({t_dep, agg_total, 0.0});
    }

    const double h = std::max(horizon, server_free + delta_r);
    FifoResult res{std::vector<CumulativeFunction>{}, CumulativeFunction::zero(h)};
    for (std::size_t fl = 0; fl < traces.size(); ++fl)
        res.per_flow.push_back(CumulativeFunction(steps[fl], h));
    res.aggregate = CumulativeFunction(agg_steps, h);

    // Internal conservation: per-flow departures must add up to the aggregate.
    double sum = 0.0;
    for (const auto& tot : flow_total) sum += tot;
    if (std::fabs(sum - agg_total) > kEpsBits)
        throw std::runtime_error("packet_fifo_sim: conservation violated");
    return res;
}

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double uniform01(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t z = splitmix64(seed ^ splitmix64(counter));
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

}  // namespace oracle
}  // namespace ncc
