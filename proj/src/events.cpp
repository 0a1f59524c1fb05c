#include "ncc/events.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ncc/oracle.hpp"
#include "ncc/pseudo_inverse.hpp"

namespace ncc {

void EcnState::validate() const {
    if (!(p_max > 0.0 && p_max <= 1.0)) throw std::invalid_argument("ecn: p_max out of (0,1]");
    if (!(k_min < k_max)) throw std::invalid_argument("ecn: k_min must be below k_max");
    if (delta_tau_ecn < 0.0) throw std::invalid_argument("ecn: negative notification gap");
    if (i_max <= 0.0) throw std::invalid_argument("ecn: packet size must be positive");
}

void PfcState::validate() const {
    if (!(x_on < x_off)) throw std::invalid_argument("pfc: x_on must be below x_off");
    if (line_rate <= 0.0) throw std::invalid_argument("pfc: line rate must be positive");
}

CumulativeFunction ack_function(const CumulativeFunction& departed, double delta_r,
                                std::optional<double> i_max) {
    CumulativeFunction fluid(departed.delayed(delta_r));
    if (!i_max) return fluid;
    const double quantum = *i_max;
    if (quantum <= 0.0) throw std::invalid_argument("ack_function: i_max must be positive");
    // Staircase: steps of height quantum at the times fluid crosses multiples.
    std::vector<Breakpoint> pts;
    const double top = fluid.eval(fluid.horizon());
    std::uint64_t k = 1;
    while (static_cast<double>(k) * quantum <= top + kEpsBits) {
        const double level = static_cast<double>(k) * quantum;
        const double t = lower_inverse_at(fluid, level);
        if (std::isinf(t)) break;
        pts.push_back({t, level, 0.0});
        ++k;
    }
    return CumulativeFunction(std::move(pts), fluid.horizon());
}

std::optional<double> next_timeout(const CumulativeFunction& admitted,
                                   const CumulativeFunction& departed, double delta_r,
                                   double tau_o, double t_from, double ub) {
    if (!(tau_o > delta_r))
        throw std::invalid_argument("next_timeout: tau_o must exceed delta_r");
    const PiecewiseLinear acks = departed.delayed(delta_r);
    const PiecewiseLinear timeout_fn = admitted.delayed(tau_o);
    return first_crossing_below(acks, timeout_fn, t_from, ub);
}

namespace {

// Admission instant of packet k (1-based): inf{ t : admitted(t) >= k*i_max }.
double packetTime(const PiecewiseLinear& admitted, double i_max, std::uint64_t k) {
    return lower_inverse_at(admitted, static_cast<double>(k) * i_max);
}

// First packet index whose admission instant is >= t.
std::uint64_t firstPacketAtOrAfter(const PiecewiseLinear& admitted, double i_max, double t) {
    const double seen = admitted.eval(t);
    return static_cast<std::uint64_t>(std::floor(seen / i_max + 1e-12)) + 1;
}

enum class Zone { Below, Red, Saturated };

Zone classify(double b, const EcnState& st) {
    if (b >= st.k_max) return Zone::Saturated;
    if (b > st.k_min) return Zone::Red;
    return Zone::Below;
}

// Apply the three-case schedule to a mark attempt at time tau. Returns the
// send time, or nullopt if a notification is already scheduled past tau.
std::optional<EcnMark> scheduleAttempt(double tau, std::uint64_t next_k, const EcnState& st) {
    const double tu = st.t_underline;
    if (tau - tu >= st.delta_tau_ecn) return EcnMark{tau, next_k, tau};
    if (tau >= tu) return EcnMark{tu + st.delta_tau_ecn, next_k, tu + st.delta_tau_ecn};
    return std::nullopt;  // tau < t_underline: already scheduled
}

}  // namespace

std::optional<EcnMark> ecn_next_mark(const PiecewiseLinear& backlog,
                                     const PiecewiseLinear& admitted, const EcnState& state,
                                     std::uint64_t packet_index_from, double t_from,
                                     double horizon) {
    state.validate();
    // Zone boundaries: backlog breakpoints plus threshold crossings.
    std::vector<double> ts;
    ts.push_back(std::max(t_from, 0.0));
    for (const Breakpoint& p : backlog.breakpoints())
        if (p.t > t_from && p.t < horizon) ts.push_back(p.t);
    ts.push_back(horizon);
    std::sort(ts.begin(), ts.end());

    std::uint64_t k = std::max<std::uint64_t>(packet_index_from, 1);
    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        double u = ts[i];
        const double v = ts[i + 1];
        if (v - u <= 0.0) continue;
        // Split the affine backlog run at threshold crossings.
        std::vector<double> cuts{u};
        const double b0 = backlog.evalRight(u);
        const double b1 = backlog.eval(v);
        const double s = (b1 - b0) / (v - u);
        for (double level : {state.k_min, state.k_max}) {
            if (s != 0.0) {
                const double tc = u + (level - b0) / s;
                if (tc > u && tc < v) cuts.push_back(tc);
            }
        }
        cuts.push_back(v);
        std::sort(cuts.begin(), cuts.end());
        for (std::size_t c = 0; c + 1 < cuts.size(); ++c) {
            const double a = cuts[c], b = cuts[c + 1];
            if (b - a <= 0.0) continue;
            const double mid_backlog = backlog.evalRight(a) +
                                       (backlog.eval(b) - backlog.evalRight(a)) * 0.5;
            const Zone zone = classify(mid_backlog, state);
            if (zone == Zone::Below) continue;
            if (zone == Zone::Saturated) {
                // Every packet in the run attempts; the attempt stream is
                // effectively continuous, so only the earliest live attempt
                // and the scheduler gate matter.
                double probe = std::max(a, t_from);
                if (state.t_underline > probe && state.t_underline <= b)
                    probe = state.t_underline;  // earlier attempts are case-3 no-ops
                std::uint64_t kk = firstPacketAtOrAfter(admitted, state.i_max, probe);
                const double tau = packetTime(admitted, state.i_max, kk);
                if (!std::isinf(tau) && tau <= b + kEpsTime) {
                    auto m = scheduleAttempt(std::max(tau, probe), kk + 1, state);
                    if (m && m->t_send <= horizon) return m;
                    if (m && m->t_send > horizon) return std::nullopt;
                }
                k = firstPacketAtOrAfter(admitted, state.i_max, b);
                continue;
            }
            // RED zone: per-packet Bernoulli draws.
            std::uint64_t kk = std::max(k, firstPacketAtOrAfter(admitted, state.i_max,
                                                                std::max(a, t_from)));
            while (true) {
                const double tau = packetTime(admitted, state.i_max, kk);
                if (std::isinf(tau) || tau > b + kEpsTime) break;
                const double bl = backlog.eval(tau);
                const double p = state.p_max * (bl - state.k_min) / (state.k_max - state.k_min);
                if (oracle::uniform01(state.rng_seed, kk) < p) {
                    auto m = scheduleAttempt(tau, kk + 1, state);
                    if (m && m->t_send <= horizon) return m;
                    if (m && m->t_send > horizon) return std::nullopt;
                }
                ++kk;
            }
            k = std::max(k, kk);
        }
    }
    return std::nullopt;
}

std::vector<double> ecn_mark_times(const PiecewiseLinear& backlog,
                                   const PiecewiseLinear& admitted, EcnState state,
                                   double t_from, double horizon) {
    std::vector<double> out;
    std::uint64_t k = 1;
    double from = t_from;
    while (true) {
        auto m = ecn_next_mark(backlog, admitted, state, k, from, horizon);
        if (!m) break;
        out.push_back(m->t_send);
        state.t_underline = m->t_underline_after;
        k = m->next_packet_index;
        from = m->t_send;
        if (out.size() > 1000000) throw std::runtime_error("ecn_mark_times: runaway schedule");
    }
    return out;
}

std::optional<std::pair<double, double>> pfc_schedule(const PiecewiseLinear& backlog,
                                                      const PfcState& state, double t_from,
                                                      double ub) {
    state.validate();
    const PiecewiseLinear lagged = backlog.delayed(state.delta_r);
    const double cap = std::min(ub, lagged.horizon());
    auto t_p = lagged.firstTimeAbove(state.x_off, t_from, cap);
    // Inclusive left end: the condition may already hold at t_from.
    if (!t_p && lagged.eval(t_from) > state.x_off) t_p = t_from;
    if (!t_p) return std::nullopt;
    return std::make_pair(*t_p, *t_p + state.pauseDuration());
}

std::pair<CumulativeFunction, ShiftRecord> shift_after_timeout(const CumulativeFunction& arrival,
                                                               const CumulativeFunction& departed,
                                                               double t_to, double delta_r) {
    const double y = departed.eval(t_to - delta_r);
    if (y > arrival.eval(t_to) + kEpsBits)
        throw std::runtime_error("shift_after_timeout: acked traffic exceeds arrivals");
    CumulativeFunction rem = shift(arrival, t_to, y);
    return {std::move(rem), ShiftRecord{t_to, y, ShiftRecord::Kind::Timeout}};
}

std::pair<CumulativeFunction, ShiftRecord> shift_after_admit(const CumulativeFunction& arrival,
                                                             const PiecewiseLinear& admitted,
                                                             double t_event,
                                                             ShiftRecord::Kind kind) {
    const double y = admitted.eval(t_event);
    if (y > arrival.eval(t_event) + kEpsBits)
        throw std::runtime_error("shift_after_admit: admitted traffic exceeds arrivals");
    CumulativeFunction rem = shift(arrival, t_event, y);
    return {std::move(rem), ShiftRecord{t_event, y, kind}};
}

PiecewiseLinear stitch(const PiecewiseLinear& global_fn, const CumulativeFunction& local_fn,
                       const ShiftRecord& record) {
    const bool allow_rewind = record.kind == ShiftRecord::Kind::Timeout;
    return global_fn.replaceFrom(record.t_origin, local_fn, record.y_origin, allow_rewind);
}

}  // namespace ncc
