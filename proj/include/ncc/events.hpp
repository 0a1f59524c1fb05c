#pragma once

#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "ncc/cumulative.hpp"

namespace ncc {

// ECN/RED marking state (switch side). t_underline is the send time of the
// most recent notification, or of one already scheduled in the future.
struct EcnState {
    double t_underline = -kInfinity;
    double k_min = 0.0;        // bits
    double k_max = 0.0;        // bits
    double p_max = 1.0;        // (0,1]
    double delta_tau_ecn = 0.0;  // min spacing between notifications, seconds
    double i_max = 8000.0;     // RED quantization unit: one packet, bits
    std::uint64_t rng_seed = 0;

    void validate() const;
};

// Link-level pause/resume state.
struct PfcState {
    double x_off = 0.0;   // bits
    double x_on = 0.0;    // bits
    double line_rate = 0.0;  // bits/s
    double delta_r = 0.0;
    std::vector<std::pair<double, double>> pauses;  // (t_P, t_R)

    double pauseDuration() const { return (x_off - x_on) / line_rate; }
    void validate() const;
};

// Coordinate-shift bookkeeping for stitching epochs back together.
struct ShiftRecord {
    enum class Kind { Timeout, AdditiveIncrease, FlightComplete, Cnp };
    double t_origin = 0.0;
    double y_origin = 0.0;
    Kind kind = Kind::AdditiveIncrease;
};

// Cumulative acknowledgement function: D delayed by delta_r; packetized to
// i_max-sized steps when i_max is given.
CumulativeFunction ack_function(const CumulativeFunction& departed, double delta_r,
                                std::optional<double> i_max = std::nullopt);

// Earliest t in (t_from, ub] with D(t - delta_r) < admitted(t - tau_o).
// Requires tau_o > delta_r.
std::optional<double> next_timeout(const CumulativeFunction& admitted,
                                   const CumulativeFunction& departed, double delta_r,
                                   double tau_o, double t_from,
                                   double ub = kInfinity);

// One ECN notification: the time it is sent at the switch plus the state
// advance that produced it.
struct EcnMark {
    double t_send;
    std::uint64_t next_packet_index;  // resume point for the RED packet scan
    double t_underline_after;
};

// Next notification send time at/after t_from given the current backlog and
// admitted functions (marks ride on admitted packets of size i_max).
std::optional<EcnMark> ecn_next_mark(const PiecewiseLinear& backlog,
                                     const PiecewiseLinear& admitted, const EcnState& state,
                                     std::uint64_t packet_index_from, double t_from,
                                     double horizon);

// All notification send times over [t_from, horizon]; test/debug surface.
std::vector<double> ecn_mark_times(const PiecewiseLinear& backlog,
                                   const PiecewiseLinear& admitted, EcnState state,
                                   double t_from, double horizon);

// Next pause interval after t_from: t_P = inf{s >= t_from : B(s - delta_r) > x_off},
// t_R = t_P + (x_off - x_on)/C. The caller gates admitted arrivals to slope 0
// during [t_P, t_R].
std::optional<std::pair<double, double>> pfc_schedule(const PiecewiseLinear& backlog,
                                                      const PfcState& state, double t_from,
                                                      double ub = kInfinity);

// Go-Back-N coordinate shift at a timeout: origin moves to
// (t_to, D(t_to - delta_r)); the unacknowledged traffic becomes the initial
// burst of the remaining arrival function.
std::pair<CumulativeFunction, ShiftRecord> shift_after_timeout(const CumulativeFunction& arrival,
                                                               const CumulativeFunction& departed,
                                                               double t_to, double delta_r);

// Shift at an admission-side event (additive increase, flight completion,
// window update): origin moves to (t_event, admitted(t_event)), keeping the
// not-yet-admitted backlog as an initial burst.
std::pair<CumulativeFunction, ShiftRecord> shift_after_admit(const CumulativeFunction& arrival,
                                                             const PiecewiseLinear& admitted,
                                                             double t_event,
                                                             ShiftRecord::Kind kind);

// Writes local_fn (+ y_origin) over global_fn for t >= t_origin. Timeout
// records may rewind the junction (Go-Back-N); any other decrease throws.
PiecewiseLinear stitch(const PiecewiseLinear& global_fn, const CumulativeFunction& local_fn,
                       const ShiftRecord& record);

}  // namespace ncc
