#pragma once

#include <cstdint>
#include <vector>

#include "ncc/events.hpp"
#include "ncc/path_server.hpp"
#include "ncc/trace.hpp"

namespace ncc {

struct RateAimdParams {
    double alpha = 0.0;         // bits/s, additive step
    double beta = 0.5;          // (0,1), multiplicative decrease
    double tau_o = kInfinity;   // s, timeout
    double r_o = 0.0;           // bits/s, initial rate
    double delta_r = 0.0;       // s, feedback delay
    double delta_tau_ai = 0.0;  // s, interval between increases
    double t_end = 0.0;         // s

    void validate() const;
};

// Per-flow rate-based congestion control flavor for the shared-server loop.
struct RateCca {
    enum class Kind { Fixed, Aimd, Dcqcn };
    Kind kind = Kind::Aimd;
    double initial_rate = 0.0;
    double alpha = 0.0;            // additive step, bits/s
    double beta = 0.5;             // decrease factor on timeout
    double beta_cnp = 0.75;        // decrease factor on CNP delivery (Dcqcn)
    double delta_tau_ai = 0.0;     // increase interval (requires quiet window)
    double tau_o = kInfinity;      // timeout constant; infinity disables
};

struct EcnConfig {
    bool enabled = false;
    EcnState state;
};

struct PfcConfig {
    bool enabled = false;
    double x_off = 0.0;  // bits, per-flow threshold
    double x_on = 0.0;   // bits
};

struct FlowSpec {
    int flow_id = 0;
    CumulativeFunction arrival;
    RateCca cca;
};

struct FlowSet {
    std::vector<FlowSpec> flows;
    ServiceCurve service;
    double delta_r = 0.0;
    double horizon = 0.0;
    EcnConfig ecn;
    PfcConfig pfc;
    std::uint64_t event_cap = 1000000;

    void validate() const;
};

struct MultiflowResult {
    std::vector<FlowTrace> flows;
    PiecewiseLinear aggregate_admitted;
    PiecewiseLinear aggregate_departed;
    PiecewiseLinear aggregate_transmitted;
    PiecewiseLinear aggregate_backlog;
    EventLog events;  // pauses, resumes, CNP deliveries (flow -1 = shared)
    std::vector<std::pair<double, double>> pause_intervals;  // quantum-sized
    bool completed = true;  // false if the event-count guard tripped
};

MultiflowResult run_multiflow(const FlowSet& fs);

// Theorem-1 FIFO demux bounds at one time instant.
struct DemuxBounds {
    double lower;
    double upper;
};
std::vector<DemuxBounds> fifo_demux(const std::vector<CumulativeFunction>& admitted,
                                    const CumulativeFunction& d_agg, double t,
                                    double eps = 1e-9);

// Per-flow departure function (Theorem-1 lower bound) for one flow of the
// aggregate system: adm_j (X-composed with the aggregate's upper inverse and
// the aggregate departures).
CumulativeFunction demux_departures(const CumulativeFunction& adm_j,
                                    const CumulativeFunction& adm_agg,
                                    const CumulativeFunction& dep_agg);

// Single-flow rate-based AIMD driver (the N=1 specialization of the shared
// loop; timeouts and additive increases only).
FlowTrace run_rate_aimd(const CumulativeFunction& arrival, const ServiceCurve& service,
                        const RateAimdParams& p);

}  // namespace ncc
