#pragma once

#include "ncc/multiflow.hpp"

namespace ncc {

struct WindowAimdParams {
    double alpha = 0.0;    // bits, additive window increment per flight
    double beta = 0.5;     // (0,1), threshold reduction on timeout
    double tau_o = kInfinity;
    double delta_r = 0.0;
    double t_end = 0.0;
    double w_o = 0.0;      // bits, initial congestion window
    double w_th_o = kInfinity;  // bits, initial slow-start threshold
    double i_max = 0.0;    // bits, one max-size packet (Tahoe reset target)
    // Reset W to w_o on timeout instead of to one packet.
    bool algorithm2_literal_reset = false;

    void validate() const;
};

// Window-based AIMD with slow start: events are flight completions and
// timeouts; every event restarts the coordinate system.
FlowTrace run_window_aimd(const CumulativeFunction& arrival, const ServiceCurve& service,
                          const WindowAimdParams& p);

}  // namespace ncc
