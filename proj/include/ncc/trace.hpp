#pragma once

#include <string>
#include <vector>

#include "ncc/cumulative.hpp"

namespace ncc {

enum class EventKind {
    Timeout,
    AdditiveIncrease,
    Cnp,
    Pause,
    Resume,
    WindowUpdate,
    FlightComplete,
    SlowStartExit,
};

const char* to_string(EventKind k);

struct Event {
    double t = 0.0;
    EventKind kind = EventKind::Timeout;
    int flow_id = 0;
    std::string detail;
};

using EventLog = std::vector<Event>;

std::string event_log_csv(const EventLog& log);  // t,event_kind,flow_id,detail

// Piecewise-constant state series (rate limit or congestion window).
class StepSeries {
  public:
    void set(double t, double value);
    double at(double t) const;  // value governing (t_i, t_{i+1}]
    const std::vector<std::pair<double, double>>& points() const { return pts_; }
    bool empty() const { return pts_.empty(); }

  private:
    std::vector<std::pair<double, double>> pts_;
};

// Per-flow run record: source A, admitted, departures, the control state
// series, the event log, and the transmitted counter (admitted with
// Go-Back-N rewinds folded back in, i.e. what the wire actually carried).
struct FlowTrace {
    int flow_id = 0;
    CumulativeFunction source;
    PiecewiseLinear admitted;
    PiecewiseLinear departed;
    PiecewiseLinear transmitted;
    StepSeries control;
    EventLog events;
    std::vector<double> rewind_times;  // timeout junctions (allowed down-steps)

    // t,rate_or_window,backlog,admitted,departed sampled every `resolution`.
    std::string csv(double resolution) const;
};

// Structural checks shared by tests and the selftest command. Returns a list
// of violated invariants (empty when clean).
std::vector<std::string> check_flow_invariants(const FlowTrace& tr, double sample_step);

}  // namespace ncc
