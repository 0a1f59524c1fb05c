#include "ncc/multiflow.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "ncc/pseudo_inverse.hpp"

namespace ncc {

void RateAimdParams::validate() const {
    if (!(beta > 0.0 && beta < 1.0)) throw std::invalid_argument("aimd: beta out of (0,1)");
    if (alpha <= 0.0) throw std::invalid_argument("aimd: alpha must be positive");
    if (r_o <= 0.0) throw std::invalid_argument("aimd: r_o must be positive");
    if (!(tau_o > delta_r)) throw std::invalid_argument("aimd: tau_o must exceed delta_r");
    if (delta_tau_ai <= 0.0) throw std::invalid_argument("aimd: delta_tau_ai must be positive");
    if (t_end <= 0.0) throw std::invalid_argument("aimd: t_end must be positive");
}

void FlowSet::validate() const {
    if (flows.empty()) throw std::invalid_argument("flow set is empty");
    if (horizon <= 0.0) throw std::invalid_argument("flow set horizon must be positive");
    for (std::size_t i = 0; i < flows.size(); ++i) {
        for (std::size_t j = i + 1; j < flows.size(); ++j)
            if (flows[i].flow_id == flows[j].flow_id)
                throw std::invalid_argument("duplicate flow id");
        if (std::fabs(flows[i].arrival.horizon() - horizon) > kEpsTime)
            throw std::invalid_argument("flow arrival horizon mismatch");
        const RateCca& c = flows[i].cca;
        if (c.initial_rate <= 0.0) throw std::invalid_argument("flow initial rate");
        if (c.kind != RateCca::Kind::Fixed && std::isfinite(c.tau_o) && !(c.tau_o > delta_r))
            throw std::invalid_argument("flow tau_o must exceed delta_r");
    }
    if (ecn.enabled) ecn.state.validate();
}

namespace {

double slopeAtInterior(const PiecewiseLinear& f, double t) {
    const auto& pts = f.breakpoints();
    auto it = std::upper_bound(pts.begin(), pts.end(), t,
                               [](double v, const Breakpoint& p) { return v < p.t; });
    if (it == pts.begin()) return 0.0;
    return (it - 1)->slope;
}

double mapSlopeAtInterior(const PseudoInverseMap& m, double y) {
    const auto& pts = m.breakpoints();
    auto it = std::upper_bound(pts.begin(), pts.end(), y,
                               [](double v, const Breakpoint& p) { return v < p.t; });
    if (it == pts.begin()) return 0.0;
    return (it - 1)->slope;
}

}  // namespace

CumulativeFunction demux_departures(const CumulativeFunction& adm_j,
                                    const CumulativeFunction& adm_agg,
                                    const CumulativeFunction& dep_agg) {
    const double T = dep_agg.horizon();
    PseudoInverseMap x(adm_agg, /*upper=*/true);

    // Breakpoint candidates of s -> adm_j( X( dep(s) ) ).
    std::vector<double> ss;
    for (const Breakpoint& p : dep_agg.breakpoints()) ss.push_back(p.t);
    for (const Breakpoint& p : x.breakpoints()) {
        const double s = lower_inverse_at(dep_agg, p.t);
        if (!std::isinf(s) && s <= T) ss.push_back(s);
    }
    for (const Breakpoint& p : adm_j.breakpoints()) {
        // time values where the inner composition crosses adm_j's breakpoints
        for (double y : {adm_agg.eval(p.t), adm_agg.evalRight(p.t)}) {
            const double s = lower_inverse_at(dep_agg, y);
            if (!std::isinf(s) && s <= T) ss.push_back(s);
        }
    }
    ss.push_back(0.0);
    ss.push_back(T);
    std::sort(ss.begin(), ss.end());
    ss.erase(std::unique(ss.begin(), ss.end(),
                         [](double a, double b) { return b - a <= kEpsTime; }),
             ss.end());

    std::vector<Breakpoint> pts;
    pts.reserve(ss.size());
    for (std::size_t i = 0; i + 1 < ss.size(); ++i) {
        const double a = ss[i], b = ss[i + 1];
        const double m = 0.5 * (a + b);
        const double dm = dep_agg.eval(m);
        const double xm = x.eval(dm);
        const double vm = adm_j.eval(xm);
        const double slope = slopeAtInterior(adm_j, xm) * mapSlopeAtInterior(x, dm) *
                             slopeAtInterior(dep_agg, m);
        pts.push_back({a, vm - slope * (m - a), slope});
    }
    if (pts.empty()) pts.push_back({0.0, 0.0, 0.0});
    return CumulativeFunction(std::move(pts), T);
}

std::vector<DemuxBounds> fifo_demux(const std::vector<CumulativeFunction>& admitted,
                                    const CumulativeFunction& d_agg, double t, double eps) {
    if (admitted.empty()) return {};
    CumulativeFunction agg = admitted.front();
    for (std::size_t i = 1; i < admitted.size(); ++i) agg = add(agg, admitted[i]);
    const double y = d_agg.eval(t);
    const double x = upper_inverse_at(agg, y);
    std::vector<DemuxBounds> out;
    double sum_lo = 0.0, sum_hi = 0.0;
    for (const auto& a : admitted) {
        DemuxBounds b{a.eval(x), a.eval(std::isinf(x) ? x : x + eps)};
        sum_lo += b.lower;
        sum_hi += b.upper;
        out.push_back(b);
    }
    if (sum_lo > y + kEpsBits || sum_hi < y - kEpsBits)
        throw std::runtime_error("fifo_demux: bounds inconsistent with aggregate departures");
    return out;
}

namespace {

struct EngineFlow {
    FlowSpec spec;
    double rate = 0.0;        // CCA rate-limit state
    bool paused = false;
    double adm_base = 0.0;    // admitted offset at the epoch origin
    double next_ai = kInfinity;
    double last_congestion = -kInfinity;
    double last_rewind = -kInfinity;
    CumulativeFunction adm_ep;     // admitted within current epoch (s-domain)
    PiecewiseLinear admitted;      // global, may rewind at timeouts
    PiecewiseLinear transmitted;   // global, monotone
    PiecewiseLinear departed;      // global (demuxed), provisional tail
    FlowTrace trace;
};

enum class EvKind { Timeout = 0, Pause = 1, Resume = 2, Cnp = 3, Ai = 4 };

struct Candidate {
    double t = kInfinity;
    EvKind kind = EvKind::Ai;
    int flow_index = -1;  // -1 for shared events
    EcnMark mark{};       // asociated ECN mark (Cnp only)
};

bool earlier(const Candidate& a, const Candidate& b) {
    if (a.t != b.t) return a.t < b.t;
    if (a.kind != b.kind) return static_cast<int>(a.kind) < static_cast<int>(b.kind);
    return a.flow_index < b.flow_index;
}

class Engine {
  public:
    explicit Engine(const FlowSet& fs) : fs_(fs) {
        fs_.validate();
        horizon_ = fs_.horizon;
        for (const FlowSpec& spec : fs_.flows) {
            EngineFlow f;
            f.spec = spec;
            f.rate = spec.cca.initial_rate;
            f.adm_ep = convolve(spec.arrival, CumulativeFunction::rate(f.rate, horizon_));
            f.admitted = f.adm_ep;
            f.transmitted = f.adm_ep;
            f.trace.flow_id = spec.flow_id;
            f.trace.source = spec.arrival;
            f.trace.control.set(0.0, f.rate);
            if (spec.cca.kind != RateCca::Kind::Fixed && spec.cca.delta_tau_ai > 0.0)
                f.next_ai = spec.cca.delta_tau_ai;
            flows_.push_back(std::move(f));
        }
        if (fs_.ecn.enabled) ecn_ = fs_.ecn.state;
        rebuildAggregate(/*full=*/true);
        refreshDeparted();
    }

    MultiflowResult run() {
        std::uint64_t events_done = 0;
        double t_last = 0.0;
        while (true) {
            std::vector<Candidate> batch = nextBatch(t_last);
            if (batch.empty() || batch.front().t >= horizon_) break;
            const double t_ev = batch.front().t;
            bool reanchor = false;
            for (const Candidate& c : batch) {
                applyEvent(c);
                if (c.kind == EvKind::Timeout) reanchor = true;
                if (++events_done > fs_.event_cap) {
                    finalize();
                    result_.completed = false;
                    return std::move(result_);
                }
            }
            if (reanchor)
                reanchorAt(t_ev);
            else
                rebuildAggregate(false);
            refreshDeparted();
            t_last = t_ev;
        }
        finalize();
        return std::move(result_);
    }

  private:
    // ---- candidate searches -------------------------------------------------

    std::vector<Candidate> nextBatch(double t_last) {
        std::vector<Candidate> cands;
        // timeouts
        for (std::size_t i = 0; i < flows_.size(); ++i) {
            EngineFlow& f = flows_[i];
            if (f.spec.cca.kind == RateCca::Kind::Fixed || !std::isfinite(f.spec.cca.tau_o))
                continue;
            const double tau_o = f.spec.cca.tau_o;
            const double from = std::max(t_last, f.last_rewind + tau_o);
            auto t = first_crossing_below(f.departed.delayed(fs_.delta_r),
                                          f.admitted.delayed(tau_o), from, horizon_);
            if (t) cands.push_back({*t, EvKind::Timeout, static_cast<int>(i)});
        }
        // PFC
        if (fs_.pfc.enabled) {
            if (!paused_) {
                double best = kInfinity;
                for (EngineFlow& f : flows_) {
                    PiecewiseLinear bj = subtract(f.admitted, f.departed);
                    PfcState st = pfcState();
                    auto p = pfc_schedule(bj, st, std::max(t_last, pfc_search_from_), horizon_);
                    if (p) best = std::min(best, p->first);
                }
                if (std::isfinite(best)) cands.push_back({best, EvKind::Pause, -1});
            } else {
                cands.push_back({resumeTime(), EvKind::Resume, -1});
            }
        }
        // CNP delivery (from the shared marking point)
        if (ecn_) {
            PiecewiseLinear b = subtract(agg_admitted_, agg_departed_);
            auto m = ecn_next_mark(b, agg_transmitted_, *ecn_, 1,
                                   std::max(t_last - fs_.delta_r, ecn_->t_underline), horizon_);
            if (m && m->t_send + fs_.delta_r < horizon_)
                cands.push_back({m->t_send + fs_.delta_r, EvKind::Cnp, -1, *m});
        }
        // additive increases
        for (std::size_t i = 0; i < flows_.size(); ++i) {
            EngineFlow& f = flows_[i];
            if (f.spec.cca.kind == RateCca::Kind::Fixed) continue;
            double t = std::max(f.next_ai, f.last_congestion + f.spec.cca.delta_tau_ai);
            if (t > t_last && t < horizon_) cands.push_back({t, EvKind::Ai, static_cast<int>(i)});
        }
        if (cands.empty()) return {};
        std::sort(cands.begin(), cands.end(), earlier);
        // Batch: all candidates at the earliest time. Timeouts keep priority.
        std::vector<Candidate> batch;
        const double t0 = cands.front().t;
        for (const Candidate& c : cands)
            if (c.t - t0 <= kEpsTime) batch.push_back(c);
        return batch;
    }

    // While paused, the flows are gated to rate zero; the resume instant is
    // the first 2us-quantum boundary whose lagged per-flow backlog has
    // cleared x_off (back-to-back pauses are coalesced here).
    double resumeTime() {
        const double dur = pfcState().pauseDuration();
        std::vector<PiecewiseLinear> backlogs;
        backlogs.reserve(flows_.size());
        for (EngineFlow& f : flows_) backlogs.push_back(subtract(f.admitted, f.departed));
        double t = pause_started_ + dur;
        for (int k = 0; k < 1 << 20; ++k) {
            bool clear = true;
            for (const PiecewiseLinear& bj : backlogs) {
                if (bj.eval(t - fs_.delta_r) > fs_.pfc.x_off) {
                    clear = false;
                    break;
                }
            }
            if (clear || t >= horizon_) return t;
            t += dur;
        }
        throw std::runtime_error("pfc resume search did not terminate");
    }

    PfcState pfcState() const {
        PfcState st;
        st.x_off = fs_.pfc.x_off;
        st.x_on = fs_.pfc.x_on;
        st.line_rate = lineRate();
        st.delta_r = fs_.delta_r;
        return st;
    }

    double lineRate() const {
        if (fs_.service.kind == ServiceCurve::Kind::Rate ||
            fs_.service.kind == ServiceCurve::Kind::TokenBucket)
            return fs_.service.rate;
        throw std::invalid_argument("pfc requires a rate-like path server");
    }

    // ---- event application --------------------------------------------------

    void applyEvent(const Candidate& c) {
        switch (c.kind) {
            case EvKind::Timeout: {
                EngineFlow& f = flows_[static_cast<std::size_t>(c.flow_index)];
                const double t = c.t;
                const double r_old = f.rate;
                f.rate = f.spec.cca.beta * r_old;
                f.last_congestion = t;
                f.last_rewind = t;
                const double y_ack = f.departed.eval(t - fs_.delta_r);
                pending_timeouts_.push_back({c.flow_index, t, y_ack});
                char d[96];
                std::snprintf(d, sizeof(d), "rate %.6g -> %.6g ack %.6g", r_old, f.rate, y_ack);
                f.trace.events.push_back({t, EventKind::Timeout, f.spec.flow_id, d});
                f.trace.control.set(t, f.rate);
                f.trace.rewind_times.push_back(t);
                break;
            }
            case EvKind::Ai: {
                EngineFlow& f = flows_[static_cast<std::size_t>(c.flow_index)];
                const double t = c.t;
                f.rate += f.spec.cca.alpha;
                f.next_ai = t + f.spec.cca.delta_tau_ai;
                reshapeFlow(f, t, EventKind::AdditiveIncrease);
                char d[64];
                std::snprintf(d, sizeof(d), "rate -> %.6g", f.rate);
                f.trace.events.back().detail = d;
                f.trace.control.set(t, f.rate);
                break;
            }
            case EvKind::Cnp: {
                // Fan-out: one CNP per sender; commit the marker state.
                ecn_->t_underline = c.mark.t_underline_after;
                result_.events.push_back({c.t, EventKind::Cnp, -1, "delivered"});
                for (EngineFlow& f : flows_) {
                    if (f.spec.cca.kind != RateCca::Kind::Dcqcn) continue;
                    const double r_old = f.rate;
                    f.rate = f.spec.cca.beta_cnp * r_old;
                    f.last_congestion = c.t;
                    reshapeFlow(f, c.t, EventKind::Cnp);
                    char d[96];
                    std::snprintf(d, sizeof(d), "rate %.6g -> %.6g", r_old, f.rate);
                    f.trace.events.back().detail = d;
                    f.trace.control.set(c.t, f.rate);
                }
                break;
            }
            case EvKind::Pause: {
                paused_ = true;
                pause_started_ = c.t;
                result_.events.push_back({c.t, EventKind::Pause, -1, ""});
                for (EngineFlow& f : flows_) {
                    f.paused = true;
                    reshapeFlow(f, c.t, EventKind::Pause);
                }
                break;
            }
            case EvKind::Resume: {
                paused_ = false;
                pfc_search_from_ = c.t;
                const double dur = pfcState().pauseDuration();
                for (double s = pause_started_; s < c.t - kEpsTime; s += dur)
                    result_.pause_intervals.push_back({s, s + dur});
                result_.events.push_back({c.t, EventKind::Resume, -1, ""});
                for (EngineFlow& f : flows_) {
                    f.paused = false;
                    reshapeFlow(f, c.t, EventKind::Resume);
                }
                break;
            }
        }
    }

    // Rebuild flow admission from t onward at its current (effective) rate,
    // conserving the unsent shaper backlog (origin at admitted(t)).
    void reshapeFlow(EngineFlow& f, double t, EventKind why) {
        const double eff_rate = f.paused ? 0.0 : f.rate;
        auto [a_rem, rec] = shift_after_admit(f.spec.arrival, f.admitted, t,
                                              why == EventKind::Cnp
                                                  ? ShiftRecord::Kind::Cnp
                                                  : ShiftRecord::Kind::AdditiveIncrease);
        CumulativeFunction tail =
            convolve(a_rem, CumulativeFunction::rate(eff_rate, horizon_ - t));
        f.admitted = stitch(f.admitted, tail, rec);
        f.transmitted = f.transmitted.replaceFrom(t, tail, f.transmitted.eval(t));
        f.adm_ep = CumulativeFunction(
            f.adm_ep.replaceFrom(t - t0_, tail, rec.y_origin - f.adm_base));
        f.trace.events.push_back({t, why, f.spec.flow_id, ""});
    }

    // New aggregate epoch at a timeout instant: the rewinding flows restart
    // from their ack base; every other flow's queued traffic becomes an
    // initial burst of the new epoch.
    void reanchorAt(double t) {
        // Per-flow departure values at the junction, from the old epoch.
        std::vector<double> dep_at;
        for (EngineFlow& f : flows_) dep_at.push_back(f.departed.eval(t));
        for (std::size_t i = 0; i < flows_.size(); ++i) {
            EngineFlow& f = flows_[i];
            const PendingTimeout* pt = nullptr;
            for (const PendingTimeout& p : pending_timeouts_)
                if (p.flow_index == static_cast<int>(i)) pt = &p;
            if (pt) {
                // Go-Back-N: rebuild admission from the ack base.
                const double y_ack = pt->y_ack;
                CumulativeFunction a_rem = shift(f.spec.arrival, t, y_ack);
                CumulativeFunction tail = convolve(
                    a_rem, CumulativeFunction::rate(f.paused ? 0.0 : f.rate, horizon_ - t));
                ShiftRecord rec{t, y_ack, ShiftRecord::Kind::Timeout};
                f.admitted = stitch(f.admitted, tail, rec);
                f.transmitted = f.transmitted.replaceFrom(t, tail, f.transmitted.eval(t));
                f.adm_ep = tail;
                f.adm_base = y_ack;
            } else {
                // Rebase the surviving epoch view to the new origin.
                const double new_base = dep_at[i];
                f.adm_ep = shift(f.adm_ep, t - t0_, new_base - f.adm_base);
                f.adm_base = new_base;
            }
        }
        pending_timeouts_.clear();
        t0_ = t;
        rebuildAggregate(true);
    }

    void rebuildAggregate(bool full) {
        (void)full;
        agg_ep_ = flows_.front().adm_ep;
        for (std::size_t i = 1; i < flows_.size(); ++i) agg_ep_ = add(agg_ep_, flows_[i].adm_ep);
        dep_ep_ = departures(agg_ep_, fs_.service);

        agg_admitted_ = flows_.front().admitted;
        agg_transmitted_ = flows_.front().transmitted;
        for (std::size_t i = 1; i < flows_.size(); ++i) {
            agg_admitted_ = add(agg_admitted_, flows_[i].admitted);
            agg_transmitted_ = add(agg_transmitted_, flows_[i].transmitted);
        }
        double base_sum = 0.0;
        for (EngineFlow& f : flows_) base_sum += f.adm_base;
        agg_departed_ = t0_ > 0.0
                            ? agg_departed_.replaceFrom(t0_, dep_ep_, base_sum, true)
                            : static_cast<PiecewiseLinear>(dep_ep_);
    }

    void refreshDeparted() {
        if (flows_.size() == 1) {
            EngineFlow& f = flows_.front();
            f.departed = t0_ > 0.0 ? f.departed.replaceFrom(t0_, dep_ep_, f.adm_base, true)
                                   : static_cast<PiecewiseLinear>(dep_ep_);
            return;
        }
        for (EngineFlow& f : flows_) {
            CumulativeFunction dj = demux_departures(f.adm_ep, agg_ep_, dep_ep_);
            f.departed = t0_ > 0.0 ? f.departed.replaceFrom(t0_, dj, f.adm_base, true)
                                   : static_cast<PiecewiseLinear>(dj);
        }
    }

    void finalize() {
        refreshDeparted();
        // Merge per-flow events into the shared chronological log first.
        for (const EngineFlow& f : flows_)
            result_.events.insert(result_.events.end(), f.trace.events.begin(),
                                  f.trace.events.end());
        std::stable_sort(result_.events.begin(), result_.events.end(),
                         [](const Event& a, const Event& b) { return a.t < b.t; });
        for (EngineFlow& f : flows_) {
            f.trace.admitted = f.admitted;
            f.trace.departed = f.departed;
            f.trace.transmitted = f.transmitted;
            result_.flows.push_back(std::move(f.trace));
        }
        result_.aggregate_admitted = agg_admitted_;
        result_.aggregate_transmitted = agg_transmitted_;
        result_.aggregate_departed = agg_departed_;
        result_.aggregate_backlog = subtract(agg_admitted_, agg_departed_);
    }

    struct PendingTimeout {
        int flow_index;
        double t;
        double y_ack;
    };

    FlowSet fs_;
    double horizon_ = 0.0;
    std::vector<EngineFlow> flows_;
    std::optional<EcnState> ecn_;
    bool paused_ = false;
    double pause_started_ = 0.0;
    double pfc_search_from_ = 0.0;
    double t0_ = 0.0;  // aggregate epoch origin (last timeout anywhere)
    CumulativeFunction agg_ep_;
    CumulativeFunction dep_ep_;
    PiecewiseLinear agg_admitted_;
    PiecewiseLinear agg_transmitted_;
    PiecewiseLinear agg_departed_;
    std::vector<PendingTimeout> pending_timeouts_;
    MultiflowResult result_;
};

}  // namespace

MultiflowResult run_multiflow(const FlowSet& fs) { return Engine(fs).run(); }

FlowTrace run_rate_aimd(const CumulativeFunction& arrival, const ServiceCurve& service,
                        const RateAimdParams& p) {
    p.validate();
    FlowSet fs;
    FlowSpec spec;
    spec.flow_id = 0;
    spec.arrival = arrival.horizon() == p.t_end ? arrival : arrival.truncated(p.t_end);
    spec.cca.kind = RateCca::Kind::Aimd;
    spec.cca.initial_rate = p.r_o;
    spec.cca.alpha = p.alpha;
    spec.cca.beta = p.beta;
    spec.cca.delta_tau_ai = p.delta_tau_ai;
    spec.cca.tau_o = p.tau_o;
    fs.flows.push_back(std::move(spec));
    fs.service = service;
    fs.delta_r = p.delta_r;
    fs.horizon = p.t_end;
    MultiflowResult res = run_multiflow(fs);
    if (!res.completed) throw std::runtime_error("run_rate_aimd: event-count guard tripped");
    return std::move(res.flows.front());
}

}  // namespace ncc
