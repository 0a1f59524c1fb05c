#pragma once

#include <cstdint>
#include <vector>

#include "ncc/cumulative.hpp"

namespace ncc {
namespace oracle {

// Brute-force references used by tests only. They must stay independent of
// the exact convolution/demux code paths they check: everything here works
// through pointwise eval() and elementary event stepping.

struct GridSample {
    double t;
    double value;
};

// inf_{0<=s<=t} f(s) + g(t-s), minimized over a uniform s-grid augmented
// with both operands' breakpoints and one-sided limits there. Upper-bounds
// the exact convolution; exact at every sampled t thanks to the critical
// points, with residual error bounded by (max slope) * (grid step) for the
// plain grid part.
std::vector<GridSample> grid_convolve(const CumulativeFunction& f, const CumulativeFunction& g,
                                      int n_points);

struct Packet {
    double arrival;  // seconds
    double size;     // bits
};

// Per-flow packet list; arrival times non-decreasing within a flow.
using PacketTrace = std::vector<Packet>;

struct FifoResult {
    std::vector<CumulativeFunction> per_flow;  // cumulative departed bits (steps)
    CumulativeFunction aggregate;
};

// Event-driven single-server FIFO at rate C. Simultaneous arrivals are
// served in ascending flow id. Packets are atomic (no preemption). The
// optional delta_r shifts the reported departures (delivery at the
// destination side); tests use 0.
FifoResult packet_fifo_sim(const std::vector<PacketTrace>& traces, double rate_c,
                           double delta_r, double horizon);

// Deterministic 64-bit mix, used for seeded per-packet RED draws and for
// test-case generation.
std::uint64_t splitmix64(std::uint64_t x);
// Uniform double in [0,1) from (seed, counter).
double uniform01(std::uint64_t seed, std::uint64_t counter);

}  // namespace oracle
}  // namespace ncc
