#pragma once

// Continuous-time discrete-event simulator of the two-user preemptive
// status-update system. Each user buffers at most one packet; a fresh arrival
// replaces that user's packet whether it waits or is in service.
//
// NOMA: every user holding a packet is in service, at mu_k alone or mu'_k
// when both are served. OMA: one user is served at mu_k; a packet of the other
// user waits and enters service, keeping its generation time, when the server
// frees up.
//
// Every step draws the next event from the competing exponential clocks of
// the current state. Resampling all clocks at each state change is exact
// because the clocks are memoryless.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <random>
#include <stdexcept>
#include <vector>

#include "aoi/models.hpp"

namespace aoi::sim {

class InvalidSimConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct SimConfig {
    Scheme scheme = Scheme::Noma;
    std::uint64_t seed = 1;
    std::uint64_t max_events = 1'000'000;
    double warmup_fraction = 0.05;
    std::uint32_t batches = 20;
    // Optional CSV event trace, at most trace_rows data rows.
    std::ostream* trace = nullptr;
    std::uint64_t trace_rows = 10'000;
};

/// Throws InvalidSimConfigError: requires batches >= 2,
/// max_events >= 10 * batches and warmup_fraction in [0, 1).
void validate(const SimConfig& config);

/// Per-sweep-point seed derivation: base seed plus grid index.
[[nodiscard]] constexpr std::uint64_t point_seed(std::uint64_t base, std::uint64_t index) {
    return base + index;
}

/// Exact integral of a unit-slope age over [0, dt] starting at `age_at_start`.
[[nodiscard]] double integrate_age_segment(double age_at_start, double dt);

struct SimResult {
    Scheme scheme = Scheme::Noma;
    double age_user1 = 0.0;
    double age_user2 = 0.0;
    double age_total = 0.0;
    std::array<double, 2> std_error{};      // batch-means standard error per user
    std::array<double, 2> ci_half_width{};  // 95% Student-t half width per user
    std::uint64_t events_processed = 0;
    double sim_time = 0.0;  // measured (post-warmup) horizon
    std::uint64_t seed = 0;
    std::uint32_t batches = 0;
    // Fraction of measured time in each chart state, user-1 labelling.
    std::vector<double> state_occupancy;
};

enum class EventKind { Arrival, Departure };

struct Snapshot {
    double time = 0.0;
    std::array<bool, 2> has_packet{};
    std::array<bool, 2> in_service{};
    std::array<double, 2> generation_time{};  // valid when has_packet
    std::array<double, 2> last_delivered{};   // U_k
    [[nodiscard]] double age(std::size_t user) const { return time - last_delivered[user]; }
};

struct StepInfo {
    EventKind kind = EventKind::Arrival;
    std::size_t user = 0;
    std::size_t state_before = 0;
    std::size_t state_after = 0;
    double delivered_age = 0.0;  // now - generation time, departures only
};

class Simulator {
public:
    Simulator(const SystemParams& params, const SimConfig& config);

    /// Processes one event; returns false once the event budget is spent.
    bool step();
    void run();

    [[nodiscard]] const Snapshot& snapshot() const { return now_; }
    [[nodiscard]] const StepInfo& last_step() const { return last_; }
    [[nodiscard]] std::uint64_t events_processed() const { return events_; }

    /// Chart state index (user-1 labelling) of the current system state.
    [[nodiscard]] std::size_t chart_state() const;

    [[nodiscard]] SimResult result() const;

private:
    void accumulate(double dt);
    void write_trace_row();

    SystemParams params_;
    SimConfig config_;
    std::mt19937_64 rng_;
    std::uniform_real_distribution<double> uniform_{0.0, 1.0};

    Snapshot now_;
    StepInfo last_;
    int server_ = -1;  // OMA: user in service or -1

    std::uint64_t events_ = 0;
    std::uint64_t warmup_events_ = 0;
    std::uint64_t batch_events_ = 0;
    std::uint64_t trace_written_ = 0;

    // Measurement accumulators, one entry per batch.
    std::vector<std::array<double, 2>> batch_area_;
    std::vector<double> batch_time_;
    std::vector<double> occupancy_time_;
};

[[nodiscard]] SimResult simulate(const SystemParams& params, const SimConfig& config);

}  // namespace aoi::sim
