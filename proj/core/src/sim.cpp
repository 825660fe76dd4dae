#include "aoi/sim.hpp"

#include <cmath>
#include <ostream>

#include <boost/math/distributions/students_t.hpp>

namespace aoi::sim {

namespace {

constexpr std::size_t kUser1 = 0;
constexpr std::size_t kUser2 = 1;

const char* kind_name(EventKind kind) { return kind == EventKind::Arrival ? "arrival" : "departure"; }

}  // namespace

void validate(const SimConfig& config) {
    if (config.batches < 2) throw InvalidSimConfigError("batches must be at least 2");
    if (config.max_events < 10ULL * config.batches)
        throw InvalidSimConfigError("max_events must be at least 10 * batches");
    if (!(config.warmup_fraction >= 0.0 && config.warmup_fraction < 1.0))
        throw InvalidSimConfigError("warmup_fraction must lie in [0, 1)");
}

double integrate_age_segment(double age_at_start, double dt) {
    return age_at_start * dt + 0.5 * dt * dt;
}

Simulator::Simulator(const SystemParams& params, const SimConfig& config)
    : params_(params), config_(config), rng_(config.seed) {
    validate(config_);
    require_positive_rates(params_, config_.scheme == Scheme::Noma);

    warmup_events_ = static_cast<std::uint64_t>(
        std::floor(config_.warmup_fraction * static_cast<double>(config_.max_events)));
    const std::uint64_t measured = config_.max_events - warmup_events_;
    batch_events_ = std::max<std::uint64_t>(1, measured / config_.batches);
    batch_area_.assign(config_.batches, {0.0, 0.0});
    batch_time_.assign(config_.batches, 0.0);
    occupancy_time_.assign(config_.scheme == Scheme::Noma ? 4 : 5, 0.0);

    if (config_.trace != nullptr) {
        config_.trace->precision(12);
        *config_.trace << "time,event_kind,user,state_before,state_after,age1,age2\n";
    }
}

std::size_t Simulator::chart_state() const {
    const bool h1 = now_.has_packet[kUser1];
    const bool h2 = now_.has_packet[kUser2];
    if (config_.scheme == Scheme::Noma) {
        if (!h1 && !h2) return static_cast<std::size_t>(NomaState::Idle);
        if (h1 && h2) return static_cast<std::size_t>(NomaState::Both);
        return static_cast<std::size_t>(h1 ? NomaState::User1Alone : NomaState::User2Alone);
    }
    if (server_ < 0) return static_cast<std::size_t>(OmaState::Idle);
    if (server_ == static_cast<int>(kUser1))
        return static_cast<std::size_t>(h2 ? OmaState::User1ServedUser2Waiting : OmaState::User1Served);
    return static_cast<std::size_t>(h1 ? OmaState::User2ServedUser1Waiting : OmaState::User2Served);
}

void Simulator::accumulate(double dt) {
    if (events_ < warmup_events_) return;
    const std::uint64_t b = std::min<std::uint64_t>((events_ - warmup_events_) / batch_events_,
                                                    config_.batches - 1);
    for (std::size_t k = 0; k < 2; ++k) batch_area_[b][k] += integrate_age_segment(now_.age(k), dt);
    batch_time_[b] += dt;
    occupancy_time_[chart_state()] += dt;
}

bool Simulator::step() {
    if (events_ >= config_.max_events) return false;

    // Active clocks: two arrivals plus the service clocks of this state.
    std::array<double, 4> rate{params_.lambda1, params_.lambda2, 0.0, 0.0};
    if (config_.scheme == Scheme::Noma) {
        const bool both = now_.has_packet[kUser1] && now_.has_packet[kUser2];
        if (now_.has_packet[kUser1]) rate[2] = both ? params_.mu1p : params_.mu1;
        if (now_.has_packet[kUser2]) rate[3] = both ? params_.mu2p : params_.mu2;
    } else if (server_ >= 0) {
        rate[2 + static_cast<std::size_t>(server_)] = server_ == 0 ? params_.mu1 : params_.mu2;
    }
    const double total = rate[0] + rate[1] + rate[2] + rate[3];

    const double dt = -std::log1p(-uniform_(rng_)) / total;
    accumulate(dt);
    now_.time += dt;

    double pick = uniform_(rng_) * total;
    std::size_t clock = 0;
    while (clock < 3 && pick >= rate[clock]) {
        pick -= rate[clock];
        ++clock;
    }
    // Round-off can leave `pick` past the last active clock.
    while (rate[clock] == 0.0) --clock;

    last_ = StepInfo{};
    last_.state_before = chart_state();
    const std::size_t user = clock % 2;
    const std::size_t other = 1 - user;
    last_.user = user;

    if (clock < 2) {
        last_.kind = EventKind::Arrival;
        now_.has_packet[user] = true;
        now_.generation_time[user] = now_.time;
        if (config_.scheme == Scheme::Noma) {
            now_.in_service[user] = true;
        } else if (server_ < 0) {
            server_ = static_cast<int>(user);
            now_.in_service[user] = true;
        }
    } else {
        last_.kind = EventKind::Departure;
        last_.delivered_age = now_.time - now_.generation_time[user];
        now_.last_delivered[user] = now_.generation_time[user];
        now_.has_packet[user] = false;
        now_.in_service[user] = false;
        if (config_.scheme == Scheme::Oma) {
            server_ = -1;
            if (now_.has_packet[other]) {
                server_ = static_cast<int>(other);
                now_.in_service[other] = true;
            }
        }
    }
    last_.state_after = chart_state();
    ++events_;
    write_trace_row();
    return true;
}

void Simulator::write_trace_row() {
    if (config_.trace == nullptr || trace_written_ >= config_.trace_rows) return;
    auto& os = *config_.trace;
    os << now_.time << ',' << kind_name(last_.kind) << ',' << last_.user + 1 << ','
       << last_.state_before << ',' << last_.state_after << ',' << now_.age(kUser1) << ','
       << now_.age(kUser2) << '\n';
    ++trace_written_;
}

void Simulator::run() {
    while (step()) {
    }
}

SimResult Simulator::result() const {
    SimResult out;
    out.scheme = config_.scheme;
    out.events_processed = events_;
    out.seed = config_.seed;
    out.batches = config_.batches;

    double time = 0.0;
    std::array<double, 2> area{0.0, 0.0};
    for (std::size_t b = 0; b < batch_time_.size(); ++b) {
        time += batch_time_[b];
        area[0] += batch_area_[b][0];
        area[1] += batch_area_[b][1];
    }
    out.sim_time = time;
    if (time > 0.0) {
        out.age_user1 = area[0] / time;
        out.age_user2 = area[1] / time;
    }
    out.age_total = out.age_user1 + out.age_user2;

    for (std::size_t k = 0; k < 2; ++k) {
        double mean = 0.0;
        std::size_t used = 0;
        for (std::size_t b = 0; b < batch_time_.size(); ++b) {
            if (batch_time_[b] <= 0.0) continue;
            mean += batch_area_[b][k] / batch_time_[b];
            ++used;
        }
        if (used < 2) continue;
        mean /= static_cast<double>(used);
        double ss = 0.0;
        for (std::size_t b = 0; b < batch_time_.size(); ++b) {
            if (batch_time_[b] <= 0.0) continue;
            const double d = batch_area_[b][k] / batch_time_[b] - mean;
            ss += d * d;
        }
        const double m = static_cast<double>(used);
        const boost::math::students_t t_dist(m - 1.0);
        const double t_quantile = boost::math::quantile(boost::math::complement(t_dist, 0.025));
        out.std_error[k] = std::sqrt(ss / (m - 1.0) / m);
        out.ci_half_width[k] = t_quantile * out.std_error[k];
    }

    out.state_occupancy.resize(occupancy_time_.size(), 0.0);
    for (std::size_t q = 0; q < occupancy_time_.size(); ++q)
        out.state_occupancy[q] = time > 0.0 ? occupancy_time_[q] / time : 0.0;
    return out;
}

SimResult simulate(const SystemParams& params, const SimConfig& config) {
    Simulator sim(params, config);
    sim.run();
    return sim.result();
}

}  // namespace aoi::sim
