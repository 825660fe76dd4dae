#include <array>
#include <fstream>
#include <random>

#include "doctest.h"

#include "aoi/io.hpp"
#include "aoi/models.hpp"
#include "aoi/shs.hpp"
#include "random_charts.hpp"
#include "rational_oracle.hpp"

using namespace aoi;
using aoi::shs::ViolationKind;

namespace {

const auto kNomaOnes = SystemParams::with_explicit_rates(1, 1, 1, 1, 0.5, 0.5);
const auto kOmaOnes = SystemParams::with_explicit_rates(1, 1, 1, 1, 0.5, 0.5);
constexpr std::array<std::size_t, 1> kMonitor{0};

bool has_kind(const shs::ValidationVerdict& v, ViolationKind kind, std::size_t index) {
    for (const auto& x : v)
        if (x.kind == kind && x.index == index) return true;
    return false;
}

shs::ShsChart two_state_chart() {
    shs::ShsChart c;
    c.n_states = 2;
    c.age_dim = 1;
    c.drift = Eigen::MatrixXd::Ones(2, 1);
    c.transitions = {{0, 1, 1.0, Eigen::MatrixXd::Zero(1, 1)}, {1, 0, 2.0, Eigen::MatrixXd::Ones(1, 1)}};
    return c;
}

}  // namespace

TEST_CASE("validate_chart accepts the NOMA chart") {
    CHECK(shs::validate_chart(build_noma_chart(kNomaOnes)).empty());
    CHECK(shs::validate_chart(build_oma_chart(kOmaOnes)).empty());
}

TEST_CASE("validate_chart reports each violation with its index") {
    auto c = two_state_chart();
    c.transitions[1].rate = -1.0;
    auto v = shs::validate_chart(c);
    CHECK(has_kind(v, ViolationKind::NonpositiveRate, 1));
    CHECK(v.front().message.find("nonpositive rate at transition 1") != std::string::npos);

    c = two_state_chart();
    c.transitions[0].rate = std::numeric_limits<double>::infinity();
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::NonpositiveRate, 0));

    c = two_state_chart();
    c.transitions[0].target = 7;
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::EndpointOutOfRange, 0));

    c = two_state_chart();
    c.drift(1, 0) = 0.5;
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::DriftEntry, 1));

    c = two_state_chart();
    c.transitions[1].reset(0, 0) = 2.0;
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::ResetEntry, 1));

    c = two_state_chart();
    c.transitions[1].reset = Eigen::MatrixXd::Ones(2, 2);
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::ResetShape, 1));

    c.age_dim = 2;
    c.drift = Eigen::MatrixXd::Ones(2, 2);
    c.transitions[0].reset = Eigen::MatrixXd::Zero(2, 2);
    // Column 0 would sum both components.
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::ResetAmplifies, 1));
}

TEST_CASE("validate_chart detects disconnected graphs, ignoring self-loops") {
    shs::ShsChart c;
    c.n_states = 4;
    c.age_dim = 1;
    c.drift = Eigen::MatrixXd::Ones(4, 1);
    const auto z = Eigen::MatrixXd::Zero(1, 1);
    c.transitions = {{0, 1, 1.0, z}, {1, 0, 1.0, z}, {2, 3, 1.0, z}, {3, 2, 1.0, z}};
    auto v = shs::validate_chart(c);
    REQUIRE(has_kind(v, ViolationKind::NotStronglyConnected, 0));
    CHECK(v.back().message == "not strongly connected");

    // One-way bridge is still not strongly connected.
    c.transitions.push_back({1, 2, 1.0, z});
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::NotStronglyConnected, 0));
    c.transitions.push_back({3, 3, 1.0, z});
    CHECK(has_kind(shs::validate_chart(c), ViolationKind::NotStronglyConnected, 0));
    c.transitions.push_back({2, 1, 1.0, z});
    CHECK(shs::validate_chart(c).empty());
}

TEST_CASE("operations reject invalid charts") {
    auto c = two_state_chart();
    c.transitions[0].rate = 0.0;
    CHECK_THROWS_AS((void)shs::stationary_distribution(c), shs::InvalidChartError);
}

TEST_CASE("stationary distribution of the reference charts") {
    const auto pi = shs::stationary_distribution(build_noma_chart(kNomaOnes)).probabilities;
    const std::array<double, 4> noma{0.2, 0.2, 0.4, 0.2};
    for (int q = 0; q < 4; ++q) CHECK(pi(q) == doctest::Approx(noma[q]).epsilon(1e-14));

    const auto pi_oma = shs::stationary_distribution(build_oma_chart(kOmaOnes)).probabilities;
    for (int q = 0; q < 5; ++q) CHECK(pi_oma(q) == doctest::Approx(0.2).epsilon(1e-14));
}

TEST_CASE("correlation table of the NOMA chart matches the exact solution") {
    // Exact rationals from an independent elimination.
    const auto exact = oracle::correlation(
        oracle::noma(1, 1, 1, 1, oracle::Q(1, 2), oracle::Q(1, 2)),
        oracle::stationary(oracle::noma(1, 1, 1, 1, oracle::Q(1, 2), oracle::Q(1, 2))));
    CHECK(exact[0][0] == oracle::Q(52, 165));
    CHECK(exact[1][0] == oracle::Q(289, 495));
    CHECK(exact[1][1] == oracle::Q(6, 55));
    CHECK(exact[2][0] == oracle::Q(646, 495));
    CHECK(exact[2][1] == oracle::Q(14, 55));
    CHECK(exact[3][0] == oracle::Q(53, 165));

    const auto chart = build_noma_chart(kNomaOnes);
    const auto v = shs::correlation_table(chart, shs::stationary_distribution(chart)).v;
    CHECK(v(0, 0) == doctest::Approx(52.0 / 165).epsilon(1e-12));
    CHECK(v(1, 0) == doctest::Approx(289.0 / 495).epsilon(1e-12));
    CHECK(v(1, 1) == doctest::Approx(6.0 / 55).epsilon(1e-12));
    CHECK(v(2, 0) == doctest::Approx(646.0 / 495).epsilon(1e-12));
    CHECK(v(2, 1) == doctest::Approx(14.0 / 55).epsilon(1e-12));
    CHECK(v(3, 0) == doctest::Approx(53.0 / 165).epsilon(1e-12));
    CHECK(std::abs(v(0, 1)) <= 1e-12);
    CHECK(std::abs(v(3, 1)) <= 1e-12);
    CHECK(shs::average_age(chart, kMonitor) == doctest::Approx(250.0 / 99).epsilon(1e-12));
}

TEST_CASE("correlation table of the OMA chart matches the exact solution") {
    const auto exact_age = oracle::monitor_age(oracle::oma(1, 1, 1, 1));
    CHECK(exact_age == oracle::Q(73, 30));

    const auto chart = build_oma_chart(kOmaOnes);
    const auto v = shs::correlation_table(chart, shs::stationary_distribution(chart)).v;
    CHECK(v(3, 1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(v(1, 1) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(v(4, 1) == doctest::Approx(0.15).epsilon(1e-12));
    CHECK(v(0, 0) == doctest::Approx(19.0 / 60).epsilon(1e-12));
    CHECK(v(1, 0) == doctest::Approx(0.525).epsilon(1e-12));
    CHECK(v(2, 0) == doctest::Approx(1.0 / 3).epsilon(1e-12));
    CHECK(v(3, 0) == doctest::Approx(8.0 / 15).epsilon(1e-12));
    CHECK(v(4, 0) == doctest::Approx(0.725).epsilon(1e-12));
    CHECK(std::abs(v(0, 1)) <= 1e-12);
    CHECK(std::abs(v(2, 1)) <= 1e-12);
    CHECK(shs::average_age(chart, kMonitor) == doctest::Approx(73.0 / 30).epsilon(1e-12));
}

TEST_CASE("average_age rejects component indices outside the age vector") {
    const std::array<std::size_t, 1> bad{5};
    CHECK_THROWS_AS((void)shs::average_age(build_noma_chart(kNomaOnes), bad), std::out_of_range);
}

TEST_CASE("a component that is never reset makes the correlation system singular") {
    shs::ShsChart c = two_state_chart();
    for (auto& t : c.transitions) t.reset = Eigen::MatrixXd::Ones(1, 1);
    const auto pi = shs::stationary_distribution(c);
    CHECK_THROWS_AS((void)shs::correlation_table(c, pi), shs::SingularSystemError);
}

TEST_CASE("user swap leaves symmetric charts unchanged") {
    const auto p = SystemParams::with_explicit_rates(1.3, 1.3, 0.7, 0.7, 0.4, 0.4);
    CHECK(shs::average_age(build_noma_chart(p, Perspective::User1), kMonitor) ==
          shs::average_age(build_noma_chart(p, Perspective::User2), kMonitor));
    CHECK(shs::average_age(build_oma_chart(p, Perspective::User1), kMonitor) ==
          shs::average_age(build_oma_chart(p, Perspective::User2), kMonitor));
}

TEST_CASE("property: engine invariants on random charts") {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> scale(0.05, 20.0);
    for (int trial = 0; trial < 200; ++trial) {
        CAPTURE(trial);
        const auto chart = testing_support::random_chart(rng);
        REQUIRE(shs::validate_chart(chart).empty());
        const auto pi = shs::stationary_distribution(chart);

        CHECK((shs::balance_operator(chart) * pi.probabilities).lpNorm<Eigen::Infinity>() < 1e-12);
        CHECK(std::abs(pi.probabilities.sum() - 1.0) < 1e-12);
        CHECK(pi.probabilities.minCoeff() >= 0.0);

        const auto table = shs::correlation_table(chart, pi);
        CHECK(table.v.minCoeff() >= 0.0);
        const auto sys = shs::assemble_correlation_system(chart, pi);
        Eigen::VectorXd stacked(sys.rhs.size());
        for (Eigen::Index q = 0; q < table.v.rows(); ++q)
            for (Eigen::Index j = 0; j < table.v.cols(); ++j) stacked(q * table.v.cols() + j) = table.v(q, j);
        const double residual = (sys.matrix * stacked - sys.rhs).lpNorm<Eigen::Infinity>();
        CHECK(residual < 1e-10 * (1.0 + stacked.lpNorm<Eigen::Infinity>()));

        // Self-loops never move the stationary distribution.
        auto looped = chart;
        std::uniform_int_distribution<std::size_t> state(0, chart.n_states - 1);
        looped.transitions.push_back(
            {state(rng), 0, 3.0, Eigen::MatrixXd::Identity(static_cast<Eigen::Index>(chart.age_dim),
                                                            static_cast<Eigen::Index>(chart.age_dim))});
        looped.transitions.back().target = looped.transitions.back().source;
        const auto pi_looped = shs::stationary_distribution(looped);
        CHECK((pi_looped.probabilities - pi.probabilities).lpNorm<Eigen::Infinity>() <= 1e-12);

        // Time rescaling: rates * c => ages / c.
        const double c = scale(rng);
        auto scaled = chart;
        for (auto& t : scaled.transitions) t.rate *= c;
        std::vector<std::size_t> all(chart.age_dim);
        for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
        const double age = shs::average_age(table, all);
        const double age_scaled = shs::average_age(scaled, all);
        CHECK(age_scaled * c == doctest::Approx(age).epsilon(1e-9));
    }
}

TEST_CASE("property: chart JSON form preserves every engine result") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 50; ++trial) {
        const auto chart = testing_support::random_chart(rng);
        const auto text = io::chart_to_json(chart).dump();
        const auto back = io::chart_from_json(nlohmann::json::parse(text));
        REQUIRE(back.n_states == chart.n_states);
        CHECK(back.drift == chart.drift);
        REQUIRE(back.transitions.size() == chart.transitions.size());
        for (std::size_t k = 0; k < chart.transitions.size(); ++k) {
            CHECK(back.transitions[k].rate == chart.transitions[k].rate);
            CHECK(back.transitions[k].reset == chart.transitions[k].reset);
        }
    }
}

TEST_CASE("chart fixture file solves to the reference value") {
    std::ifstream in(AOI_FIXTURE_DIR "/noma_ones_chart.json");
    REQUIRE(in.good());
    const auto chart = io::chart_from_json(nlohmann::json::parse(in));
    CHECK(shs::validate_chart(chart).empty());
    CHECK(shs::average_age(chart, kMonitor) == doctest::Approx(250.0 / 99).epsilon(1e-12));
}

TEST_CASE("malformed chart JSON raises FormatError") {
    CHECK_THROWS_AS((void)io::chart_from_json(nlohmann::json::parse(R"({"states": 3})")), io::FormatError);
    CHECK_THROWS_AS((void)io::chart_from_json(nlohmann::json::parse(
                        R"({"states": ["a"], "age_dim": 1, "drift": [[1, 0]], "transitions": []})")),
                    io::FormatError);
}
