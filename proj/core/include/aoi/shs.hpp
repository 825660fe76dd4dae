#pragma once

// Piecewise-linear stochastic hybrid system (SHS) age engine.
//
// A chart is a finite CTMC whose transitions carry binary reset maps applied
// to a row vector of ages (x' = x * A) and whose states impose unit drifts on
// selected age components. For an ergodic chart the engine computes the
// stationary distribution, the limiting correlation vectors v_q = E[x 1{q}],
// and average ages as column sums of v.

#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace aoi::shs {

/// Thrown when a linear system is singular, ill-conditioned or fails its
/// residual check.
class SingularSystemError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Thrown when an operation receives a chart that does not validate.
class InvalidChartError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Transition {
    std::size_t source = 0;
    std::size_t target = 0;
    double rate = 0.0;
    Eigen::MatrixXd reset;  // age_dim x age_dim, entries in {0,1}
};

struct ShsChart {
    std::size_t n_states = 0;
    std::size_t age_dim = 0;
    Eigen::MatrixXd drift;  // n_states x age_dim, entries in {0,1}
    std::vector<Transition> transitions;
    std::vector<std::string> state_names;  // optional, empty or n_states long
};

enum class ViolationKind {
    EmptyStateSet,
    ZeroAgeDim,
    DriftShape,
    DriftEntry,
    StateNamesSize,
    EndpointOutOfRange,
    NonpositiveRate,
    ResetShape,
    ResetEntry,
    ResetAmplifies,
    NotStronglyConnected,
};

struct Violation {
    ViolationKind kind;
    std::size_t index = 0;  // transition or state index, when meaningful
    std::string message;
};

/// Empty when the chart is valid.
using ValidationVerdict = std::vector<Violation>;

[[nodiscard]] ValidationVerdict validate_chart(const ShsChart& chart);

/// Throws InvalidChartError listing every violation.
void require_valid(const ShsChart& chart);

struct EngineOptions {
    double balance_tolerance = 1e-12;
    double correlation_tolerance = 1e-10;
    double nonnegativity_tolerance = 1e-12;
    // Systems whose reciprocal condition estimate falls below this are singular.
    double min_rcond = 1e-14;
};

struct StationaryDistribution {
    Eigen::VectorXd probabilities;
};

struct CorrelationTable {
    Eigen::MatrixXd v;  // n_states x age_dim
};

/// Square system M * v = c over the stacked unknowns v(q * age_dim + j).
struct LinearSystem {
    Eigen::MatrixXd matrix;
    Eigen::VectorXd rhs;
};

[[nodiscard]] inline std::size_t unknown_index(const ShsChart& chart, std::size_t state,
                                               std::size_t component) {
    return state * chart.age_dim + component;
}

/// Global balance operator G with (G pi)_q = pi_q * out_q - sum_in rate * pi_src.
/// Self-transitions cancel and are excluded.
[[nodiscard]] Eigen::MatrixXd balance_operator(const ShsChart& chart);

/// Largest transition rate, at least 1. Used to scale residual guards.
[[nodiscard]] double rate_scale(const ShsChart& chart);

[[nodiscard]] StationaryDistribution stationary_distribution(const ShsChart& chart,
                                                             const EngineOptions& options = {});

/// Assembles the full correlation fixed point
///   v_q * sum_{l out of q} rate_l = b_q * pi_q + sum_{l into q} rate_l * v_{src(l)} * A_l
/// with every transition, self-transitions included on both sides.
[[nodiscard]] LinearSystem assemble_correlation_system(const ShsChart& chart,
                                                       const StationaryDistribution& pi);

[[nodiscard]] CorrelationTable correlation_table(const ShsChart& chart,
                                                 const StationaryDistribution& pi,
                                                 const EngineOptions& options = {});

/// Sum over states of the selected components of the correlation table.
[[nodiscard]] double average_age(const ShsChart& chart, std::span<const std::size_t> components,
                                 const EngineOptions& options = {});

[[nodiscard]] double average_age(const CorrelationTable& table,
                                 std::span<const std::size_t> components);

/// Dense direct solve with partial pivoting, guarded by a reciprocal-condition
/// check and a max-norm residual check |A x - b| <= tolerance * residual_scale.
[[nodiscard]] Eigen::VectorXd solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b,
                                          double tolerance, double residual_scale,
                                          double min_rcond, const std::string& what);

}  // namespace aoi::shs
