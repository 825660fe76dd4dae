#include "aoi/shs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace aoi::shs {

namespace {

bool is_binary(double x) { return x == 0.0 || x == 1.0; }

// Every state reaches every other through non-self edges, checked with a
// forward and a reverse search from state 0.
bool strongly_connected(const ShsChart& chart) {
    const std::size_t n = chart.n_states;
    std::vector<std::vector<std::size_t>> fwd(n), rev(n);
    for (const auto& t : chart.transitions) {
        if (t.source == t.target || t.source >= n || t.target >= n) continue;
        fwd[t.source].push_back(t.target);
        rev[t.target].push_back(t.source);
    }
    auto reaches_all = [n](const std::vector<std::vector<std::size_t>>& adj) {
        std::vector<bool> seen(n, false);
        std::vector<std::size_t> stack{0};
        seen[0] = true;
        std::size_t count = 1;
        while (!stack.empty()) {
            const auto q = stack.back();
            stack.pop_back();
            for (const auto next : adj[q]) {
                if (!seen[next]) {
                    seen[next] = true;
                    ++count;
                    stack.push_back(next);
                }
            }
        }
        return count == n;
    };
    return reaches_all(fwd) && reaches_all(rev);
}

void clamp_small_negatives(Eigen::Ref<Eigen::MatrixXd> values, double tolerance,
                           const char* what) {
    for (Eigen::Index i = 0; i < values.size(); ++i) {
        double& x = values.data()[i];
        if (x < 0.0) {
            if (x < -tolerance) {
                std::ostringstream os;
                os << what << " has negative entry " << x;
                throw SingularSystemError(os.str());
            }
            x = 0.0;
        }
    }
}

}  // namespace

ValidationVerdict validate_chart(const ShsChart& chart) {
    ValidationVerdict out;
    auto add = [&out](ViolationKind kind, std::size_t index, std::string message) {
        out.push_back({kind, index, std::move(message)});
    };

    if (chart.n_states == 0) add(ViolationKind::EmptyStateSet, 0, "chart has no states");
    if (chart.age_dim == 0) add(ViolationKind::ZeroAgeDim, 0, "age_dim must be positive");

    const auto n = static_cast<Eigen::Index>(chart.n_states);
    const auto d = static_cast<Eigen::Index>(chart.age_dim);
    if (chart.drift.rows() != n || chart.drift.cols() != d) {
        add(ViolationKind::DriftShape, 0, "drift must be n_states x age_dim");
    } else {
        for (Eigen::Index q = 0; q < n; ++q)
            for (Eigen::Index j = 0; j < d; ++j)
                if (!is_binary(chart.drift(q, j)))
                    add(ViolationKind::DriftEntry, static_cast<std::size_t>(q),
                        "drift entry not in {0,1} at state " + std::to_string(q));
    }
    if (!chart.state_names.empty() && chart.state_names.size() != chart.n_states)
        add(ViolationKind::StateNamesSize, 0, "state_names size differs from n_states");

    for (std::size_t k = 0; k < chart.transitions.size(); ++k) {
        const auto& t = chart.transitions[k];
        const auto at = " at transition " + std::to_string(k);
        if (t.source >= chart.n_states || t.target >= chart.n_states)
            add(ViolationKind::EndpointOutOfRange, k, "endpoint out of range" + at);
        if (!(t.rate > 0.0) || !std::isfinite(t.rate))
            add(ViolationKind::NonpositiveRate, k, "nonpositive rate" + at);
        if (t.reset.rows() != d || t.reset.cols() != d) {
            add(ViolationKind::ResetShape, k, "reset map must be age_dim x age_dim" + at);
            continue;
        }
        bool binary = true;
        for (Eigen::Index i = 0; i < t.reset.size(); ++i) binary = binary && is_binary(t.reset.data()[i]);
        if (!binary) {
            add(ViolationKind::ResetEntry, k, "reset entry not in {0,1}" + at);
            continue;
        }
        for (Eigen::Index j = 0; j < d; ++j)
            if (t.reset.col(j).sum() > 1.0)
                add(ViolationKind::ResetAmplifies, k,
                    "reset column " + std::to_string(j) + " sums several components" + at);
    }

    if (chart.n_states > 0 && !strongly_connected(chart))
        add(ViolationKind::NotStronglyConnected, 0, "not strongly connected");
    return out;
}

void require_valid(const ShsChart& chart) {
    const auto verdict = validate_chart(chart);
    if (verdict.empty()) return;
    std::string message = "invalid chart:";
    for (const auto& v : verdict) message += " [" + v.message + "]";
    throw InvalidChartError(message);
}

Eigen::VectorXd solve_dense(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, double tolerance,
                            double residual_scale, double min_rcond, const std::string& what) {
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(a);
    const double rcond = lu.rcond();
    if (!(rcond >= min_rcond)) {
        std::ostringstream os;
        os << what << ": singular system (rcond " << rcond << ")";
        throw SingularSystemError(os.str());
    }
    Eigen::VectorXd x = lu.solve(b);
    const double residual = (a * x - b).lpNorm<Eigen::Infinity>();
    if (!x.allFinite() || !(residual <= tolerance * residual_scale)) {
        std::ostringstream os;
        os << what << ": residual " << residual << " exceeds " << tolerance * residual_scale;
        throw SingularSystemError(os.str());
    }
    return x;
}

Eigen::MatrixXd balance_operator(const ShsChart& chart) {
    const auto n = static_cast<Eigen::Index>(chart.n_states);
    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (const auto& t : chart.transitions) {
        if (t.source == t.target) continue;
        const auto s = static_cast<Eigen::Index>(t.source);
        g(s, s) += t.rate;
        g(static_cast<Eigen::Index>(t.target), s) -= t.rate;
    }
    return g;
}

double rate_scale(const ShsChart& chart) {
    double scale = 1.0;
    for (const auto& t : chart.transitions) scale = std::max(scale, t.rate);
    return scale;
}

StationaryDistribution stationary_distribution(const ShsChart& chart,
                                               const EngineOptions& options) {
    require_valid(chart);
    const auto n = static_cast<Eigen::Index>(chart.n_states);
    const Eigen::MatrixXd g = balance_operator(chart);

    // One balance equation is redundant; the last row carries normalization.
    Eigen::MatrixXd a = g;
    a.row(n - 1).setOnes();
    Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
    c(n - 1) = 1.0;

    const double scale = rate_scale(chart);
    Eigen::VectorXd pi = solve_dense(a, c, options.balance_tolerance, scale, options.min_rcond,
                                     "stationary distribution");
    clamp_small_negatives(pi, options.nonnegativity_tolerance, "stationary distribution");

    const double balance_residual = (g * pi).lpNorm<Eigen::Infinity>();
    if (!(balance_residual <= options.balance_tolerance * scale) ||
        std::abs(pi.sum() - 1.0) > options.balance_tolerance) {
        throw SingularSystemError("stationary distribution fails its balance check");
    }
    return {std::move(pi)};
}

LinearSystem assemble_correlation_system(const ShsChart& chart, const StationaryDistribution& pi) {
    const auto n = static_cast<Eigen::Index>(chart.n_states);
    const auto d = static_cast<Eigen::Index>(chart.age_dim);
    const Eigen::Index size = n * d;
    LinearSystem sys{Eigen::MatrixXd::Zero(size, size), Eigen::VectorXd::Zero(size)};

    for (const auto& t : chart.transitions) {
        const auto src = static_cast<Eigen::Index>(t.source);
        const auto dst = static_cast<Eigen::Index>(t.target);
        for (Eigen::Index j = 0; j < d; ++j) {
            // Outflow of v_src, every component.
            sys.matrix(src * d + j, src * d + j) += t.rate;
            // Inflow into v_dst(j): rate * sum_i v_src(i) * A(i, j).
            for (Eigen::Index i = 0; i < d; ++i)
                if (t.reset(i, j) != 0.0) sys.matrix(dst * d + j, src * d + i) -= t.rate * t.reset(i, j);
        }
    }
    for (Eigen::Index q = 0; q < n; ++q)
        for (Eigen::Index j = 0; j < d; ++j) sys.rhs(q * d + j) = chart.drift(q, j) * pi.probabilities(q);
    return sys;
}

CorrelationTable correlation_table(const ShsChart& chart, const StationaryDistribution& pi,
                                   const EngineOptions& options) {
    require_valid(chart);
    if (pi.probabilities.size() != static_cast<Eigen::Index>(chart.n_states))
        throw std::invalid_argument("stationary distribution size differs from chart");

    const auto sys = assemble_correlation_system(chart, pi);
    const auto lu = Eigen::PartialPivLU<Eigen::MatrixXd>(sys.matrix);
    if (!(lu.rcond() >= options.min_rcond)) {
        throw SingularSystemError(
            "correlation system is singular: the chart admits no finite limiting correlation");
    }
    Eigen::VectorXd v = lu.solve(sys.rhs);
    const double residual = (sys.matrix * v - sys.rhs).lpNorm<Eigen::Infinity>();
    const double bound =
        options.correlation_tolerance * (1.0 + v.lpNorm<Eigen::Infinity>()) * rate_scale(chart);
    if (!v.allFinite() || !(residual <= bound)) {
        throw SingularSystemError(
            "correlation system is singular: the chart admits no finite limiting correlation");
    }
    clamp_small_negatives(v, options.nonnegativity_tolerance * (1.0 + v.lpNorm<Eigen::Infinity>()),
                          "correlation table");

    CorrelationTable table;
    // v is stacked state-major; Eigen maps are column-major by default.
    table.v = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
        v.data(), static_cast<Eigen::Index>(chart.n_states), static_cast<Eigen::Index>(chart.age_dim));
    return table;
}

double average_age(const CorrelationTable& table, std::span<const std::size_t> components) {
    double total = 0.0;
    for (const auto j : components) {
        if (j >= static_cast<std::size_t>(table.v.cols()))
            throw std::out_of_range("age component index out of range");
        total += table.v.col(static_cast<Eigen::Index>(j)).sum();
    }
    return total;
}

double average_age(const ShsChart& chart, std::span<const std::size_t> components,
                   const EngineOptions& options) {
    const auto pi = stationary_distribution(chart, options);
    return average_age(correlation_table(chart, pi, options), components);
}

}  // namespace aoi::shs
