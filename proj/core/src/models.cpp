#include "aoi/models.hpp"

#include <array>
#include <cmath>
#include <sstream>

#include <boost/math/tools/roots.hpp>

namespace aoi {

namespace {

using shs::ShsChart;
using shs::Transition;

// Reset maps on [monitor age x0, packet age x1], applied as x' = x * A.
Eigen::MatrixXd keep_monitor() {  // [x0, x1] -> [x0, 0]
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(0, 0) = 1.0;
    return a;
}

Eigen::MatrixXd deliver() {  // [x0, x1] -> [x1, 0]
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(2, 2);
    a(1, 0) = 1.0;
    return a;
}

Eigen::MatrixXd keep_both() { return Eigen::MatrixXd::Identity(2, 2); }

Eigen::MatrixXd drift_rows(std::initializer_list<std::array<double, 2>> rows) {
    Eigen::MatrixXd drift(static_cast<Eigen::Index>(rows.size()), 2);
    Eigen::Index q = 0;
    for (const auto& r : rows) {
        drift(q, 0) = r[0];
        drift(q, 1) = r[1];
        ++q;
    }
    return drift;
}

bool nearly_equal(double a, double b) {
    return std::abs(a - b) <= 1e-12 * std::max(std::abs(a), std::abs(b));
}

const SystemParams& oriented(const SystemParams& params, Perspective perspective,
                             SystemParams& storage) {
    if (perspective == Perspective::User1) return params;
    storage = params.swapped();
    return storage;
}

Eigen::VectorXd solve_checked(const shs::LinearSystem& sys, const char* what) {
    const double scale = std::max(1.0, sys.matrix.lpNorm<Eigen::Infinity>());
    return shs::solve_dense(sys.matrix, sys.rhs, 1e-12, scale, 1e-14, what);
}

AgeReport make_report(double user1, double user2, Method method, Scheme scheme,
                      const SystemParams& params) {
    return AgeReport{user1, user2, user1 + user2, method, scheme, params};
}

}  // namespace

std::string to_string(Scheme scheme) { return scheme == Scheme::Noma ? "noma" : "oma"; }

Scheme scheme_from_string(const std::string& name) {
    if (name == "noma") return Scheme::Noma;
    if (name == "oma") return Scheme::Oma;
    throw std::invalid_argument("unknown scheme '" + name + "'");
}

std::string to_string(Method method) {
    switch (method) {
        case Method::Engine: return "engine";
        case Method::TheoremMatrices: return "theorem-matrices";
        case Method::LimitFormula: return "limit-formula";
        case Method::Simulation: return "simulation";
    }
    return "unknown";
}

SystemParams SystemParams::with_explicit_rates(double lambda1, double lambda2, double mu1,
                                               double mu2, double mu1p, double mu2p,
                                               double delta) {
    return SystemParams{lambda1, lambda2, mu1, mu2, mu1p, mu2p, ExplicitRates{}, delta};
}

SystemParams SystemParams::with_alpha(double lambda1, double lambda2, double mu1, double mu2,
                                      double alpha, double delta) {
    const auto [p1, p2] = noma_rates_from_alpha(mu1, mu2, alpha, delta);
    return SystemParams{lambda1, lambda2, mu1, mu2, p1, p2, AlphaDelta{alpha, delta}, delta};
}

SystemParams SystemParams::swapped() const {
    SystemParams out{lambda2, lambda1, mu2, mu1, mu2p, mu1p, derivation, 1.0 - delta};
    if (auto* ad = std::get_if<AlphaDelta>(&out.derivation)) ad->delta = 1.0 - ad->delta;
    return out;
}

SystemParams SystemParams::with_arrival_rate(double lambda) const {
    SystemParams out = *this;
    out.lambda1 = lambda;
    out.lambda2 = lambda;
    return out;
}

void require_positive_rates(const SystemParams& p, bool need_noma_rates) {
    auto check = [](double x, const char* name) {
        if (!(x > 0.0) || !std::isfinite(x))
            throw InvalidParamsError(std::string(name) + " must be positive and finite");
    };
    check(p.lambda1, "lambda1");
    check(p.lambda2, "lambda2");
    check(p.mu1, "mu1");
    check(p.mu2, "mu2");
    if (need_noma_rates) {
        check(p.mu1p, "mu1p");
        check(p.mu2p, "mu2p");
    }
}

std::pair<double, double> noma_rates_from_alpha(double mu1, double mu2, double alpha,
                                                double delta) {
    return {alpha * delta * mu1, alpha * (1.0 - delta) * mu2};
}

bool ConstraintReport::feasible() const {
    for (const auto& i : issues)
        if (i.severity == Severity::Violation) return false;
    return true;
}

bool ConstraintReport::has(Constraint c, Severity s) const {
    for (const auto& i : issues)
        if (i.constraint == c && i.severity == s) return true;
    return false;
}

ConstraintReport check_noma_constraints(const SystemParams& p, double delta) {
    ConstraintReport report;
    auto strictly_less = [&report](double lhs, double rhs, Constraint c, const std::string& what) {
        std::ostringstream os;
        if (nearly_equal(lhs, rhs)) {
            os << what << " holds with equality (" << lhs << " = " << rhs << ")";
            report.issues.push_back({c, Severity::Boundary, os.str()});
        } else if (!(lhs < rhs)) {
            os << what << " violated (" << lhs << " >= " << rhs << ")";
            report.issues.push_back({c, Severity::Violation, os.str()});
        }
    };
    strictly_less(p.mu1p, p.mu1, Constraint::ServiceRateUser1, "mu1p < mu1 (user 1)");
    strictly_less(p.mu2p, p.mu2, Constraint::ServiceRateUser2, "mu2p < mu2 (user 2)");
    strictly_less(delta * p.mu1 + (1.0 - delta) * p.mu2, p.mu1p + p.mu2p, Constraint::SumRate,
                  "mu1p + mu2p > delta*mu1 + (1-delta)*mu2 (sum rate)");
    return report;
}

ShsChart build_noma_chart(const SystemParams& params, Perspective perspective) {
    require_positive_rates(params);
    SystemParams storage;
    const auto& p = oriented(params, perspective, storage);

    ShsChart chart;
    chart.n_states = 4;
    chart.age_dim = 2;
    chart.state_names = {"idle", "u1-alone", "both", "u2-alone"};
    chart.drift = drift_rows({{1, 0}, {1, 1}, {1, 1}, {1, 0}});
    // Arrivals of user 2 in states 2 and 3 change neither state nor ages; omitted.
    chart.transitions = {
        Transition{0, 1, p.lambda1, keep_monitor()},
        Transition{0, 3, p.lambda2, keep_monitor()},
        Transition{1, 1, p.lambda1, keep_monitor()},
        Transition{1, 0, p.mu1, deliver()},
        Transition{1, 2, p.lambda2, keep_both()},
        Transition{2, 1, p.mu2p, keep_both()},
        Transition{2, 2, p.lambda1, keep_monitor()},
        Transition{2, 3, p.mu1p, deliver()},
        Transition{3, 2, p.lambda1, keep_monitor()},
        Transition{3, 0, p.mu2, keep_monitor()},
    };
    return chart;
}

ShsChart build_oma_chart(const SystemParams& params, Perspective perspective) {
    require_positive_rates(params, false);
    SystemParams storage;
    const auto& p = oriented(params, perspective, storage);

    ShsChart chart;
    chart.n_states = 5;
    chart.age_dim = 2;
    chart.state_names = {"idle", "u1-served", "u2-served", "u2-served-u1-waiting",
                         "u1-served-u2-waiting"};
    chart.drift = drift_rows({{1, 0}, {1, 1}, {1, 0}, {1, 1}, {1, 1}});
    chart.transitions = {
        Transition{0, 1, p.lambda1, keep_monitor()},
        Transition{0, 2, p.lambda2, keep_monitor()},
        Transition{1, 0, p.mu1, deliver()},
        Transition{1, 1, p.lambda1, keep_monitor()},
        // A user-2 arrival during user-1 service waits for the server.
        Transition{1, 4, p.lambda2, keep_both()},
        Transition{2, 0, p.mu2, keep_both()},
        Transition{2, 3, p.lambda1, keep_monitor()},
        Transition{3, 3, p.lambda1, keep_monitor()},
        Transition{3, 1, p.mu2, keep_both()},
        Transition{4, 4, p.lambda1, keep_monitor()},
        Transition{4, 2, p.mu1, deliver()},
    };
    return chart;
}

AgeReport solve_engine(const SystemParams& params, Scheme scheme,
                       const shs::EngineOptions& options) {
    const std::array<std::size_t, 1> monitor{0};
    double ages[2];
    for (const auto perspective : {Perspective::User1, Perspective::User2}) {
        const auto chart = scheme == Scheme::Noma ? build_noma_chart(params, perspective)
                                                  : build_oma_chart(params, perspective);
        ages[perspective == Perspective::User1 ? 0 : 1] = shs::average_age(chart, monitor, options);
    }
    return make_report(ages[0], ages[1], Method::Engine, scheme, params);
}

shs::LinearSystem theorem2_stationary_system(const SystemParams& p) {
    Eigen::MatrixXd a(4, 4);
    // clang-format off
    a << p.lambda1 + p.lambda2, -p.mu1,     0.0,             -p.mu2,
         -p.lambda2,            0.0,        -p.mu1p,         p.lambda1 + p.mu2,
         0.0,                   -p.lambda2, p.mu1p + p.mu2p, -p.lambda1,
         1.0,                   1.0,        1.0,             1.0;
    // clang-format on
    Eigen::VectorXd c = Eigen::VectorXd::Zero(4);
    c(3) = 1.0;
    return {a, c};
}

shs::LinearSystem theorem2_correlation_system(const SystemParams& p, const Eigen::VectorXd& pi,
                                              MatrixForm form) {
    const bool verbatim = form == MatrixForm::Verbatim;
    const double idle_out = verbatim ? p.lambda1 + p.lambda1 : p.lambda1 + p.lambda2;
    const double v21_out = verbatim ? p.mu1p + p.mu2p : p.lambda1 + p.mu1p + p.mu2p;
    const double l1 = p.lambda1, l2 = p.lambda2;

    Eigen::MatrixXd a(6, 6);
    // clang-format off
    a << idle_out, 0.0,      -p.mu1,       0.0,             0.0,      -p.mu2,
         -l1,      l2 + p.mu1, 0.0,        -p.mu2p,         0.0,      0.0,
         0.0,      0.0,      l1 + l2 + p.mu1, 0.0,          -p.mu2p,  0.0,
         0.0,      -l2,      0.0,          p.mu1p + p.mu2p, 0.0,      -l1,
         0.0,      0.0,      -l2,          0.0,             v21_out,  0.0,
         -l2,      0.0,      0.0,          0.0,             -p.mu1p,  l1 + p.mu2;
    // clang-format on
    Eigen::VectorXd c(6);
    c << pi(0), pi(1), pi(1), pi(2), pi(2), pi(3);
    return {a, c};
}

shs::LinearSystem theorem3_stationary_system(const SystemParams& p) {
    const double l1 = p.lambda1, l2 = p.lambda2;
    Eigen::MatrixXd a(5, 5);
    // clang-format off
    a << l1 + l2, -p.mu1,      -p.mu2,      0.0,    0.0,
         -l1,     p.mu1 + l2,  0.0,         -p.mu2, 0.0,
         -l2,     0.0,         l1 + p.mu2,  0.0,    -p.mu1,
         0.0,     0.0,         -l1,         p.mu2,  0.0,
         1.0,     1.0,         1.0,         1.0,    1.0;
    // clang-format on
    Eigen::VectorXd c = Eigen::VectorXd::Zero(5);
    c(4) = 1.0;
    return {a, c};
}

shs::LinearSystem theorem3_correlation_system(const SystemParams& p, const Eigen::VectorXd& pi) {
    const double l1 = p.lambda1, l2 = p.lambda2, m1 = p.mu1, m2 = p.mu2;
    Eigen::MatrixXd a(8, 8);
    // clang-format off
    a << l1 + l2, 0.0,     -m1,          -m2,     0.0, 0.0,     0.0, 0.0,
         -l1,     l2 + m1, 0.0,          0.0,     -m2, 0.0,     0.0, 0.0,
         0.0,     0.0,     l1 + l2 + m1, 0.0,     0.0, -m2,     0.0, 0.0,
         -l2,     0.0,     0.0,          l1 + m2, 0.0, 0.0,     0.0, -m1,
         0.0,     0.0,     0.0,          -l1,     m2,  0.0,     0.0, 0.0,
         0.0,     0.0,     0.0,          0.0,     0.0, l1 + m2, 0.0, 0.0,
         0.0,     -l2,     0.0,          0.0,     0.0, 0.0,     m1,  0.0,
         0.0,     0.0,     -l2,          0.0,     0.0, 0.0,     0.0, l1 + m1;
    // clang-format on
    Eigen::VectorXd c(8);
    c << pi(0), pi(1), pi(1), pi(2), pi(3), pi(3), pi(4), pi(4);
    return {a, c};
}

double theorem2_user1_age(const SystemParams& params, MatrixForm form) {
    require_positive_rates(params);
    const auto pi = solve_checked(theorem2_stationary_system(params), "NOMA stationary system");
    const auto v = solve_checked(theorem2_correlation_system(params, pi, form),
                                 "NOMA correlation system");
    double age = 0.0;
    for (const auto slot : kTheorem2MonitorSlots) age += v(static_cast<Eigen::Index>(slot));
    return age;
}

double theorem3_user1_age(const SystemParams& params) {
    require_positive_rates(params, false);
    const auto pi = solve_checked(theorem3_stationary_system(params), "OMA stationary system");
    const auto v = solve_checked(theorem3_correlation_system(params, pi), "OMA correlation system");
    double age = 0.0;
    for (const auto slot : kTheorem3MonitorSlots) age += v(static_cast<Eigen::Index>(slot));
    return age;
}

AgeReport solve_theorem2(const SystemParams& params) {
    return make_report(theorem2_user1_age(params), theorem2_user1_age(params.swapped()),
                       Method::TheoremMatrices, Scheme::Noma, params);
}

AgeReport solve_theorem3(const SystemParams& params) {
    return make_report(theorem3_user1_age(params), theorem3_user1_age(params.swapped()),
                       Method::TheoremMatrices, Scheme::Oma, params);
}

double oma_limit_total(double mu1, double mu2) {
    if (!(mu1 > 0.0) || !(mu2 > 0.0)) throw InvalidParamsError("service rates must be positive");
    return 1.0 / mu1 + 1.0 / mu2 + (1.0 / mu1) / (1.0 + mu1 / mu2) + (1.0 / mu2) / (1.0 + mu2 / mu1);
}

double noma_limit_total(double mu1p, double mu2p) {
    if (!(mu1p > 0.0) || !(mu2p > 0.0)) throw InvalidParamsError("service rates must be positive");
    return 1.0 / mu1p + 1.0 / mu2p;
}

std::optional<double> crossover_alpha(double mu1, double mu2, double delta) {
    if (!(delta > 0.0 && delta < 1.0)) throw InvalidParamsError("delta must lie in (0, 1)");
    const double oma = oma_limit_total(mu1, mu2);
    // Decreasing in alpha.
    auto gap = [&](double alpha) {
        const auto [p1, p2] = noma_rates_from_alpha(mu1, mu2, alpha, delta);
        return noma_limit_total(p1, p2) - oma;
    };
    const double at_one = gap(1.0);
    const double at_two = gap(2.0);
    if (at_one == 0.0) return 1.0;
    if (at_two == 0.0) return 2.0;
    if (at_one < 0.0 || at_two > 0.0) return std::nullopt;

    auto tolerance = [](double a, double b) { return std::abs(b - a) <= 1e-9; };
    const auto [lo, hi] = boost::math::tools::bisect(gap, 1.0, 2.0, tolerance);
    return 0.5 * (lo + hi);
}

}  // namespace aoi
