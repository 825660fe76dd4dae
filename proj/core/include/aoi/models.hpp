#pragma once

// Two-user NOMA and OMA status-update systems with preemptive single-packet
// buffers: parameters, SHS charts, the explicit per-user linear systems,
// high-arrival-rate limits and the NOMA/OMA crossover.

#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "aoi/shs.hpp"

namespace aoi {

class InvalidParamsError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class Scheme { Noma, Oma };
enum class Perspective { User1, User2 };

[[nodiscard]] std::string to_string(Scheme scheme);
[[nodiscard]] Scheme scheme_from_string(const std::string& name);

/// mu1p/mu2p were given directly.
struct ExplicitRates {
    bool operator==(const ExplicitRates&) const = default;
};

/// mu1p = alpha * delta * mu1, mu2p = alpha * (1 - delta) * mu2.
struct AlphaDelta {
    double alpha = 1.0;
    double delta = 0.5;
    bool operator==(const AlphaDelta&) const = default;
};

using RateDerivation = std::variant<ExplicitRates, AlphaDelta>;

struct SystemParams {
    double lambda1 = 1.0;
    double lambda2 = 1.0;
    double mu1 = 1.0;
    double mu2 = 1.0;
    double mu1p = 0.5;
    double mu2p = 0.5;
    RateDerivation derivation = ExplicitRates{};
    // Sharing factor the NOMA constraints are checked at.
    double delta = 0.5;

    [[nodiscard]] static SystemParams with_explicit_rates(double lambda1, double lambda2, double mu1,
                                                          double mu2, double mu1p, double mu2p,
                                                          double delta = 0.5);
    [[nodiscard]] static SystemParams with_alpha(double lambda1, double lambda2, double mu1,
                                                 double mu2, double alpha, double delta = 0.5);

    /// Exchanges the roles of the two users. An alpha-delta derivation maps to
    /// delta' = 1 - delta so the derived rates stay consistent.
    [[nodiscard]] SystemParams swapped() const;

    /// Same parameters with lambda1 = lambda2 = lambda.
    [[nodiscard]] SystemParams with_arrival_rate(double lambda) const;

    friend bool operator==(const SystemParams&, const SystemParams&) = default;
};

/// Throws InvalidParamsError unless every rate is positive and finite. When
/// `need_noma_rates` is false the superposed rates are not inspected.
void require_positive_rates(const SystemParams& params, bool need_noma_rates = true);

[[nodiscard]] std::pair<double, double> noma_rates_from_alpha(double mu1, double mu2, double alpha,
                                                              double delta);

enum class Constraint { ServiceRateUser1, ServiceRateUser2, SumRate };
enum class Severity { Boundary, Violation };

struct ConstraintIssue {
    Constraint constraint;
    Severity severity;
    std::string message;
};

struct ConstraintReport {
    std::vector<ConstraintIssue> issues;

    [[nodiscard]] bool feasible() const;  // no Violation (boundaries allowed)
    [[nodiscard]] bool has(Constraint c, Severity s) const;
};

/// Checks mu'_k < mu_k for each user and mu'_1 + mu'_2 > delta mu1 + (1-delta) mu2.
/// Equality, to a relative 1e-12, is a Boundary warning.
[[nodiscard]] ConstraintReport check_noma_constraints(const SystemParams& params, double delta);

enum class NomaState : std::size_t { Idle = 0, User1Alone = 1, Both = 2, User2Alone = 3 };
enum class OmaState : std::size_t {
    Idle = 0,
    User1Served = 1,
    User2Served = 2,
    User2ServedUser1Waiting = 3,
    User1ServedUser2Waiting = 4,
};

/// Four-state chart seen from one user: age vector [monitor age, packet age].
[[nodiscard]] shs::ShsChart build_noma_chart(const SystemParams& params,
                                             Perspective perspective = Perspective::User1);

/// Five-state chart seen from one user. The mu' rates are unused.
[[nodiscard]] shs::ShsChart build_oma_chart(const SystemParams& params,
                                            Perspective perspective = Perspective::User1);

enum class Method { Engine, TheoremMatrices, LimitFormula, Simulation };

[[nodiscard]] std::string to_string(Method method);

struct AgeReport {
    double age_user1 = 0.0;
    double age_user2 = 0.0;
    double age_total = 0.0;
    Method method = Method::Engine;
    Scheme scheme = Scheme::Noma;
    SystemParams params;
};

/// Generic SHS pipeline on the scheme's chart, once per user perspective.
[[nodiscard]] AgeReport solve_engine(const SystemParams& params, Scheme scheme,
                                     const shs::EngineOptions& options = {});

// Explicit per-user matrices, written out state by state from the transition
// tables. Unknown order for the correlation system:
//   NOMA: [v00, v10, v11, v20, v21, v30]
//   OMA:  [v00, v10, v11, v20, v30, v31, v40, v41]
// The stationary system replaces the last balance row by normalization.

enum class MatrixForm {
    Corrected,  // outflow of the idle state is l1+l2, v21 row keeps the self-loop l1
    Verbatim,   // entries (1,1) = l1+l1 and (5,5) = mu1'+mu2' as printed in the source
};

[[nodiscard]] shs::LinearSystem theorem2_stationary_system(const SystemParams& params);
[[nodiscard]] shs::LinearSystem theorem2_correlation_system(const SystemParams& params,
                                                            const Eigen::VectorXd& pi,
                                                            MatrixForm form = MatrixForm::Corrected);
[[nodiscard]] shs::LinearSystem theorem3_stationary_system(const SystemParams& params);
[[nodiscard]] shs::LinearSystem theorem3_correlation_system(const SystemParams& params,
                                                            const Eigen::VectorXd& pi);

/// Positions of the monitor-age unknowns inside the reduced vectors above.
inline constexpr std::size_t kTheorem2MonitorSlots[] = {0, 1, 3, 5};
inline constexpr std::size_t kTheorem3MonitorSlots[] = {0, 1, 3, 4, 6};

/// Per-user monitor age from the explicit NOMA matrices (user 1 perspective).
[[nodiscard]] double theorem2_user1_age(const SystemParams& params,
                                        MatrixForm form = MatrixForm::Corrected);
[[nodiscard]] double theorem3_user1_age(const SystemParams& params);

[[nodiscard]] AgeReport solve_theorem2(const SystemParams& params);
[[nodiscard]] AgeReport solve_theorem3(const SystemParams& params);

/// Total network age of OMA as both arrival rates grow without bound
/// (round-robin service).
[[nodiscard]] double oma_limit_total(double mu1, double mu2);

/// Total network age of NOMA as both arrival rates grow without bound.
[[nodiscard]] double noma_limit_total(double mu1p, double mu2p);

/// Spectral-efficiency factor in [1, 2] at which the two limits coincide,
/// located by bisection to 1e-9. Empty when no crossing lies in [1, 2].
[[nodiscard]] std::optional<double> crossover_alpha(double mu1, double mu2, double delta);

}  // namespace aoi
