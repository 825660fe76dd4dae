#pragma once

// Command implementations behind the `aoi` executable. Every command writes
// to the given streams and returns a process exit code, so tests can drive
// the CLI in-process.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "aoi/models.hpp"
#include "aoi/sim.hpp"

namespace aoi::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 2;
inline constexpr int kExitInfeasible = 3;
inline constexpr int kExitNumerical = 4;

/// Relative tolerance under which two totals count as a tie.
inline constexpr double kTieTolerance = 1e-9;

class CliError : public std::runtime_error {
public:
    CliError(int code, const std::string& message) : std::runtime_error(message), code_(code) {}
    [[nodiscard]] int code() const { return code_; }

private:
    int code_;
};

enum class Winner { Oma, Noma, Tie };

[[nodiscard]] std::string to_string(Winner winner);
[[nodiscard]] Winner decide_winner(double oma_total, double noma_total,
                                   double tolerance = kTieTolerance);

enum class SweepVariable { Alpha, Lambda };

struct SweepSpec {
    SweepVariable variable = SweepVariable::Alpha;
    double from = 1.0;
    double to = 2.0;
    std::uint32_t steps = 101;
    bool logarithmic = false;
    SystemParams fixed;
    // Alpha sweeps: arrival rate standing in for lambda -> infinity.
    // Defaults to 1e4 * max(mu1, mu2).
    std::optional<double> lambda;
    bool simulate = false;
    std::uint64_t events = 1'000'000;
    std::uint64_t seed = 1;
    std::uint32_t batches = 20;
    unsigned threads = 0;  // 0: hardware concurrency
};

/// Throws CliError(kExitUsage) on an invalid spec.
void validate(const SweepSpec& spec);

[[nodiscard]] std::vector<double> sweep_grid(const SweepSpec& spec);

/// Parameters evaluated at one grid value.
[[nodiscard]] SystemParams params_at(const SweepSpec& spec, double value);

struct ComparisonRow {
    double value = 0.0;
    AgeReport oma;
    AgeReport noma;
    Winner winner = Winner::Tie;
    std::optional<sim::SimResult> sim_oma;
    std::optional<sim::SimResult> sim_noma;
};

/// One row per grid point, in grid order regardless of evaluation order.
[[nodiscard]] std::vector<ComparisonRow> run_sweep(const SweepSpec& spec);

/// Sweep value at which the winner first flips, by linear interpolation of
/// the total-age gap between the two bracketing grid points.
[[nodiscard]] std::optional<double> observed_crossover(const std::vector<ComparisonRow>& rows);

[[nodiscard]] std::string rows_to_csv(const std::vector<ComparisonRow>& rows);

[[nodiscard]] std::string render_svg(const std::vector<ComparisonRow>& rows, const SweepSpec& spec,
                                     std::optional<double> crossover);

/// Parses argv and dispatches to a subcommand.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace aoi::cli
