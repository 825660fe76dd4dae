#pragma once

// Canonical JSON forms for charts, parameters, reports and simulation
// results, plus the fixed 12-significant-digit number format used by every
// emitted file.

#include <string>
#include <string_view>

#include "json.hpp"

#include "aoi/models.hpp"
#include "aoi/shs.hpp"
#include "aoi/sim.hpp"

namespace aoi::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Locale-independent shortest form of `x` rounded to 12 significant digits.
[[nodiscard]] std::string format_number(double x);

/// `x` rounded to 12 significant digits, for embedding in JSON values.
[[nodiscard]] double round12(double x);

// Chart: {"states": [names...], "age_dim": d, "drift": [[...]...],
//         "transitions": [{"from", "to", "rate", "reset": [[...]...]}...]}
[[nodiscard]] nlohmann::json chart_to_json(const shs::ShsChart& chart);
[[nodiscard]] shs::ShsChart chart_from_json(const nlohmann::json& j);

// Params: {"lambda1", "lambda2", "mu1", "mu2",
//          "noma": {"mode": "alpha"|"explicit", "alpha", "delta", "mu1p", "mu2p"}}
[[nodiscard]] nlohmann::json params_to_json(const SystemParams& params);
[[nodiscard]] SystemParams params_from_json(const nlohmann::json& j);
[[nodiscard]] SystemParams load_params(const std::string& path);

[[nodiscard]] nlohmann::json report_to_json(const AgeReport& report);
[[nodiscard]] nlohmann::json sim_result_to_json(const sim::SimResult& result);

/// Rounds every floating-point leaf to 12 significant digits.
[[nodiscard]] nlohmann::json rounded(nlohmann::json j);

/// Deterministic text: 2-space indent, trailing newline.
[[nodiscard]] std::string dump(const nlohmann::json& j);

}  // namespace aoi::io
