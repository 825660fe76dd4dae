#include "aoi/io.hpp"

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

namespace aoi::io {

using nlohmann::json;

std::string format_number(double x) {
    std::array<char, 64> buf{};
    const auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), x,
                                         std::chars_format::general, 12);
    if (ec != std::errc{}) throw FormatError("cannot format number");
    return std::string(buf.data(), end);
}

double round12(double x) {
    if (!std::isfinite(x)) return x;
    const auto text = format_number(x);
    double out = 0.0;
    std::from_chars(text.data(), text.data() + text.size(), out);
    return out;
}

json rounded(json j) {
    if (j.is_number_float()) return round12(j.get<double>());
    if (j.is_structured())
        for (auto& child : j) child = rounded(std::move(child));
    return j;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

namespace {

json matrix_to_json(const Eigen::MatrixXd& m) {
    json rows = json::array();
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        json row = json::array();
        for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
        rows.push_back(std::move(row));
    }
    return rows;
}

Eigen::MatrixXd matrix_from_json(const json& j, std::size_t rows, std::size_t cols,
                                 const char* what) {
    if (!j.is_array() || j.size() != rows) throw FormatError(std::string(what) + ": wrong row count");
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = j[r];
        if (!row.is_array() || row.size() != cols)
            throw FormatError(std::string(what) + ": wrong column count");
        for (std::size_t c = 0; c < cols; ++c)
            m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c].get<double>();
    }
    return m;
}

double required_number(const json& j, const char* key) {
    if (!j.contains(key) || !j.at(key).is_number())
        throw FormatError(std::string("missing or non-numeric field '") + key + "'");
    return j.at(key).get<double>();
}

}  // namespace

json chart_to_json(const shs::ShsChart& chart) {
    json j;
    json states = json::array();
    for (std::size_t q = 0; q < chart.n_states; ++q)
        states.push_back(chart.state_names.empty() ? std::to_string(q) : chart.state_names[q]);
    j["states"] = std::move(states);
    j["age_dim"] = chart.age_dim;
    j["drift"] = matrix_to_json(chart.drift);
    json transitions = json::array();
    for (const auto& t : chart.transitions) {
        transitions.push_back(
            {{"from", t.source}, {"to", t.target}, {"rate", t.rate}, {"reset", matrix_to_json(t.reset)}});
    }
    j["transitions"] = std::move(transitions);
    return j;
}

shs::ShsChart chart_from_json(const json& j) {
    try {
        shs::ShsChart chart;
        const auto& states = j.at("states");
        if (!states.is_array()) throw FormatError("'states' must be an array");
        chart.n_states = states.size();
        for (const auto& s : states) chart.state_names.push_back(s.get<std::string>());
        chart.age_dim = j.at("age_dim").get<std::size_t>();
        chart.drift = matrix_from_json(j.at("drift"), chart.n_states, chart.age_dim, "drift");
        for (const auto& t : j.at("transitions")) {
            chart.transitions.push_back(shs::Transition{
                t.at("from").get<std::size_t>(), t.at("to").get<std::size_t>(),
                t.at("rate").get<double>(),
                matrix_from_json(t.at("reset"), chart.age_dim, chart.age_dim, "reset")});
        }
        return chart;
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed chart: ") + e.what());
    }
}

json params_to_json(const SystemParams& p) {
    json noma;
    if (const auto* ad = std::get_if<AlphaDelta>(&p.derivation)) {
        noma = {{"mode", "alpha"}, {"alpha", ad->alpha}, {"delta", ad->delta}};
    } else {
        noma = {{"mode", "explicit"}, {"delta", p.delta}};
    }
    noma["mu1p"] = p.mu1p;
    noma["mu2p"] = p.mu2p;
    return {{"lambda1", p.lambda1}, {"lambda2", p.lambda2}, {"mu1", p.mu1}, {"mu2", p.mu2},
            {"noma", std::move(noma)}};
}

SystemParams params_from_json(const json& j) {
    if (!j.is_object()) throw FormatError("parameters must be a JSON object");
    const double l1 = required_number(j, "lambda1");
    const double l2 = required_number(j, "lambda2");
    const double m1 = required_number(j, "mu1");
    const double m2 = required_number(j, "mu2");
    if (!j.contains("noma")) {
        // OMA-only configuration; superposed rates default to the alpha = 1 split.
        return SystemParams::with_alpha(l1, l2, m1, m2, 1.0, 0.5);
    }
    const auto& noma = j.at("noma");
    if (!noma.is_object()) throw FormatError("'noma' must be an object");
    const std::string mode = noma.value("mode", std::string("explicit"));
    const double delta = noma.contains("delta") ? required_number(noma, "delta") : 0.5;
    if (mode == "alpha") return SystemParams::with_alpha(l1, l2, m1, m2, required_number(noma, "alpha"), delta);
    if (mode == "explicit")
        return SystemParams::with_explicit_rates(l1, l2, m1, m2, required_number(noma, "mu1p"),
                                                 required_number(noma, "mu2p"), delta);
    throw FormatError("unknown noma mode '" + mode + "'");
}

SystemParams load_params(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw FormatError("cannot open config '" + path + "'");
    try {
        return params_from_json(json::parse(in));
    } catch (const json::exception& e) {
        throw FormatError(std::string("malformed config: ") + e.what());
    }
}

json report_to_json(const AgeReport& r) {
    json j = params_to_json(r.params);
    j["method"] = to_string(r.method);
    j["scheme"] = to_string(r.scheme);
    j["age_user1"] = r.age_user1;
    j["age_user2"] = r.age_user2;
    j["age_total"] = r.age_total;
    return j;
}

json sim_result_to_json(const sim::SimResult& r) {
    return {{"method", "simulation"},
            {"scheme", to_string(r.scheme)},
            {"age_user1", r.age_user1},
            {"age_user2", r.age_user2},
            {"age_total", r.age_total},
            {"ci_half_width", {r.ci_half_width[0], r.ci_half_width[1]}},
            {"std_error", {r.std_error[0], r.std_error[1]}},
            {"events_processed", r.events_processed},
            {"sim_time", r.sim_time},
            {"seed", r.seed},
            {"batches", r.batches},
            {"state_occupancy", r.state_occupancy}};
}

}  // namespace aoi::io
