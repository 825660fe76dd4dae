#include "cli.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <future>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "aoi/io.hpp"

namespace aoi::cli {

using nlohmann::json;

namespace {

std::vector<Scheme> schemes_for(const std::string& flag) {
    if (flag == "both") return {Scheme::Oma, Scheme::Noma};
    try {
        return {scheme_from_string(flag)};
    } catch (const std::invalid_argument& e) {
        throw CliError(kExitUsage, e.what());
    }
}

SystemParams load_config(const std::string& path, bool need_noma_rates) {
    try {
        auto params = io::load_params(path);
        require_positive_rates(params, need_noma_rates);
        return params;
    } catch (const io::FormatError& e) {
        throw CliError(kExitUsage, e.what());
    } catch (const InvalidParamsError& e) {
        throw CliError(kExitUsage, e.what());
    }
}

// Reports boundary warnings on `err`; throws for violations unless allowed.
json enforce_constraints(const SystemParams& params, bool allow_infeasible, std::ostream& err) {
    const auto report = check_noma_constraints(params, params.delta);
    json issues = json::array();
    std::string violations;
    for (const auto& issue : report.issues) {
        const bool violation = issue.severity == Severity::Violation;
        issues.push_back({{"severity", violation ? "violation" : "boundary"}, {"message", issue.message}});
        if (violation) {
            violations += (violations.empty() ? "" : "; ") + issue.message;
        } else {
            err << "warning: " << issue.message << '\n';
        }
    }
    if (!violations.empty()) {
        if (!allow_infeasible) throw CliError(kExitInfeasible, "infeasible NOMA rates: " + violations);
        err << "warning: infeasible NOMA rates accepted: " << violations << '\n';
    }
    return issues;
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw CliError(kExitUsage, "cannot write '" + path + "'");
    out << text;
}

double relative_gap(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300});
}

AgeReport theorem_report(const SystemParams& params, Scheme scheme) {
    return scheme == Scheme::Noma ? solve_theorem2(params) : solve_theorem3(params);
}

std::string num(double x) { return io::format_number(x); }

// ---------------------------------------------------------------- analyze

struct AnalyzeArgs {
    std::string config;
    std::string scheme = "both";
    std::string csv;
    bool allow_infeasible = false;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err) {
    const auto schemes = schemes_for(args.scheme);
    const bool with_noma = std::find(schemes.begin(), schemes.end(), Scheme::Noma) != schemes.end();
    const auto params = load_config(args.config, with_noma);

    json doc;
    if (with_noma) doc["constraints"] = enforce_constraints(params, args.allow_infeasible, err);

    std::ostringstream csv;
    csv << "scheme,method,age_user1,age_user2,age_total\n";
    for (const auto scheme : schemes) {
        const auto engine = solve_engine(params, scheme);
        const auto theorem = theorem_report(params, scheme);
        const double agreement = std::max(relative_gap(engine.age_user1, theorem.age_user1),
                                          relative_gap(engine.age_user2, theorem.age_user2));
        doc[to_string(scheme)] = {{"engine", io::report_to_json(engine)},
                                  {"theorem", io::report_to_json(theorem)},
                                  {"agreement_delta", agreement}};
        for (const auto* r : {&engine, &theorem}) {
            csv << to_string(scheme) << ',' << to_string(r->method) << ',' << num(r->age_user1) << ','
                << num(r->age_user2) << ',' << num(r->age_total) << '\n';
        }
    }
    if (!args.csv.empty()) write_file(args.csv, csv.str());
    out << io::dump(io::rounded(doc));
    return kExitOk;
}

// ---------------------------------------------------------------- sweep

struct SweepArgs {
    std::string config;
    std::string param = "alpha";
    double from = 1.0;
    double to = 2.0;
    std::uint32_t steps = 101;
    bool log = false;
    std::optional<double> lambda;
    bool simulate = false;
    std::uint64_t events = 1'000'000;
    std::uint64_t seed = 1;
    std::uint32_t batches = 20;
    unsigned threads = 0;
    std::string csv;
    std::string svg;
    bool allow_infeasible = false;
};

int cmd_sweep(const SweepArgs& args, std::ostream& out, std::ostream& err) {
    SweepSpec spec;
    if (args.param == "alpha") {
        spec.variable = SweepVariable::Alpha;
    } else if (args.param == "lambda") {
        spec.variable = SweepVariable::Lambda;
    } else {
        throw CliError(kExitUsage, "--param must be alpha or lambda");
    }
    spec.from = args.from;
    spec.to = args.to;
    spec.steps = args.steps;
    spec.logarithmic = args.log;
    spec.fixed = load_config(args.config, spec.variable == SweepVariable::Lambda);
    spec.lambda = args.lambda;
    spec.simulate = args.simulate;
    spec.events = args.events;
    spec.seed = args.seed;
    spec.batches = args.batches;
    spec.threads = args.threads;
    validate(spec);
    if (spec.variable == SweepVariable::Lambda) enforce_constraints(spec.fixed, args.allow_infeasible, err);

    const auto rows = run_sweep(spec);
    const auto crossover = observed_crossover(rows);
    const auto csv = rows_to_csv(rows);
    if (args.csv.empty()) {
        out << csv;
    } else {
        write_file(args.csv, csv);
        json summary = {{"rows", rows.size()},
                        {"csv", args.csv},
                        {"observed_crossover", crossover ? json(*crossover) : json(nullptr)}};
        if (spec.variable == SweepVariable::Alpha) {
            const auto alpha = crossover_alpha(spec.fixed.mu1, spec.fixed.mu2, spec.fixed.delta);
            summary["crossover_alpha"] = alpha ? json(*alpha) : json("none in range");
        }
        out << io::dump(io::rounded(summary));
    }
    if (!args.svg.empty()) write_file(args.svg, render_svg(rows, spec, crossover));
    return kExitOk;
}

// ---------------------------------------------------------------- compare

int cmd_compare(const std::string& config, bool allow_infeasible, std::ostream& out,
                std::ostream& err) {
    const auto params = load_config(config, true);
    json doc;
    doc["constraints"] = enforce_constraints(params, allow_infeasible, err);

    const auto oma = solve_engine(params, Scheme::Oma);
    const auto noma = solve_engine(params, Scheme::Noma);
    doc["oma_total"] = oma.age_total;
    doc["noma_total"] = noma.age_total;
    doc["winner"] = to_string(decide_winner(oma.age_total, noma.age_total));
    doc["oma"] = io::report_to_json(oma);
    doc["noma"] = io::report_to_json(noma);

    const double oma_limit = oma_limit_total(params.mu1, params.mu2);
    const double noma_limit = noma_limit_total(params.mu1p, params.mu2p);
    doc["oma_limit_total"] = oma_limit;
    doc["noma_limit_total"] = noma_limit;
    doc["limit_winner"] = to_string(decide_winner(oma_limit, noma_limit));

    if (const auto* ad = std::get_if<AlphaDelta>(&params.derivation)) {
        const auto alpha = crossover_alpha(params.mu1, params.mu2, ad->delta);
        doc["crossover_alpha"] = alpha ? json(*alpha) : json("none in range");
    } else {
        doc["crossover_alpha"] = nullptr;
    }
    out << io::dump(io::rounded(doc));
    return kExitOk;
}

// ---------------------------------------------------------------- simulate

struct SimulateArgs {
    std::string config;
    std::string scheme = "both";
    std::uint64_t seed = 1;
    std::uint64_t events = 1'000'000;
    std::uint32_t batches = 20;
    double warmup = 0.05;
    bool check = false;
    bool allow_infeasible = false;
    std::string trace;
    std::uint64_t trace_rows = 10'000;
};

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err) {
    const auto schemes = schemes_for(args.scheme);
    const bool with_noma = std::find(schemes.begin(), schemes.end(), Scheme::Noma) != schemes.end();
    const auto params = load_config(args.config, with_noma);
    if (with_noma) enforce_constraints(params, args.allow_infeasible, err);

    std::ofstream trace_file;
    json doc;
    for (const auto scheme : schemes) {
        sim::SimConfig config;
        config.scheme = scheme;
        config.seed = args.seed;
        config.max_events = args.events;
        config.batches = args.batches;
        config.warmup_fraction = args.warmup;
        try {
            sim::validate(config);
        } catch (const sim::InvalidSimConfigError& e) {
            throw CliError(kExitUsage, e.what());
        }
        if (!args.trace.empty()) {
            // One trace per scheme: <path> for a single scheme, <path>.<scheme> for both.
            const auto path = schemes.size() == 1 ? args.trace : args.trace + "." + to_string(scheme);
            trace_file = std::ofstream(path, std::ios::binary);
            if (!trace_file) throw CliError(kExitUsage, "cannot write '" + path + "'");
            config.trace = &trace_file;
            config.trace_rows = args.trace_rows;
        }
        const auto result = sim::simulate(params, config);
        json entry = io::sim_result_to_json(result);
        if (args.check) {
            const auto analytic = solve_engine(params, scheme);
            const double ana[2] = {analytic.age_user1, analytic.age_user2};
            const double got[2] = {result.age_user1, result.age_user2};
            json z = json::array();
            for (int k = 0; k < 2; ++k) {
                const double se = result.std_error[static_cast<std::size_t>(k)];
                z.push_back(se > 0.0 ? (got[k] - ana[k]) / se : 0.0);
            }
            entry["analytic"] = io::report_to_json(analytic);
            entry["z_scores"] = std::move(z);
        }
        doc[to_string(scheme)] = std::move(entry);
        trace_file.close();
    }
    out << io::dump(io::rounded(doc));
    return kExitOk;
}

}  // namespace

std::string to_string(Winner winner) {
    switch (winner) {
        case Winner::Oma: return "OMA";
        case Winner::Noma: return "NOMA";
        case Winner::Tie: return "tie";
    }
    return "tie";
}

Winner decide_winner(double oma_total, double noma_total, double tolerance) {
    const double scale = std::max(std::abs(oma_total), std::abs(noma_total));
    if (std::abs(oma_total - noma_total) <= tolerance * scale) return Winner::Tie;
    return oma_total < noma_total ? Winner::Oma : Winner::Noma;
}

void validate(const SweepSpec& spec) {
    auto fail = [](const std::string& what) { throw CliError(kExitUsage, what); };
    if (!std::isfinite(spec.from) || !std::isfinite(spec.to) || !(spec.from < spec.to))
        fail("sweep requires finite --from < --to");
    if (spec.steps < 2) fail("sweep requires --steps >= 2");
    if (spec.logarithmic && !(spec.from > 0.0)) fail("logarithmic sweep requires --from > 0");
    if (spec.variable == SweepVariable::Alpha && (spec.from < 1.0 || spec.to > 2.0))
        fail("alpha sweeps are restricted to [1, 2]");
    if (spec.variable == SweepVariable::Lambda && !(spec.from > 0.0))
        fail("lambda sweeps require positive arrival rates");
    if (spec.variable == SweepVariable::Alpha && !(spec.fixed.delta > 0.0 && spec.fixed.delta < 1.0))
        fail("alpha sweeps require delta in (0, 1)");
    if (spec.lambda && !(*spec.lambda > 0.0)) fail("--lambda must be positive");
    if (spec.simulate) {
        sim::SimConfig probe;
        probe.max_events = spec.events;
        probe.batches = spec.batches;
        try {
            sim::validate(probe);
        } catch (const sim::InvalidSimConfigError& e) {
            fail(e.what());
        }
    }
}

std::vector<double> sweep_grid(const SweepSpec& spec) {
    std::vector<double> grid(spec.steps);
    const double last = static_cast<double>(spec.steps - 1);
    for (std::uint32_t i = 0; i < spec.steps; ++i) {
        const double t = static_cast<double>(i) / last;
        grid[i] = spec.logarithmic
                      ? std::exp(std::log(spec.from) + t * (std::log(spec.to) - std::log(spec.from)))
                      : spec.from + t * (spec.to - spec.from);
    }
    // Pin the endpoints exactly.
    grid.front() = spec.from;
    grid.back() = spec.to;
    return grid;
}

SystemParams params_at(const SweepSpec& spec, double value) {
    const auto& f = spec.fixed;
    if (spec.variable == SweepVariable::Lambda) return f.with_arrival_rate(value);
    const double lambda = spec.lambda.value_or(1e4 * std::max(f.mu1, f.mu2));
    return SystemParams::with_alpha(lambda, lambda, f.mu1, f.mu2, value, f.delta);
}

std::vector<ComparisonRow> run_sweep(const SweepSpec& spec) {
    validate(spec);
    const auto grid = sweep_grid(spec);
    std::vector<ComparisonRow> rows(grid.size());

    auto evaluate = [&](std::size_t i) {
        auto& row = rows[i];
        row.value = grid[i];
        const auto params = params_at(spec, grid[i]);
        row.oma = solve_engine(params, Scheme::Oma);
        row.noma = solve_engine(params, Scheme::Noma);
        row.winner = decide_winner(row.oma.age_total, row.noma.age_total);
        if (spec.simulate) {
            sim::SimConfig config;
            config.seed = sim::point_seed(spec.seed, i);
            config.max_events = spec.events;
            config.batches = spec.batches;
            config.scheme = Scheme::Oma;
            row.sim_oma = sim::simulate(params, config);
            config.scheme = Scheme::Noma;
            row.sim_noma = sim::simulate(params, config);
        }
    };

    unsigned workers = spec.threads != 0 ? spec.threads : std::thread::hardware_concurrency();
    workers = std::clamp<unsigned>(workers, 1U, static_cast<unsigned>(grid.size()));
    if (workers == 1) {
        for (std::size_t i = 0; i < grid.size(); ++i) evaluate(i);
        return rows;
    }
    // Strided partition; each worker writes only its own rows.
    std::vector<std::future<void>> jobs;
    for (unsigned w = 0; w < workers; ++w) {
        jobs.push_back(std::async(std::launch::async, [&, w] {
            for (std::size_t i = w; i < grid.size(); i += workers) evaluate(i);
        }));
    }
    for (auto& job : jobs) job.get();
    return rows;
}

std::optional<double> observed_crossover(const std::vector<ComparisonRow>& rows) {
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const double g0 = rows[i - 1].noma.age_total - rows[i - 1].oma.age_total;
        const double g1 = rows[i].noma.age_total - rows[i].oma.age_total;
        if (rows[i - 1].winner == rows[i].winner || rows[i - 1].winner == Winner::Tie) continue;
        if (rows[i].winner == Winner::Tie) return rows[i].value;
        const double t = g0 / (g0 - g1);
        return rows[i - 1].value + t * (rows[i].value - rows[i - 1].value);
    }
    return std::nullopt;
}

std::string rows_to_csv(const std::vector<ComparisonRow>& rows) {
    const bool simulated = !rows.empty() && rows.front().sim_oma.has_value();
    std::ostringstream os;
    os << "value,oma_total,noma_total,oma_user1,oma_user2,noma_user1,noma_user2,winner";
    if (simulated) {
        os << ",sim_oma_total,sim_noma_total,sim_oma_user1,sim_oma_user2,sim_noma_user1,"
              "sim_noma_user2,sim_oma_ci1,sim_oma_ci2,sim_noma_ci1,sim_noma_ci2";
    }
    os << '\n';
    for (const auto& r : rows) {
        os << num(r.value) << ',' << num(r.oma.age_total) << ',' << num(r.noma.age_total) << ','
           << num(r.oma.age_user1) << ',' << num(r.oma.age_user2) << ',' << num(r.noma.age_user1)
           << ',' << num(r.noma.age_user2) << ',' << to_string(r.winner);
        if (r.sim_oma && r.sim_noma) {
            const auto& so = *r.sim_oma;
            const auto& sn = *r.sim_noma;
            os << ',' << num(so.age_total) << ',' << num(sn.age_total) << ',' << num(so.age_user1)
               << ',' << num(so.age_user2) << ',' << num(sn.age_user1) << ',' << num(sn.age_user2)
               << ',' << num(so.ci_half_width[0]) << ',' << num(so.ci_half_width[1]) << ','
               << num(sn.ci_half_width[0]) << ',' << num(sn.ci_half_width[1]);
        }
        os << '\n';
    }
    return os.str();
}

std::string render_svg(const std::vector<ComparisonRow>& rows, const SweepSpec& spec,
                       std::optional<double> crossover) {
    constexpr double width = 640, height = 400;
    constexpr double left = 70, right = 20, top = 20, bottom = 50;
    const double plot_w = width - left - right;
    const double plot_h = height - top - bottom;

    double y_min = std::numeric_limits<double>::infinity();
    double y_max = -y_min;
    for (const auto& r : rows) {
        y_min = std::min({y_min, r.oma.age_total, r.noma.age_total});
        y_max = std::max({y_max, r.oma.age_total, r.noma.age_total});
    }
    if (!(y_max > y_min)) {
        y_min -= 0.5;
        y_max += 0.5;
    }
    auto x_of = [&](double v) {
        const double t = spec.logarithmic
                             ? (std::log(v) - std::log(spec.from)) / (std::log(spec.to) - std::log(spec.from))
                             : (v - spec.from) / (spec.to - spec.from);
        return left + t * plot_w;
    };
    auto y_of = [&](double a) { return top + (y_max - a) / (y_max - y_min) * plot_h; };
    auto points = [&](bool noma) {
        std::string s;
        for (const auto& r : rows) {
            if (!s.empty()) s += ' ';
            s += num(x_of(r.value)) + ',' + num(y_of(noma ? r.noma.age_total : r.oma.age_total));
        }
        return s;
    };
    const std::string x_label = spec.variable == SweepVariable::Alpha ? "alpha" : "lambda";

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
       << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n"
       << "  <rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
       << "\" fill=\"white\"/>\n"
       << "  <line x1=\"" << num(left) << "\" y1=\"" << num(top + plot_h) << "\" x2=\""
       << num(left + plot_w) << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n"
       << "  <line x1=\"" << num(left) << "\" y1=\"" << num(top) << "\" x2=\"" << num(left)
       << "\" y2=\"" << num(top + plot_h) << "\" stroke=\"black\"/>\n"
       << "  <text x=\"" << num(left + plot_w / 2) << "\" y=\"" << num(height - 12)
       << "\" text-anchor=\"middle\">" << x_label << (spec.logarithmic ? " (log scale)" : "")
       << "</text>\n"
       << "  <text x=\"16\" y=\"" << num(top + plot_h / 2) << "\" text-anchor=\"middle\" transform=\"rotate(-90 16 "
       << num(top + plot_h / 2) << ")\">total average age</text>\n"
       << "  <text x=\"" << num(left - 6) << "\" y=\"" << num(top + 4) << "\" text-anchor=\"end\">"
       << num(y_max) << "</text>\n"
       << "  <text x=\"" << num(left - 6) << "\" y=\"" << num(top + plot_h) << "\" text-anchor=\"end\">"
       << num(y_min) << "</text>\n"
       << "  <text x=\"" << num(left) << "\" y=\"" << num(top + plot_h + 16) << "\" text-anchor=\"middle\">"
       << num(spec.from) << "</text>\n"
       << "  <text x=\"" << num(left + plot_w) << "\" y=\"" << num(top + plot_h + 16)
       << "\" text-anchor=\"middle\">" << num(spec.to) << "</text>\n"
       << "  <polyline class=\"oma\" fill=\"none\" stroke=\"#1f77b4\" stroke-width=\"2\" points=\""
       << points(false) << "\"/>\n"
       << "  <polyline class=\"noma\" fill=\"none\" stroke=\"#d62728\" stroke-width=\"2\" points=\""
       << points(true) << "\"/>\n"
       << "  <text x=\"" << num(left + plot_w - 4) << "\" y=\"" << num(top + 14)
       << "\" text-anchor=\"end\" fill=\"#1f77b4\">OMA</text>\n"
       << "  <text x=\"" << num(left + plot_w - 4) << "\" y=\"" << num(top + 30)
       << "\" text-anchor=\"end\" fill=\"#d62728\">NOMA</text>\n";
    if (crossover) {
        // Marker sits on the OMA curve at the interpolated crossing.
        auto it = std::lower_bound(rows.begin(), rows.end(), *crossover,
                                   [](const ComparisonRow& r, double v) { return r.value < v; });
        double y = rows.back().oma.age_total;
        if (it != rows.end() && it != rows.begin()) {
            const auto& hi = *it;
            const auto& lo = *(it - 1);
            const double t = (*crossover - lo.value) / (hi.value - lo.value);
            y = lo.oma.age_total + t * (hi.oma.age_total - lo.oma.age_total);
        } else if (it == rows.begin()) {
            y = rows.front().oma.age_total;
        }
        os << "  <circle id=\"crossover\" cx=\"" << num(x_of(*crossover)) << "\" cy=\"" << num(y_of(y))
           << "\" r=\"4\" fill=\"black\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Average age of information for two-user NOMA and OMA status-update systems"};
    app.require_subcommand(1);

    AnalyzeArgs analyze;
    auto* a = app.add_subcommand("analyze", "Exact per-user and total average age");
    a->add_option("--config", analyze.config, "Parameter file (JSON)")->required();
    a->add_option("--scheme", analyze.scheme, "noma|oma|both")->check(CLI::IsMember({"noma", "oma", "both"}));
    a->add_option("--csv", analyze.csv, "Also write a CSV table");
    a->add_flag("--allow-infeasible", analyze.allow_infeasible, "Accept rates violating the NOMA constraints");

    SweepArgs sweep;
    auto* s = app.add_subcommand("sweep", "NOMA vs OMA over an alpha or lambda grid");
    s->add_option("--config", sweep.config, "Baseline parameter file (JSON)")->required();
    s->add_option("--param", sweep.param, "alpha|lambda")->check(CLI::IsMember({"alpha", "lambda"}));
    s->add_option("--from", sweep.from, "Grid start");
    s->add_option("--to", sweep.to, "Grid end");
    s->add_option("--steps", sweep.steps, "Grid points (>= 2)");
    s->add_flag("--log", sweep.log, "Logarithmic grid");
    s->add_option("--lambda", sweep.lambda, "Arrival rate for alpha sweeps (default 1e4*max(mu))");
    s->add_flag("--simulate", sweep.simulate, "Add simulated columns");
    s->add_option("--events", sweep.events, "Events per simulated point");
    s->add_option("--seed", sweep.seed, "Base seed; point i uses seed + i");
    s->add_option("--batches", sweep.batches, "Batch-means batches");
    s->add_option("--threads", sweep.threads, "Worker threads (0: all cores)");
    s->add_option("--csv", sweep.csv, "CSV output path (default: stdout)");
    s->add_option("--svg", sweep.svg, "SVG chart output path");
    s->add_flag("--allow-infeasible", sweep.allow_infeasible, "Accept rates violating the NOMA constraints");

    std::string compare_config;
    bool compare_allow = false;
    auto* c = app.add_subcommand("compare", "Totals, winner, limits and crossover alpha");
    c->add_option("--config", compare_config, "Parameter file (JSON)")->required();
    c->add_flag("--allow-infeasible", compare_allow, "Accept rates violating the NOMA constraints");

    SimulateArgs simulate;
    auto* m = app.add_subcommand("simulate", "Discrete-event simulation with batch-means CIs");
    m->add_option("--config", simulate.config, "Parameter file (JSON)")->required();
    m->add_option("--scheme", simulate.scheme, "noma|oma|both")->check(CLI::IsMember({"noma", "oma", "both"}));
    m->add_option("--seed", simulate.seed, "RNG seed");
    m->add_option("--events", simulate.events, "Event budget");
    m->add_option("--batches", simulate.batches, "Batch-means batches");
    m->add_option("--warmup", simulate.warmup, "Discarded leading fraction of events");
    m->add_flag("--check", simulate.check, "Compare against the analytical engine (z-scores)");
    m->add_flag("--allow-infeasible", simulate.allow_infeasible, "Accept rates violating the NOMA constraints");
    m->add_option("--trace", simulate.trace, "Write an event trace CSV");
    m->add_option("--trace-rows", simulate.trace_rows, "Maximum trace rows");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (*a) return cmd_analyze(analyze, out, err);
        if (*s) return cmd_sweep(sweep, out, err);
        if (*c) return cmd_compare(compare_config, compare_allow, out, err);
        if (*m) return cmd_simulate(simulate, out, err);
    } catch (const CliError& e) {
        err << "error: " << e.what() << '\n';
        return e.code();
    } catch (const shs::SingularSystemError& e) {
        err << "numerical failure: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const InvalidParamsError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const sim::InvalidSimConfigError& e) {
        err << "error: " << e.what() << '\n';
        return kExitUsage;
    }
    return kExitUsage;
}

}  // namespace aoi::cli
