#include "drl/cli.hpp"

#include <charconv>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <spdlog/sinks/ostream_sink.h>
#include <spdlog/spdlog.h>

#include "drl/analysis.hpp"
#include "drl/compiler.hpp"
#include "drl/constraint_lang.hpp"
#include "drl/csv.hpp"
#include "drl/errors.hpp"
#include "drl/refiner.hpp"
#include "drl/serialize.hpp"

namespace drl {

namespace {

// Errors that are the user's fault (bad flags, unreadable files).
struct UsageError : Error {
    using Error::Error;
};

struct Config {
    std::string constraints;
    std::string compiled;
    std::string data;
    std::string real;
    std::string out;
    std::string report;
    std::string order = "given";
    std::optional<std::uint64_t> seed;
    std::string epsilon = "1/1000000";
    double tau = 1e-9;
    std::size_t max_clauses = 10000;
    std::size_t max_resolvents = 500000;
    std::size_t parallelism = 1;
    std::size_t bins = 32;
    bool skip_errors = false;
    bool jacobian = false;
};

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw UsageError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UsageError("cannot write '" + path + "'");
    out << content;
    if (!out) throw UsageError("error writing '" + path + "'");
}

Rational parse_rational_arg(const std::string& text, const char* what) {
    Rational r;
    try {
        r = text.find('/') != std::string::npos ? parse_fraction_string(text) : parse_decimal(text);
    } catch (const std::exception&) {
        throw UsageError(std::string(what) + ": not a rational number: '" + text + "'");
    }
    if (sgn(r) <= 0) throw UsageError(std::string(what) + " must be positive");
    return r;
}

CsvTable read_table(const std::string& path) {
    try {
        return read_csv(read_file(path));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.detail(), e.line(), e.column());
    }
}

// Everything downstream of the constraint file.
struct Problem {
    VariableBinding binding;
    ConstraintSet pi;
    Rational epsilon;
};

Problem load_problem(const Config& cfg, const CsvTable* data) {
    Problem p;
    p.epsilon = parse_rational_arg(cfg.epsilon, "--epsilon");
    if (data) p.binding = VariableBinding(data->header_names(), VariableBinding::Source::csv_header);
    const std::string text = read_file(cfg.constraints);
    try {
        auto formulas = parse(text, p.binding);
        p.pi = normalize(formulas, p.binding.size(), NormalizationConfig{p.epsilon, cfg.max_clauses});
    } catch (const ParseError& e) {
        throw ParseError(cfg.constraints + ": " + e.detail(), e.line(), e.column());
    } catch (const BudgetExceeded& e) {
        throw BudgetExceeded(cfg.constraints + ": " + e.what());
    }
    spdlog::debug("{} constraints over {} variables", p.pi.size(), p.binding.size());
    return p;
}

Matrix bound_matrix(const CsvTable& table, const VariableBinding& binding, const std::string& path) {
    try {
        return to_matrix(table, bind_columns(table, binding));
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.detail(), e.line(), e.column());
    } catch (const DimensionMismatch& e) {
        throw DimensionMismatch(path + ": " + e.what());
    }
}

std::vector<VarIndex> resolve_ordering(const Config& cfg, const VariableBinding& binding, const CsvTable* data) {
    const std::string& spec = cfg.order;
    const std::size_t d = binding.size();
    if (spec == "given") return ordering_given(d).permutation;
    if (spec == "random" || spec.starts_with("random:")) {
        std::uint64_t seed = 0;
        if (spec == "random") {
            if (!cfg.seed) throw UsageError("--order random needs a seed: random:S or --seed S");
            seed = *cfg.seed;
        } else {
            const std::string s = spec.substr(7);
            auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), seed);
            if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
                throw UsageError("--order random:S needs a non-negative integer seed");
            }
        }
        return ordering_random(d, seed).permutation;
    }
    if (spec == "corr" || spec == "kde") {
        if (!data || cfg.real.empty()) throw UsageError("--order " + spec + " needs --data (synthetic) and --real");
        const Matrix syn = bound_matrix(*data, binding, cfg.data);
        const CsvTable real_table = read_table(cfg.real);
        const Matrix real = bound_matrix(real_table, binding, cfg.real);
        return spec == "corr" ? ordering_corr(real, syn).permutation : ordering_kde(real, syn, cfg.bins).permutation;
    }
    if (spec.starts_with("file:")) return ordering_from_text(read_file(spec.substr(5)), binding);
    throw UsageError("--order must be given, random:S, corr, kde or file:PATH");
}

CompiledLayer compile_problem(const Config& cfg, const Problem& p, const CsvTable* data) {
    const auto ordering = resolve_ordering(cfg, p.binding, data);
    const auto t0 = std::chrono::steady_clock::now();
    CompiledLayer layer = compile(p.pi, ordering, CompileOptions{cfg.max_resolvents});
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("compiled {} constraints over {} variables in {:.3f} ms: {}", p.pi.size(), p.binding.size(), ms,
                 layer.satisfiable() ? "sat" : "unsat");
    return layer;
}

void print_steps(std::ostream& out, const CompiledLayer& layer, const VariableBinding& binding) {
    if (layer.stats().empty()) return;
    out << std::left << std::setw(16) << "variable" << std::right << std::setw(7) << "plus" << std::setw(7)
        << "minus" << std::setw(7) << "mixed" << std::setw(7) << "free" << std::setw(10) << "plusplus"
        << std::setw(8) << "result" << std::setw(12) << "resolvents" << "\n";
    for (std::size_t p = layer.dimension(); p-- > 0;) {
        const StepStats& s = layer.stats()[p];
        out << std::left << std::setw(16) << binding.name(layer.ordering()[p]) << std::right << std::setw(7)
            << s.plus << std::setw(7) << s.minus << std::setw(7) << s.mixed << std::setw(7) << s.free
            << std::setw(10) << s.plusplus << std::setw(8) << s.result << std::setw(12) << s.resolvents << "\n";
    }
}

void print_verdict(std::ostream& out, const CompiledLayer& layer, const VariableBinding& binding) {
    if (layer.satisfiable()) {
        out << "sat\n";
        return;
    }
    out << "unsat\n";
    std::vector<std::string> names;
    for (VarIndex v : layer.ordering()) names.push_back(binding.name(v));
    VariableBinding position_names(names, VariableBinding::Source::declared);
    out << "witness: " << to_dsl(*layer.unsat_witness(), position_names) << "\n";
}

int cmd_compile(const Config& cfg, std::ostream& out) {
    std::optional<CsvTable> data;
    if (!cfg.data.empty()) data = read_table(cfg.data);
    const Problem p = load_problem(cfg, data ? &*data : nullptr);
    const CompiledLayer layer = compile_problem(cfg, p, data ? &*data : nullptr);
    if (!cfg.out.empty()) write_file(cfg.out, dump_layer(layer, p.binding, p.epsilon));
    print_steps(out, layer, p.binding);
    print_verdict(out, layer, p.binding);
    return layer.satisfiable() ? exit_ok : exit_unsat;
}

int cmd_sat(const Config& cfg, std::ostream& out) {
    const Problem p = load_problem(cfg, nullptr);
    const CompiledLayer layer = compile_problem(cfg, p, nullptr);
    print_verdict(out, layer, p.binding);
    return layer.satisfiable() ? exit_ok : exit_unsat;
}

void print_metrics(std::ostream& out, const MetricsReport& m, const ConstraintSet& pi,
                   const VariableBinding& binding) {
    out << "rows        " << m.n_rows << "\n"
        << "constraints " << m.n_constraints << "\n"
        << std::fixed << std::setprecision(4) << "CVR         " << m.cvr << "\n"
        << "sCVC        " << m.scvc << "\n"
        << "CVC         " << m.cvc << "\n";
    out.unsetf(std::ios::floatfield);
    for (std::size_t c = 0; c < pi.size(); ++c) {
        if (m.per_constraint_violation_counts[c] == 0) continue;
        out << "  violated " << m.per_constraint_violation_counts[c] << "x: " << to_dsl(pi[c], binding) << "\n";
    }
}

int cmd_check(const Config& cfg, std::ostream& out) {
    const CsvTable data = read_table(cfg.data);
    const Problem p = load_problem(cfg, &data);
    const Matrix m = bound_matrix(data, p.binding, cfg.data);
    const MetricsReport report = metrics(p.pi, m, cfg.tau);
    print_metrics(out, report, p.pi, p.binding);
    if (!cfg.report.empty()) write_file(cfg.report, metrics_to_json(report).dump(2) + "\n");
    return exit_ok;
}

int cmd_refine(const Config& cfg, std::ostream& out) {
    if (cfg.jacobian && cfg.report.empty()) throw UsageError("--jacobian needs --report FILE");
    if (cfg.constraints.empty() == cfg.compiled.empty()) {
        throw UsageError("refine needs exactly one of --constraints and --compiled");
    }
    CsvTable data = read_table(cfg.data);

    std::optional<Problem> problem;
    std::optional<LayerArtifact> artifact;
    if (!cfg.constraints.empty()) {
        problem = load_problem(cfg, &data);
        CompiledLayer layer = compile_problem(cfg, *problem, &data);
        artifact = LayerArtifact{std::move(layer), problem->binding, problem->epsilon};
    } else {
        artifact = load_layer(read_file(cfg.compiled));
    }
    const CompiledLayer& layer = artifact->layer;
    const VariableBinding& binding = artifact->binding;
    if (!layer.satisfiable()) {
        print_verdict(out, layer, binding);
        return exit_unsat;
    }

    const auto columns = [&] {
        try {
            return bind_columns(data, binding);
        } catch (const DimensionMismatch& e) {
            throw DimensionMismatch(cfg.data + ": " + e.what());
        }
    }();
    Matrix original;
    try {
        original = to_matrix(data, columns);
    } catch (const ParseError& e) {
        throw ParseError(cfg.data + ": " + e.detail(), e.line(), e.column());
    }

    const Refiner refiner(layer, RefineOptions{.tau = cfg.tau});
    const auto t0 = std::chrono::steady_clock::now();
    const BatchResult batch =
        refine_dataset(refiner, original, BatchOptions{cfg.parallelism, cfg.skip_errors, cfg.jacobian});
    const auto ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    spdlog::info("refined {} rows in {:.3f} ms", original.rows, ms);
    for (const auto& f : batch.failures) spdlog::warn("row {} left unchanged: {}", f.row, f.message);

    // Self-check against the user's constraints (the chain's top level when
    // only an artifact is available), skipping rows that failed.
    {
        ConstraintSet top(layer.dimension());
        if (problem) {
            top = problem->pi;
        } else {
            std::vector<VarIndex> to_var(layer.ordering().begin(), layer.ordering().end());
            top = layer.level(layer.dimension()).remapped(to_var);
        }
        std::vector<bool> failed(original.rows, false);
        for (const auto& f : batch.failures) failed[f.row] = true;
        Matrix kept(original.rows - batch.failures.size(), original.cols);
        for (std::size_t r = 0, k = 0; r < original.rows; ++r) {
            if (failed[r]) continue;
            std::copy(batch.refined.row(r).begin(), batch.refined.row(r).end(), kept.row(k++).begin());
        }
        const MetricsReport after = metrics(top, kept, cfg.tau);
        if (after.violating_rows != 0) {
            throw NumericFailure("self-check failed: " + std::to_string(after.violating_rows) +
                                     " refined rows still violate the constraints",
                                 0);
        }
    }

    apply_matrix(data, columns, original, batch.refined);
    const std::string csv = write_csv(data);
    if (cfg.out.empty()) {
        out << csv;
    } else {
        write_file(cfg.out, csv);
        out << "refined " << original.rows << " rows: " << batch.changed_rows << " rows and " << batch.changed_values
            << " values changed";
        if (!batch.failures.empty()) out << ", " << batch.failures.size() << " rows skipped";
        out << "\n";
    }

    if (!cfg.report.empty()) {
        Json doc;
        doc["rows"] = original.rows;
        doc["changed_rows"] = batch.changed_rows;
        doc["changed_values"] = batch.changed_values;
        Json failures = Json::array();
        for (const auto& f : batch.failures) failures.push_back(Json{{"row", f.row}, {"message", f.message}});
        doc["failures"] = std::move(failures);
        doc["provenance"] = provenance_to_json(batch.provenance, binding, layer);
        if (cfg.jacobian) {
            Json jacs = Json::array();
            const std::size_t d = layer.dimension();
            for (std::size_t r = 0; r < batch.jacobians.size(); ++r) {
                if (batch.jacobians[r].empty()) continue;
                Json rows = Json::array();
                for (std::size_t a = 0; a < d; ++a) {
                    rows.push_back(std::vector<double>(batch.jacobians[r].begin() + a * d,
                                                       batch.jacobians[r].begin() + (a + 1) * d));
                }
                jacs.push_back(Json{{"row", r}, {"matrix", std::move(rows)}});
            }
            doc["variables"] = binding.names();
            doc["jacobians"] = std::move(jacs);
        }
        write_file(cfg.report, doc.dump(2) + "\n");
    }
    return exit_ok;
}

int cmd_order(const Config& cfg, std::ostream& out) {
    if (cfg.data.empty()) throw UsageError("order needs --data");
    const CsvTable data = read_table(cfg.data);
    VariableBinding binding(data.header_names(), VariableBinding::Source::csv_header);
    if (!cfg.constraints.empty()) binding = load_problem(cfg, &data).binding;
    const auto ordering = resolve_ordering(cfg, binding, &data);
    const std::string text = ordering_to_text(ordering, binding);
    if (cfg.out.empty()) out << text;
    else write_file(cfg.out, text);
    return exit_ok;
}

void setup_logging(std::ostream& err) {
    auto sink = std::make_shared<spdlog::sinks::ostream_sink_mt>(err);
    auto logger = std::make_shared<spdlog::logger>("drl", sink);
    logger->set_pattern("[%l] %v");
    spdlog::level::level_enum level = spdlog::level::warn;
    if (const char* env = std::getenv("DRL_LOG")) {
        const auto parsed = spdlog::level::from_str(env);
        // from_str maps unknown names to off; only accept it when asked.
        if (parsed != spdlog::level::off || std::string_view(env) == "off") level = parsed;
    }
    logger->set_level(level);
    spdlog::set_default_logger(logger);
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    setup_logging(err);
    Config cfg;
    CLI::App app{"Compile linear background-knowledge constraints and repair samples to satisfy them", "drl"};
    app.require_subcommand(1);

    auto add_constraints = [&](CLI::App* sub, bool required) {
        auto* opt = sub->add_option("--constraints", cfg.constraints, "constraint file");
        if (required) opt->required();
        sub->add_option("--epsilon", cfg.epsilon, "slack for strict comparisons (decimal or num/den)");
        sub->add_option("--max-clauses", cfg.max_clauses, "clause cap per formula during normalization")
            ->check(CLI::PositiveNumber);
    };
    auto add_order = [&](CLI::App* sub) {
        sub->add_option("--order", cfg.order, "given | random:S | corr | kde | file:PATH");
        sub->add_option("--seed", cfg.seed, "seed for --order random");
        sub->add_option("--real", cfg.real, "real data CSV for corr and kde orderings");
        sub->add_option("--bins", cfg.bins, "histogram bins for the kde ordering")->check(CLI::Range(2, 1 << 20));
        sub->add_option("--max-resolvents", cfg.max_resolvents, "resolvent budget per compile")
            ->check(CLI::PositiveNumber);
    };

    auto* compile_cmd = app.add_subcommand("compile", "compile constraints into an elimination chain");
    add_constraints(compile_cmd, true);
    add_order(compile_cmd);
    compile_cmd->add_option("--data", cfg.data, "CSV whose header names the variables");
    compile_cmd->add_option("--out", cfg.out, "compiled artifact (JSON)");

    auto* sat_cmd = app.add_subcommand("sat", "decide satisfiability");
    add_constraints(sat_cmd, true);
    add_order(sat_cmd);

    auto* check_cmd = app.add_subcommand("check", "violation metrics of a dataset");
    add_constraints(check_cmd, true);
    check_cmd->add_option("--data", cfg.data, "CSV to check")->required();
    check_cmd->add_option("--report", cfg.report, "metrics report (JSON)");
    check_cmd->add_option("--tau", cfg.tau, "satisfaction tolerance")->check(CLI::NonNegativeNumber);

    auto* refine_cmd = app.add_subcommand("refine", "repair every row of a dataset");
    add_constraints(refine_cmd, false);
    add_order(refine_cmd);
    refine_cmd->add_option("--compiled", cfg.compiled, "precompiled artifact instead of --constraints");
    refine_cmd->add_option("--data", cfg.data, "CSV to refine")->required();
    refine_cmd->add_option("--out", cfg.out, "refined CSV (stdout when omitted)");
    refine_cmd->add_option("--report", cfg.report, "provenance report (JSON)");
    refine_cmd->add_option("--tau", cfg.tau, "runtime tolerance")->check(CLI::NonNegativeNumber);
    refine_cmd->add_option("--parallelism", cfg.parallelism, "worker threads")->check(CLI::PositiveNumber);
    refine_cmd->add_flag("--skip-errors", cfg.skip_errors, "leave failing rows unchanged instead of aborting");
    refine_cmd->add_flag("--jacobian", cfg.jacobian, "include per-row Jacobians in the report");

    auto* order_cmd = app.add_subcommand("order", "write a variable ordering file");
    add_constraints(order_cmd, false);
    add_order(order_cmd);
    order_cmd->add_option("--data", cfg.data, "CSV (synthetic data for corr and kde)");
    order_cmd->add_option("--out", cfg.out, "ordering file (stdout when omitted)");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (compile_cmd->parsed()) return cmd_compile(cfg, out);
        if (sat_cmd->parsed()) return cmd_sat(cfg, out);
        if (check_cmd->parsed()) return cmd_check(cfg, out);
        if (refine_cmd->parsed()) return cmd_refine(cfg, out);
        if (order_cmd->parsed()) return cmd_order(cfg, out);
    } catch (const UnsatError& e) {
        err << "error: " << e.what() << "\n";
        return exit_unsat;
    } catch (const NumericFailure& e) {
        err << "error: " << e.what() << "\n";
        return exit_numeric;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return exit_usage;
    }
    return exit_usage;
}

}  // namespace drl
