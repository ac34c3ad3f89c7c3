#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qfc/errors.hpp"
#include "qfc/interp.hpp"
#include "qfc/matrix_json.hpp"
#include "qfc/parser.hpp"
#include "qfc/qram.hpp"
#include "qfc/synth.hpp"
#include "qfc/typecheck.hpp"
#include "qfc/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitLanguage = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNotFound = 3;

std::optional<std::string> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void print_parse_error(std::ostream& out, const qfc::ParseError& e) {
    out << e.loc.line << ':' << e.loc.column << ": error[ParseError]: " << e.message;
    if (!e.expected.empty()) {
        out << " (expected: ";
        for (std::size_t i = 0; i < e.expected.size(); ++i) {
            if (i) out << ", ";
            out << e.expected[i];
        }
        out << ')';
    }
    out << '\n';
}

void print_type_errors(std::ostream& out, const std::vector<qfc::TypeError>& errors) {
    for (const auto& e : errors)
        out << e.loc.line << ':' << e.loc.column << ": error[" << qfc::to_string(e.kind)
            << "]: " << e.message << '\n';
}

/// Parses and typechecks; diagnostics go to `diag`. Returns nullopt on any
/// language error.
std::optional<qfc::TypedProgram> load_program(const std::string& path, std::ostream& diag,
                                              bool& io_error) {
    io_error = false;
    const auto source = read_file(path);
    if (!source) {
        std::cerr << "error: cannot read '" << path << "'\n";
        io_error = true;
        return std::nullopt;
    }
    auto parsed = qfc::parse(*source);
    if (!parsed) {
        print_parse_error(diag, parsed.error());
        return std::nullopt;
    }
    auto typed = qfc::typecheck(std::move(parsed.value()));
    if (!typed) {
        print_type_errors(diag, typed.error());
        return std::nullopt;
    }
    return std::move(typed.value());
}

int cmd_check(const std::string& path) {
    bool io_error = false;
    const auto typed = load_program(path, std::cout, io_error);
    if (io_error) return kExitConfig;
    if (!typed) return kExitLanguage;
    std::cout << "OK\n";
    return kExitOk;
}

struct RunOptions {
    std::string file;
    std::string backend = "exact";
    std::uint64_t shots = 1024;
    std::uint64_t seed = 0;
    int max_qubits = 10;
    double loop_tol = 1e-9;
    std::string input_state;
    std::string dump = "json";
    bool keep_branches = false;
};

void dump_exact_text(const qfc::RunResult& result) {
    std::printf("backend: exact\n");
    std::printf("%-32s %s\n", "outcome", "probability");
    for (const auto& [key, p] : result.outcome_distribution)
        std::printf("%-32s %.17g\n", key.empty() ? "(none)" : key.c_str(), p);
    std::printf("loop residual: %.17g\n", result.loop_residual);
    std::string qubits;
    for (const auto& q : result.merged.reg) {
        if (!qubits.empty()) qubits += ", ";
        qubits += q;
    }
    std::printf("qubits: %s\n", qubits.c_str());
}

void dump_sample_text(const qfc::ShotReport& report) {
    std::printf("backend: sample (shots=%llu, seed=%llu)\n",
                static_cast<unsigned long long>(report.shots),
                static_cast<unsigned long long>(report.seed));
    std::printf("%-32s %s\n", "outcome", "count");
    for (const auto& [key, n] : report.counts)
        std::printf("%-32s %llu\n", key.empty() ? "(none)" : key.c_str(),
                    static_cast<unsigned long long>(n));
    if (report.loop_overruns)
        std::printf("loop overruns: %llu\n",
                    static_cast<unsigned long long>(report.loop_overruns));
}

int cmd_run(const RunOptions& opt) {
    bool io_error = false;
    const auto typed = load_program(opt.file, std::cerr, io_error);
    if (io_error) return kExitConfig;
    if (!typed) return kExitLanguage;

    qfc::InterpConfig cfg;
    cfg.max_qubits = opt.max_qubits;
    cfg.loop_tol = opt.loop_tol;
    cfg.keep_branches = opt.keep_branches;
    try {
        if (!opt.input_state.empty()) cfg.input_state = qfc::load_matrix_file(opt.input_state);

        if (opt.backend == "sample") {
            const qfc::ShotReport report = qfc::run_shots(*typed, opt.shots, opt.seed, cfg);
            if (opt.dump == "text") {
                dump_sample_text(report);
            } else {
                nlohmann::json j{{"schema_version", qfc::kSchemaVersion},
                                 {"backend", "sample"},
                                 {"shots", report.shots},
                                 {"seed", report.seed},
                                 {"loop_overruns", report.loop_overruns},
                                 {"counts", nlohmann::json::object()}};
                for (const auto& [key, n] : report.counts) j["counts"][key] = n;
                std::cout << j.dump(2) << '\n';
            }
            return kExitOk;
        }

        const qfc::RunResult result = qfc::run_exact(*typed, cfg);
        if (opt.dump == "text") {
            dump_exact_text(result);
        } else {
            nlohmann::json j{{"schema_version", qfc::kSchemaVersion},
                             {"backend", "exact"},
                             {"outcomes", nlohmann::json::object()},
                             {"loop_residual", result.loop_residual},
                             {"merged_rho", qfc::matrix_to_json(result.merged.rho.mat)},
                             {"qubits", result.merged.reg}};
            for (const auto& [key, p] : result.outcome_distribution) j["outcomes"][key] = p;
            if (result.branches.has_value()) {
                nlohmann::json branches = nlohmann::json::array();
                for (const auto& e : *result.branches)
                    branches.push_back({{"history", qfc::history_key(e.history)},
                                        {"rho", qfc::matrix_to_json(e.rho.mat)}});
                j["branches"] = std::move(branches);
            }
            std::cout << j.dump(2) << '\n';
        }
        return kExitOk;
    } catch (const qfc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

struct SynthOptions {
    std::string target_file;
    double eps = 1e-10;
    int max_depth = -1; // default chosen from lines
    int lines = 0;      // 0: infer from target dim
};

int cmd_synth(const SynthOptions& opt) {
    try {
        const qfc::ComplexMatrix target = qfc::load_matrix_file(opt.target_file);
        const int lines = opt.lines > 0 ? opt.lines : target.num_qubits();
        const int max_depth = opt.max_depth >= 0 ? opt.max_depth : (lines >= 2 ? 5 : 8);

        const qfc::SynthResult found = qfc::synthesize(target, lines, opt.eps, max_depth);
        if (!found.sequence.has_value()) {
            nlohmann::json j{{"schema_version", qfc::kSchemaVersion},
                             {"result", "not_found"},
                             {"best_distance", found.best.distance}};
            std::cout << j.dump(2) << '\n';
            return kExitNotFound;
        }

        // Re-multiply the sequence and report the independently verified
        // distance, not the search's bookkeeping.
        const qfc::ComplexMatrix product = qfc::sequence_product(*found.sequence);
        const qfc::PhaseDistance verified = qfc::distance_up_to_phase(target, product);

        nlohmann::json steps = nlohmann::json::array();
        for (const auto& step : found.sequence->steps)
            steps.push_back({{"gate", step.gate}, {"targets", step.targets}});
        nlohmann::json j{{"schema_version", qfc::kSchemaVersion},
                         {"lines", found.sequence->num_lines},
                         {"steps", std::move(steps)},
                         {"distance", verified.distance},
                         {"phase", {verified.phase.real(), verified.phase.imag()}}};
        std::cout << j.dump(2) << '\n';
        return kExitOk;
    } catch (const qfc::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitConfig;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qfc - quantum flow-chart toolkit"};
    app.set_version_flag("--version", qfc::kVersion);
    app.require_subcommand(1);

    std::string check_file;
    CLI::App* check = app.add_subcommand("check", "parse and typecheck a program");
    check->add_option("file", check_file, "program file (.qfc)")->required();

    RunOptions run_opt;
    CLI::App* run = app.add_subcommand("run", "execute a program");
    run->add_option("file", run_opt.file, "program file (.qfc)")->required();
    run->add_option("--backend", run_opt.backend, "exact|sample")
        ->check(CLI::IsMember({"exact", "sample"}));
    run->add_option("--shots", run_opt.shots, "samples for the sample backend")
        ->check(CLI::PositiveNumber);
    run->add_option("--seed", run_opt.seed, "64-bit RNG seed");
    run->add_option("--max-qubits", run_opt.max_qubits, "register capacity")
        ->envname("QFC_MAX_QUBITS")
        ->check(CLI::PositiveNumber);
    run->add_option("--loop-tol", run_opt.loop_tol, "loop truncation tolerance");
    run->add_option("--input-state", run_opt.input_state,
                    "matrix file preloading main's first allocations");
    run->add_option("--dump", run_opt.dump, "json|text")
        ->check(CLI::IsMember({"json", "text"}));
    run->add_flag("--keep-branches", run_opt.keep_branches,
                  "include pre-merge branch states in the report");

    SynthOptions synth_opt;
    CLI::App* synth = app.add_subcommand("synth", "synthesize a gate sequence for a unitary");
    synth->add_option("--target", synth_opt.target_file, "target unitary (matrix JSON)")
        ->required();
    synth->add_option("--eps", synth_opt.eps, "acceptance distance (default 1e-10)");
    synth->add_option("--max-depth", synth_opt.max_depth,
                      "search depth cap (default 8 on one line, 5 on two)");
    synth->add_option("--lines", synth_opt.lines, "register width (default from target dim)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForVersion& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (app.got_subcommand(check)) return cmd_check(check_file);
    if (app.got_subcommand(run)) return cmd_run(run_opt);
    if (app.got_subcommand(synth)) return cmd_synth(synth_opt);
    return kExitConfig;
}
