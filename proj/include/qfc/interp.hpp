#pragma once

#include <algorithm>
#include <cassert>
#include <deque>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qfc/ast.hpp"
#include "qfc/densmat.hpp"
#include "qfc/errors.hpp"
#include "qfc/gates.hpp"
#include "qfc/typecheck.hpp"

namespace qfc {

/// One control-flow edge: an unnormalized state whose trace is the
/// probability of reaching the edge, the register mapping qubit names to
/// tensor positions (position 0 most significant), and the classical
/// outcome history that selected the edge.
struct EdgeState {
    DensityMatrix rho;
    std::vector<std::string> reg;
    std::vector<std::pair<std::string, int>> history;
};

/// "p=0,q@2=1" — comma-joined outcomes in measurement order.
inline std::string history_key(const std::vector<std::pair<std::string, int>>& history) {
    std::string out;
    for (const auto& [label, bit] : history) {
        if (!out.empty()) out += ',';
        out += label;
        out += '=';
        out += static_cast<char>('0' + bit);
    }
    return out;
}

struct InterpConfig {
    int max_qubits = 10;
    double loop_tol = 1e-9;
    int max_iters = 10000;
    bool keep_branches = false;
    /// Density matrix bound to main's leading allocations (which must be
    /// its first statements).
    std::optional<ComplexMatrix> input_state;
    /// Record sum(edge traces) + residual after every executed statement.
    bool audit_traces = false;
};

struct RunResult {
    /// Entrywise merge of all surviving edges (classical bits ignored).
    EdgeState merged;
    /// The pre-merge edges, kept when InterpConfig::keep_branches is set.
    std::optional<std::vector<EdgeState>> branches;
    /// history key -> probability (the edge trace).
    std::map<std::string, double> outcome_distribution;
    /// Probability mass abandoned by truncated loops.
    double loop_residual = 0.0;
    /// Filled when InterpConfig::audit_traces is set.
    std::vector<double> trace_audit;
};

namespace detail {

/// Edges below this trace are dropped; deterministic branches stay tidy.
inline constexpr double kEdgePruneTol = 1e-15;

class ExactInterpreter {
public:
    ExactInterpreter(const TypedProgram& typed, const InterpConfig& cfg)
        : typed_(typed), cfg_(cfg) {}

    RunResult run() {
        const Proc* main = typed_.program.find_proc("main");
        assert(main != nullptr);
        Frame frame{main, 0, {}};
        Edges edges;
        std::size_t skip = 0;

        if (cfg_.input_state.has_value()) {
            edges.push_back(seed_from_input(*main, frame, skip));
        } else {
            EdgeState start;
            start.rho = DensityMatrix::scalar_one();
            edges.push_back(std::move(start));
        }

        for (std::size_t i = skip; i < main->body.stmts.size(); ++i) {
            edges = exec_stmt(main->body.stmts[i], std::move(edges), frame);
            audit_point(edges);
        }

        return finish(std::move(edges));
    }

private:
    struct Frame {
        const Proc* proc;
        int depth;
        std::map<std::string, std::string> names; // local -> register name
    };
    using Edges = std::vector<EdgeState>;

    std::string qualify(const Frame& frame, const std::string& local) const {
        if (frame.depth == 0) return local;
        return frame.proc->name + "#" + std::to_string(frame.depth) + ":" + local;
    }

    static QubitIndex position_of(const EdgeState& e, const std::string& name) {
        const auto it = std::find(e.reg.begin(), e.reg.end(), name);
        if (it == e.reg.end())
            throw Error("internal: qubit '" + name + "' missing from register");
        return static_cast<QubitIndex>(it - e.reg.begin());
    }

    static double total_trace(const Edges& edges) {
        double t = 0.0;
        for (const auto& e : edges) t += e.rho.trace_real();
        return t;
    }

    void audit_point(const Edges& edges) {
        if (cfg_.audit_traces)
            audit_.push_back(mass_outside_ + residual_ + total_trace(edges));
    }

    EdgeState seed_from_input(const Proc& main, Frame& frame, std::size_t& skip) {
        const ComplexMatrix& input = *cfg_.input_state;
        validate_density(input);
        const int k = input.num_qubits();
        if (k < 1) throw ConfigError("input state must cover at least one qubit");
        if (k > cfg_.max_qubits)
            throw QubitCapExceeded("input state needs " + std::to_string(k) +
                                   " qubits, cap is " + std::to_string(cfg_.max_qubits));
        EdgeState start;
        start.rho = make_density(input);
        for (int i = 0; i < k; ++i) {
            const auto idx = static_cast<std::size_t>(i);
            const NewQbitStmt* alloc =
                idx < main.body.stmts.size() ? std::get_if<NewQbitStmt>(&main.body.stmts[idx].node)
                                             : nullptr;
            if (alloc == nullptr)
                throw ConfigError("input state covers " + std::to_string(k) +
                                  " qubits, so main must begin with that many allocations");
            const std::string qual = qualify(frame, alloc->name);
            frame.names[alloc->name] = qual;
            start.reg.push_back(qual);
        }
        skip = static_cast<std::size_t>(k);
        return start;
    }

    Edges exec_block(const Block& block, Edges edges, Frame& frame) {
        for (const auto& stmt : block.stmts) {
            edges = exec_stmt(stmt, std::move(edges), frame);
            audit_point(edges);
        }
        return edges;
    }

    Edges exec_stmt(const Stmt& stmt, Edges edges, Frame& frame) {
        return std::visit(
            [&](const auto& node) { return exec_node(node, std::move(edges), frame); },
            stmt.node);
    }

    Edges exec_node(const NewQbitStmt& node, Edges edges, Frame& frame) {
        const std::string qual = qualify(frame, node.name);
        frame.names[node.name] = qual;
        for (auto& e : edges) {
            e.rho = extend_with_fresh_qubit(e.rho, cfg_.max_qubits);
            e.reg.push_back(qual);
        }
        return edges;
    }

    Edges exec_node(const UnaryGateStmt& node, Edges edges, Frame& frame) {
        const GateDef& gate = builtin(node.gate);
        const std::string& qual = frame.names.at(node.qubit);
        for (auto& e : edges)
            e.rho = apply_on_targets(gate, {position_of(e, qual)}, e.rho);
        return edges;
    }

    Edges exec_node(const BinaryGateStmt& node, Edges edges, Frame& frame) {
        const GateDef& gate = builtin(node.gate);
        const std::string& q0 = frame.names.at(node.qubit0);
        const std::string& q1 = frame.names.at(node.qubit1);
        for (auto& e : edges)
            e.rho = apply_on_targets(gate, {position_of(e, q0), position_of(e, q1)}, e.rho);
        return edges;
    }

    Edges exec_node(const DiscardStmt& node, Edges edges, Frame& frame) {
        const std::string& qual = frame.names.at(node.name);
        for (auto& e : edges) {
            const QubitIndex pos = position_of(e, qual);
            e.rho = partial_trace(e.rho, pos);
            e.reg.erase(e.reg.begin() + static_cast<std::ptrdiff_t>(pos));
        }
        return edges;
    }

    Edges exec_node(const CallStmt& node, Edges edges, Frame& frame) {
        const Proc* callee = typed_.program.find_proc(node.proc);
        assert(callee != nullptr);
        Frame inner{callee, frame.depth + 1, {}};
        for (std::size_t i = 0; i < node.args.size(); ++i)
            inner.names[callee->params[i]] = frame.names.at(node.args[i]);
        return exec_block(callee->body, std::move(edges), inner);
    }

    Edges exec_node(const MeasureStmt& node, Edges edges, Frame& frame) {
        if (edges.empty()) {
            // Still flow the branches so frame bindings stay consistent.
            Edges none = exec_block(node.branch0, {}, frame);
            none = exec_block(node.branch1, {}, frame);
            return none;
        }
        const std::string& qual = frame.names.at(node.qubit);
        const std::vector<std::string> pre_reg = edges.front().reg;
        Edges zeros, ones;
        for (auto& e : edges) {
            const QubitIndex pos = position_of(e, qual);
            auto [r0, r1] = measure_split(e.rho, pos);
            if (r0.trace_real() > kEdgePruneTol) {
                EdgeState e0{std::move(r0), e.reg, e.history};
                e0.history.emplace_back(node.qubit, 0);
                zeros.push_back(std::move(e0));
            }
            if (r1.trace_real() > kEdgePruneTol) {
                EdgeState e1{std::move(r1), std::move(e.reg), std::move(e.history)};
                e1.history.emplace_back(node.qubit, 1);
                ones.push_back(std::move(e1));
            }
        }

        const double ones_mass = total_trace(ones);
        mass_outside_ += ones_mass;
        zeros = exec_block(node.branch0, std::move(zeros), frame);
        mass_outside_ -= ones_mass;

        const double zeros_mass = total_trace(zeros);
        mass_outside_ += zeros_mass;
        ones = exec_block(node.branch1, std::move(ones), frame);
        mass_outside_ -= zeros_mass;

        Edges out = std::move(zeros);
        for (auto& e : ones) out.push_back(std::move(e));
        canonicalize_registers(out, canonical_order(pre_reg, join_live(out, pre_reg)));
        return out;
    }

    Edges exec_node(const WhileStmt& node, Edges edges, Frame& frame) {
        Edges out;
        if (edges.empty()) {
            exec_block(node.body, {}, frame);
            return out;
        }
        const std::string& qual = frame.names.at(node.qubit);
        const std::vector<std::string> head_reg = edges.front().reg;
        std::deque<std::pair<EdgeState, int>> pending;
        for (auto& e : edges) pending.emplace_back(std::move(e), 0);

        while (!pending.empty()) {
            auto [cur, iter] = std::move(pending.front());
            pending.pop_front();
            const std::string label = node.qubit + "@" + std::to_string(iter);
            const QubitIndex pos = position_of(cur, qual);
            auto [r0, r1] = measure_split(cur.rho, pos);

            if (r0.trace_real() > kEdgePruneTol) {
                EdgeState exit_edge{std::move(r0), cur.reg, cur.history};
                exit_edge.history.emplace_back(label, 0);
                out.push_back(std::move(exit_edge));
            }
            const double t1 = r1.trace_real();
            if (t1 <= kEdgePruneTol) continue;
            if (t1 < cfg_.loop_tol || iter >= cfg_.max_iters) {
                residual_ += t1; // truncated; reported, never renormalized
                continue;
            }
            EdgeState cont{std::move(r1), std::move(cur.reg), std::move(cur.history)};
            cont.history.emplace_back(label, 1);

            double other = total_trace(out);
            for (const auto& p : pending) other += p.first.rho.trace_real();
            mass_outside_ += other;
            Edges body_out;
            {
                Edges in;
                in.push_back(std::move(cont));
                body_out = exec_block(node.body, std::move(in), frame);
            }
            mass_outside_ -= other;

            canonicalize_registers(body_out, head_reg);
            for (auto& be : body_out) pending.emplace_back(std::move(be), iter + 1);
        }
        return out;
    }

    static std::vector<std::string> join_live(const Edges& edges,
                                              const std::vector<std::string>& fallback) {
        return edges.empty() ? fallback : edges.front().reg;
    }

    /// Reorders every edge's register (and state) to `target`, which must
    /// hold the same names. Keeps joins aligned by allocation order.
    static void canonicalize_registers(Edges& edges, const std::vector<std::string>& target) {
        for (auto& e : edges) {
            if (e.reg == target) continue;
            std::vector<QubitIndex> perm(e.reg.size());
            for (std::size_t i = 0; i < e.reg.size(); ++i) {
                const auto it = std::find(target.begin(), target.end(), e.reg[i]);
                if (it == target.end())
                    throw Error("internal: register disagreement at join");
                perm[i] = static_cast<QubitIndex>(it - target.begin());
            }
            e.rho = permute_qubits(e.rho, perm);
            e.reg = target;
        }
    }

    RunResult finish(Edges edges) {
        RunResult result;
        result.loop_residual = residual_;
        result.trace_audit = std::move(audit_);

        for (const auto& e : edges)
            result.outcome_distribution[history_key(e.history)] += e.rho.trace_real();

        if (edges.empty()) {
            const int n = static_cast<int>(typed_.main_outputs.size());
            result.merged.rho =
                DensityMatrix{ComplexMatrix(std::size_t{1} << n), n};
            result.merged.reg = typed_.main_outputs;
        } else {
            std::vector<DensityMatrix> parts;
            parts.reserve(edges.size());
            for (const auto& e : edges) {
                if (e.reg != edges.front().reg)
                    throw Error("internal: final registers disagree");
                parts.push_back(e.rho);
            }
            result.merged.rho = merge(parts);
            result.merged.reg = edges.front().reg;
        }
        if (cfg_.keep_branches) result.branches = std::move(edges);
        return result;
    }

    const TypedProgram& typed_;
    const InterpConfig& cfg_;
    double residual_ = 0.0;
    double mass_outside_ = 0.0;
    std::vector<double> audit_;
};

} // namespace detail

/// Exact density-matrix execution. Starts from the empty register (or the
/// configured input state), splits edges at measurements, sums truncated
/// loop mass into loop_residual, and merges surviving edges at exit.
inline RunResult run_exact(const TypedProgram& p, const InterpConfig& cfg = {}) {
    detail::ExactInterpreter interp(p, cfg);
    return interp.run();
}

} // namespace qfc
