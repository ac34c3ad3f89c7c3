#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "qfc/ast.hpp"
#include "qfc/expected.hpp"
#include "qfc/gates.hpp"

namespace qfc {

enum class TypeErrorKind {
    UnknownVariable,
    DuplicateOperand,
    BranchContextMismatch,
    UseAfterDiscard,
    RecursionDetected,
    ArityMismatch,
    ShadowedQubit,
    UnknownProcedure,
    UnknownGate,
    ParameterDiscarded,
    ProcedureContextMismatch,
    MissingMain,
    DuplicateProcedure,
    DuplicateParameter,
};

inline const char* to_string(TypeErrorKind k) {
    switch (k) {
        case TypeErrorKind::UnknownVariable: return "UnknownVariable";
        case TypeErrorKind::DuplicateOperand: return "DuplicateOperand";
        case TypeErrorKind::BranchContextMismatch: return "BranchContextMismatch";
        case TypeErrorKind::UseAfterDiscard: return "UseAfterDiscard";
        case TypeErrorKind::RecursionDetected: return "RecursionDetected";
        case TypeErrorKind::ArityMismatch: return "ArityMismatch";
        case TypeErrorKind::ShadowedQubit: return "ShadowedQubit";
        case TypeErrorKind::UnknownProcedure: return "UnknownProcedure";
        case TypeErrorKind::UnknownGate: return "UnknownGate";
        case TypeErrorKind::ParameterDiscarded: return "ParameterDiscarded";
        case TypeErrorKind::ProcedureContextMismatch: return "ProcedureContextMismatch";
        case TypeErrorKind::MissingMain: return "MissingMain";
        case TypeErrorKind::DuplicateProcedure: return "DuplicateProcedure";
        case TypeErrorKind::DuplicateParameter: return "DuplicateParameter";
    }
    return "?";
}

struct TypeError {
    TypeErrorKind kind;
    SourceLoc loc;
    std::string message;
};

/// A program that passed the linear checker. `main_outputs` is main's final
/// live set in register (allocation) order.
struct TypedProgram {
    Program program;
    std::vector<std::string> main_outputs;
};

/// Canonical register order after a join: names from `pre` that are still
/// live keep their relative order, branch-allocated survivors follow in
/// lexicographic order. The interpreter applies the same rule, so checker
/// contexts and runtime registers stay aligned.
inline std::vector<std::string> canonical_order(const std::vector<std::string>& pre,
                                                const std::vector<std::string>& live) {
    auto contains = [](const std::vector<std::string>& v, const std::string& s) {
        return std::find(v.begin(), v.end(), s) != v.end();
    };
    std::vector<std::string> out;
    for (const auto& name : pre)
        if (contains(live, name)) out.push_back(name);
    std::vector<std::string> fresh;
    for (const auto& name : live)
        if (!contains(pre, name)) fresh.push_back(name);
    std::sort(fresh.begin(), fresh.end());
    out.insert(out.end(), fresh.begin(), fresh.end());
    return out;
}

namespace detail {

struct Ctx {
    std::vector<std::string> live; // allocation order
    std::set<std::string> discarded;

    bool is_live(const std::string& name) const {
        return std::find(live.begin(), live.end(), name) != live.end();
    }
    void add(const std::string& name) {
        live.push_back(name);
        discarded.erase(name);
    }
    void remove(const std::string& name) {
        live.erase(std::find(live.begin(), live.end(), name));
        discarded.insert(name);
    }
    std::set<std::string> live_set() const { return {live.begin(), live.end()}; }
};

class Checker {
public:
    explicit Checker(const Program& program) : program_(program) {}

    std::vector<TypeError> run(std::vector<std::string>& main_outputs) {
        check_structure();
        check_recursion();
        for (const auto& proc : program_.procs) {
            current_ = &proc;
            Ctx ctx;
            for (const auto& p : proc.params) ctx.live.push_back(p);
            try {
                flow_block(proc.body, ctx);
                if (proc.name == "main") {
                    main_outputs = ctx.live;
                } else if (ctx.live_set() != std::set<std::string>(proc.params.begin(),
                                                                   proc.params.end())) {
                    error(TypeErrorKind::ProcedureContextMismatch, proc.loc,
                          "procedure '" + proc.name +
                              "' must end with exactly its parameters live");
                }
            } catch (TypeError& e) {
                errors_.push_back(std::move(e));
            }
        }
        return errors_;
    }

private:
    void error(TypeErrorKind kind, SourceLoc loc, std::string message) {
        errors_.push_back({kind, loc, std::move(message)});
    }

    [[noreturn]] void flow_error(TypeErrorKind kind, SourceLoc loc, std::string message) {
        throw TypeError{kind, loc, std::move(message)};
    }

    void check_structure() {
        std::set<std::string> seen;
        for (const auto& proc : program_.procs) {
            if (!seen.insert(proc.name).second)
                error(TypeErrorKind::DuplicateProcedure, proc.loc,
                      "procedure '" + proc.name + "' defined more than once");
            std::set<std::string> params;
            for (const auto& p : proc.params)
                if (!params.insert(p).second)
                    error(TypeErrorKind::DuplicateParameter, proc.loc,
                          "parameter '" + p + "' repeated in procedure '" + proc.name + "'");
        }
        const Proc* main = program_.find_proc("main");
        if (main == nullptr) {
            error(TypeErrorKind::MissingMain, {1, 1}, "program has no procedure 'main'");
        } else if (!main->params.empty()) {
            error(TypeErrorKind::ArityMismatch, main->loc,
                  "'main' must not take parameters");
        }
    }

    void collect_calls(const Block& block, std::vector<const CallStmt*>& out,
                       std::vector<SourceLoc>& locs) const {
        for (const auto& stmt : block.stmts) {
            if (const auto* call = std::get_if<CallStmt>(&stmt.node)) {
                out.push_back(call);
                locs.push_back(stmt.loc);
            } else if (const auto* m = std::get_if<MeasureStmt>(&stmt.node)) {
                collect_calls(m->branch0, out, locs);
                collect_calls(m->branch1, out, locs);
            } else if (const auto* w = std::get_if<WhileStmt>(&stmt.node)) {
                collect_calls(w->body, out, locs);
            }
        }
    }

    // DFS over the call graph; a call back into the active stack is a cycle.
    void check_recursion() {
        std::map<std::string, int> color; // 0 unvisited, 1 on stack, 2 done
        for (const auto& proc : program_.procs)
            if (color[proc.name] == 0) visit(proc, color);
    }

    void visit(const Proc& proc, std::map<std::string, int>& color) {
        color[proc.name] = 1;
        std::vector<const CallStmt*> calls;
        std::vector<SourceLoc> locs;
        collect_calls(proc.body, calls, locs);
        for (std::size_t i = 0; i < calls.size(); ++i) {
            const Proc* callee = program_.find_proc(calls[i]->proc);
            if (callee == nullptr) continue; // reported during flow checking
            if (color[callee->name] == 1) {
                error(TypeErrorKind::RecursionDetected, locs[i],
                      "call graph cycle through '" + callee->name + "'");
                continue;
            }
            if (color[callee->name] == 0) visit(*callee, color);
        }
        color[proc.name] = 2;
    }

    void require_gate(const std::string& gate, SourceLoc loc) {
        // The parser only emits catalog gates; this guards hand-built ASTs.
        if (!is_builtin_gate(gate))
            flow_error(TypeErrorKind::UnknownGate, loc, "unknown gate '" + gate + "'");
    }

    const std::string& resolve(const Ctx& ctx, const std::string& name, SourceLoc loc) {
        if (!ctx.is_live(name)) {
            if (ctx.discarded.count(name))
                flow_error(TypeErrorKind::UseAfterDiscard, loc,
                           "qubit '" + name + "' was discarded earlier");
            flow_error(TypeErrorKind::UnknownVariable, loc, "unknown qubit '" + name + "'");
        }
        return name;
    }

    void flow_block(const Block& block, Ctx& ctx) {
        for (const auto& stmt : block.stmts) flow_stmt(stmt, ctx);
    }

    void flow_stmt(const Stmt& stmt, Ctx& ctx) {
        const SourceLoc loc = stmt.loc;
        std::visit(
            [&](const auto& node) {
                using T = std::decay_t<decltype(node)>;
                if constexpr (std::is_same_v<T, NewQbitStmt>) {
                    if (ctx.is_live(node.name))
                        flow_error(TypeErrorKind::ShadowedQubit, loc,
                                   "'new qbit " + node.name + "' shadows a live qubit");
                    ctx.add(node.name);
                } else if constexpr (std::is_same_v<T, UnaryGateStmt>) {
                    resolve(ctx, node.qubit, loc);
                    require_gate(node.gate, loc);
                    if (builtin(node.gate).arity != 1)
                        flow_error(TypeErrorKind::ArityMismatch, loc,
                                   "gate " + node.gate + " is binary; one operand given");
                } else if constexpr (std::is_same_v<T, BinaryGateStmt>) {
                    resolve(ctx, node.qubit0, loc);
                    if (node.qubit0 == node.qubit1)
                        flow_error(TypeErrorKind::DuplicateOperand, loc,
                                   "qubit '" + node.qubit0 +
                                       "' used twice in one gate (cloning is not allowed)");
                    resolve(ctx, node.qubit1, loc);
                    require_gate(node.gate, loc);
                    if (builtin(node.gate).arity != 2)
                        flow_error(TypeErrorKind::ArityMismatch, loc,
                                   "gate " + node.gate + " is unary; two operands given");
                } else if constexpr (std::is_same_v<T, MeasureStmt>) {
                    resolve(ctx, node.qubit, loc);
                    Ctx ctx0 = ctx, ctx1 = ctx;
                    flow_block(node.branch0, ctx0);
                    flow_block(node.branch1, ctx1);
                    if (ctx0.live_set() != ctx1.live_set())
                        flow_error(TypeErrorKind::BranchContextMismatch, loc,
                                   "measure branches end with different live sets");
                    Ctx joined;
                    joined.live = canonical_order(ctx.live, ctx0.live);
                    joined.discarded = ctx0.discarded;
                    joined.discarded.insert(ctx1.discarded.begin(), ctx1.discarded.end());
                    for (const auto& name : joined.live) joined.discarded.erase(name);
                    ctx = std::move(joined);
                } else if constexpr (std::is_same_v<T, WhileStmt>) {
                    resolve(ctx, node.qubit, loc);
                    Ctx body_ctx = ctx;
                    flow_block(node.body, body_ctx);
                    if (body_ctx.live_set() != ctx.live_set())
                        flow_error(TypeErrorKind::BranchContextMismatch, loc,
                                   "while body must preserve the live set");
                    ctx.discarded = body_ctx.discarded;
                    for (const auto& name : ctx.live) ctx.discarded.erase(name);
                } else if constexpr (std::is_same_v<T, DiscardStmt>) {
                    resolve(ctx, node.name, loc);
                    const auto& params = current_->params;
                    if (std::find(params.begin(), params.end(), node.name) != params.end())
                        flow_error(TypeErrorKind::ParameterDiscarded, loc,
                                   "parameter '" + node.name +
                                       "' may not be discarded inside its procedure");
                    ctx.remove(node.name);
                } else if constexpr (std::is_same_v<T, CallStmt>) {
                    const Proc* callee = program_.find_proc(node.proc);
                    if (callee == nullptr)
                        flow_error(TypeErrorKind::UnknownProcedure, loc,
                                   "unknown procedure '" + node.proc + "'");
                    if (node.args.size() != callee->params.size())
                        flow_error(TypeErrorKind::ArityMismatch, loc,
                                   "procedure '" + node.proc + "' expects " +
                                       std::to_string(callee->params.size()) +
                                       " arguments, got " + std::to_string(node.args.size()));
                    for (std::size_t i = 0; i < node.args.size(); ++i) {
                        for (std::size_t j = i + 1; j < node.args.size(); ++j)
                            if (node.args[i] == node.args[j])
                                flow_error(TypeErrorKind::DuplicateOperand, loc,
                                           "qubit '" + node.args[i] +
                                               "' passed twice to '" + node.proc + "'");
                        resolve(ctx, node.args[i], loc);
                    }
                    // Callees end with exactly their parameters live, so the
                    // caller context is unchanged.
                }
            },
            stmt.node);
    }

    const Program& program_;
    const Proc* current_ = nullptr;
    std::vector<TypeError> errors_;
};

} // namespace detail

/// Flows a linearity context through every procedure. On success the
/// returned TypedProgram is safe to execute: no unknown variables, no
/// cloned operands, no arity faults, joins agree, call graph acyclic.
inline Expected<TypedProgram, std::vector<TypeError>> typecheck(Program program) {
    detail::Checker checker(program);
    std::vector<std::string> main_outputs;
    std::vector<TypeError> errors = checker.run(main_outputs);
    if (!errors.empty()) return errors;
    TypedProgram typed;
    typed.program = std::move(program);
    typed.main_outputs = std::move(main_outputs);
    return typed;
}

} // namespace qfc
