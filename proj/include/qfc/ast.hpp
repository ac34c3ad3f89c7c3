#pragma once

#include <sstream>
#include <string>
#include <variant>
#include <vector>

namespace qfc {

/// 1-based source position.
struct SourceLoc {
    int line = 1;
    int column = 1;
};

struct Stmt;

struct Block {
    std::vector<Stmt> stmts;
};

struct NewQbitStmt {
    std::string name;
};

struct UnaryGateStmt {
    std::string qubit;
    std::string gate;
};

struct BinaryGateStmt {
    std::string qubit0;
    std::string qubit1;
    std::string gate;
};

struct MeasureStmt {
    std::string qubit;
    Block branch0;
    Block branch1;
};

/// Measures the loop qubit at the head; outcome 1 runs the body and loops,
/// outcome 0 exits.
struct WhileStmt {
    std::string qubit;
    Block body;
};

struct DiscardStmt {
    std::string name;
};

struct CallStmt {
    std::string proc;
    std::vector<std::string> args;
};

struct Stmt {
    std::variant<NewQbitStmt, UnaryGateStmt, BinaryGateStmt, MeasureStmt, WhileStmt, DiscardStmt,
                 CallStmt>
        node;
    SourceLoc loc;
};

struct Proc {
    std::string name;
    std::vector<std::string> params;
    Block body;
    SourceLoc loc;
};

struct Program {
    std::vector<Proc> procs;

    const Proc* find_proc(const std::string& name) const {
        for (const auto& p : procs)
            if (p.name == name) return &p;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Canonical pretty-printer: one statement per line, two-space indent.
// ---------------------------------------------------------------------------

namespace detail {

inline void print_block(std::ostringstream& out, const Block& block, int indent);

inline void print_stmt(std::ostringstream& out, const Stmt& stmt, int indent) {
    const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
    std::visit(
        [&](const auto& node) {
            using T = std::decay_t<decltype(node)>;
            if constexpr (std::is_same_v<T, NewQbitStmt>) {
                out << pad << "new qbit " << node.name << ";\n";
            } else if constexpr (std::is_same_v<T, UnaryGateStmt>) {
                out << pad << node.qubit << " *= " << node.gate << ";\n";
            } else if constexpr (std::is_same_v<T, BinaryGateStmt>) {
                out << pad << node.qubit0 << ", " << node.qubit1 << " *= " << node.gate << ";\n";
            } else if constexpr (std::is_same_v<T, MeasureStmt>) {
                out << pad << "measure " << node.qubit << " {\n";
                out << pad << "  0: {\n";
                print_block(out, node.branch0, indent + 2);
                out << pad << "  }\n";
                out << pad << "  1: {\n";
                print_block(out, node.branch1, indent + 2);
                out << pad << "  }\n";
                out << pad << "}\n";
            } else if constexpr (std::is_same_v<T, WhileStmt>) {
                out << pad << "while " << node.qubit << " {\n";
                print_block(out, node.body, indent + 1);
                out << pad << "}\n";
            } else if constexpr (std::is_same_v<T, DiscardStmt>) {
                out << pad << "discard " << node.name << ";\n";
            } else if constexpr (std::is_same_v<T, CallStmt>) {
                out << pad << "call " << node.proc << "(";
                for (std::size_t i = 0; i < node.args.size(); ++i) {
                    if (i) out << ", ";
                    out << node.args[i];
                }
                out << ");\n";
            }
        },
        stmt.node);
}

inline void print_block(std::ostringstream& out, const Block& block, int indent) {
    for (const auto& s : block.stmts) print_stmt(out, s, indent);
}

} // namespace detail

inline std::string pretty_print(const Program& program) {
    std::ostringstream out;
    bool first = true;
    for (const auto& proc : program.procs) {
        if (!first) out << "\n";
        first = false;
        out << "proc " << proc.name << "(";
        for (std::size_t i = 0; i < proc.params.size(); ++i) {
            if (i) out << ", ";
            out << proc.params[i];
        }
        out << ") {\n";
        detail::print_block(out, proc.body, 1);
        out << "}\n";
    }
    return out.str();
}

} // namespace qfc
