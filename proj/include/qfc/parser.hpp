#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "qfc/ast.hpp"
#include "qfc/expected.hpp"
#include "qfc/gates.hpp"
#include "qfc/lexer.hpp"

namespace qfc {

struct ParseError {
    SourceLoc loc;
    std::string message;
    std::vector<std::string> expected;
};

inline bool is_keyword(std::string_view s) {
    return s == "proc" || s == "new" || s == "qbit" || s == "measure" || s == "while" ||
           s == "discard" || s == "call";
}

namespace detail {

inline std::vector<std::string> gate_name_list() {
    std::vector<std::string> names;
    for (const auto& g : gate_catalog()) names.push_back(g.name);
    return names;
}

class Parser {
public:
    explicit Parser(std::string_view src) : toks_(tokenize(src)) {}

    Program parse_program() {
        Program program;
        program.procs.push_back(parse_proc());
        while (peek().kind != TokKind::End) program.procs.push_back(parse_proc());
        return program;
    }

private:
    const Token& peek(std::size_t ahead = 0) const {
        const std::size_t i = pos_ + ahead;
        return i < toks_.size() ? toks_[i] : toks_.back();
    }
    const Token& get() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }

    [[noreturn]] void fail(const Token& at, std::string message,
                           std::vector<std::string> expected) {
        throw ParseError{at.loc, std::move(message), std::move(expected)};
    }

    bool at_keyword(std::string_view kw) const {
        return peek().kind == TokKind::Ident && peek().text == kw;
    }

    void expect_keyword(std::string_view kw) {
        if (!at_keyword(kw))
            fail(peek(), "expected '" + std::string(kw) + "', found " + describe(peek()),
                 {std::string(kw)});
        get();
    }

    void expect(TokKind kind) {
        if (peek().kind != kind)
            fail(peek(),
                 std::string("expected ") + token_kind_name(kind) + ", found " + describe(peek()),
                 {token_kind_name(kind)});
        get();
    }

    std::string expect_ident(const char* what) {
        if (peek().kind != TokKind::Ident || is_keyword(peek().text))
            fail(peek(), std::string("expected ") + what + ", found " + describe(peek()),
                 {"identifier"});
        return get().text;
    }

    std::string expect_gate() {
        if (peek().kind != TokKind::Ident || !is_builtin_gate(peek().text))
            fail(peek(), "expected gate name, found " + describe(peek()), gate_name_list());
        return get().text;
    }

    void expect_branch_label(const char* digit) {
        if (peek().kind != TokKind::Int || peek().text != digit)
            fail(peek(), std::string("expected branch label ") + digit + ", found " +
                             describe(peek()),
                 {digit});
        get();
    }

    static std::string describe(const Token& t) {
        if (t.kind == TokKind::Ident || t.kind == TokKind::Int || t.kind == TokKind::Bad)
            return std::string(token_kind_name(t.kind)) + " '" + t.text + "'";
        return token_kind_name(t.kind);
    }

    Proc parse_proc() {
        const SourceLoc loc = peek().loc;
        expect_keyword("proc");
        Proc proc;
        proc.loc = loc;
        proc.name = expect_ident("procedure name");
        expect(TokKind::LParen);
        if (peek().kind != TokKind::RParen) {
            proc.params.push_back(parse_param());
            while (peek().kind == TokKind::Comma) {
                get();
                proc.params.push_back(parse_param());
            }
        }
        expect(TokKind::RParen);
        proc.body = parse_block();
        return proc;
    }

    std::string parse_param() {
        std::string name = expect_ident("parameter name");
        if (peek().kind == TokKind::Colon) {
            get();
            expect_keyword("qbit");
        }
        return name;
    }

    Block parse_block() {
        expect(TokKind::LBrace);
        Block block;
        while (peek().kind != TokKind::RBrace) {
            if (peek().kind == TokKind::End)
                fail(peek(), "unterminated block", {"'}'", "statement"});
            block.stmts.push_back(parse_stmt());
        }
        get();
        return block;
    }

    Stmt parse_stmt() {
        const Token& t = peek();
        Stmt stmt;
        stmt.loc = t.loc;
        if (at_keyword("new")) {
            get();
            expect_keyword("qbit");
            NewQbitStmt node{expect_ident("qubit name")};
            expect(TokKind::Semi);
            stmt.node = std::move(node);
        } else if (at_keyword("measure")) {
            get();
            MeasureStmt node;
            node.qubit = expect_ident("qubit name");
            expect(TokKind::LBrace);
            expect_branch_label("0");
            expect(TokKind::Colon);
            node.branch0 = parse_block();
            expect_branch_label("1");
            expect(TokKind::Colon);
            node.branch1 = parse_block();
            expect(TokKind::RBrace);
            stmt.node = std::move(node);
        } else if (at_keyword("while")) {
            get();
            WhileStmt node;
            node.qubit = expect_ident("qubit name");
            node.body = parse_block();
            stmt.node = std::move(node);
        } else if (at_keyword("discard")) {
            get();
            DiscardStmt node{expect_ident("qubit name")};
            expect(TokKind::Semi);
            stmt.node = std::move(node);
        } else if (at_keyword("call")) {
            get();
            CallStmt node;
            node.proc = expect_ident("procedure name");
            expect(TokKind::LParen);
            if (peek().kind != TokKind::RParen) {
                node.args.push_back(expect_ident("argument name"));
                while (peek().kind == TokKind::Comma) {
                    get();
                    node.args.push_back(expect_ident("argument name"));
                }
            }
            expect(TokKind::RParen);
            expect(TokKind::Semi);
            stmt.node = std::move(node);
        } else if (t.kind == TokKind::Ident && !is_keyword(t.text)) {
            const std::string first = get().text;
            if (peek().kind == TokKind::Comma) {
                get();
                BinaryGateStmt node;
                node.qubit0 = first;
                node.qubit1 = expect_ident("qubit name");
                expect(TokKind::StarEq);
                node.gate = expect_gate();
                expect(TokKind::Semi);
                stmt.node = std::move(node);
            } else if (peek().kind == TokKind::StarEq) {
                get();
                UnaryGateStmt node;
                node.qubit = first;
                node.gate = expect_gate();
                expect(TokKind::Semi);
                stmt.node = std::move(node);
            } else {
                fail(peek(), "expected '*=' or ',' after qubit name, found " + describe(peek()),
                     {"'*='", "','"});
            }
        } else {
            fail(t, "expected a statement, found " + describe(t),
                 {"new", "measure", "while", "discard", "call", "identifier", "'}'"});
        }
        return stmt;
    }

    std::vector<Token> toks_;
    std::size_t pos_ = 0;
};

} // namespace detail

/// Parses flow-chart source into an AST. Total: any byte sequence yields
/// either a Program or a ParseError with position and expected-token set.
inline Expected<Program, ParseError> parse(std::string_view source) {
    try {
        detail::Parser parser(source);
        return parser.parse_program();
    } catch (ParseError& e) {
        return std::move(e);
    }
}

} // namespace qfc
