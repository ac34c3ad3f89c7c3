#pragma once

#include <cctype>
#include <string>
#include <string_view>
#include <vector>

#include "qfc/ast.hpp"

namespace qfc {

enum class TokKind {
    Ident,
    Int,
    LParen,
    RParen,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    StarEq,
    End,
    Bad,
};

struct Token {
    TokKind kind = TokKind::End;
    std::string text;
    SourceLoc loc;
};

inline const char* token_kind_name(TokKind k) {
    switch (k) {
        case TokKind::Ident: return "identifier";
        case TokKind::Int: return "integer";
        case TokKind::LParen: return "'('";
        case TokKind::RParen: return "')'";
        case TokKind::LBrace: return "'{'";
        case TokKind::RBrace: return "'}'";
        case TokKind::Comma: return "','";
        case TokKind::Semi: return "';'";
        case TokKind::Colon: return "':'";
        case TokKind::StarEq: return "'*='";
        case TokKind::End: return "end of input";
        case TokKind::Bad: return "invalid character";
    }
    return "?";
}

/// Tokenizes the whole source up front. Unrecognized bytes become Bad
/// tokens; the lexer itself never fails.
inline std::vector<Token> tokenize(std::string_view src) {
    std::vector<Token> out;
    int line = 1, col = 1;
    std::size_t i = 0;
    auto advance = [&](std::size_t n) {
        for (std::size_t k = 0; k < n; ++k, ++i) {
            if (src[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
    };
    while (i < src.size()) {
        const char c = src[i];
        if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
            advance(1);
            continue;
        }
        if (c == '/' && i + 1 < src.size() && src[i + 1] == '/') {
            while (i < src.size() && src[i] != '\n') advance(1);
            continue;
        }
        const SourceLoc loc{line, col};
        auto push1 = [&](TokKind k) {
            out.push_back({k, std::string(1, c), loc});
            advance(1);
        };
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                      src[j] == '_'))
                ++j;
            out.push_back({TokKind::Ident, std::string(src.substr(i, j - i)), loc});
            advance(j - i);
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < src.size() && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
            out.push_back({TokKind::Int, std::string(src.substr(i, j - i)), loc});
            advance(j - i);
            continue;
        }
        switch (c) {
            case '(': push1(TokKind::LParen); continue;
            case ')': push1(TokKind::RParen); continue;
            case '{': push1(TokKind::LBrace); continue;
            case '}': push1(TokKind::RBrace); continue;
            case ',': push1(TokKind::Comma); continue;
            case ';': push1(TokKind::Semi); continue;
            case ':': push1(TokKind::Colon); continue;
            case '*':
                if (i + 1 < src.size() && src[i + 1] == '=') {
                    out.push_back({TokKind::StarEq, "*=", loc});
                    advance(2);
                    continue;
                }
                push1(TokKind::Bad);
                continue;
            default: push1(TokKind::Bad); continue;
        }
    }
    out.push_back({TokKind::End, "", {line, col}});
    return out;
}

} // namespace qfc
