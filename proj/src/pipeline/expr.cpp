#include "poai/pipeline/expr.h"

#include <cctype>
#include <cmath>
#include <cstdlib>

#include "poai/common/error.h"

namespace poai::pipeline {
namespace {

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool identChar(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

constexpr std::size_t kMaxParseDepth = 200;

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src), toks_(lex(src)) {}

    ExprPtr parseAll() {
        if (toks_.empty()) fail(0, "empty expression");
        auto e = ternary(0);
        if (pos_ < toks_.size()) fail(toks_[pos_].offset, "unexpected '" + toks_[pos_].text + "'");
        return e;
    }

private:
    [[noreturn]] void fail(std::size_t offset, const std::string& msg) const {
        throw ProtocolError(Errc::InvalidArgument, "expression offset " + std::to_string(offset) + ": " + msg);
    }

    const Lexeme* peek() const { return pos_ < toks_.size() ? &toks_[pos_] : nullptr; }
    bool peekOp(std::string_view op) const {
        const auto* t = peek();
        return t && t->kind == LexKind::Op && t->text == op;
    }
    bool peekKind(LexKind k) const {
        const auto* t = peek();
        return t && t->kind == k;
    }
    const Lexeme& expect(LexKind k, const char* what) {
        const auto* t = peek();
        if (!t || t->kind != k) fail(t ? t->offset : src_.size(), std::string("expected ") + what);
        ++pos_;
        return *t;
    }
    void guard(std::size_t depth) const {
        if (depth > kMaxParseDepth) fail(peek() ? peek()->offset : src_.size(), "nesting too deep");
    }

    static ExprPtr node(Expr::Kind k, std::string name = {}) {
        auto e = std::make_unique<Expr>();
        e->kind = k;
        e->name = std::move(name);
        return e;
    }
    static ExprPtr binary(std::string op, ExprPtr l, ExprPtr r) {
        auto e = node(Expr::Kind::Binary, std::move(op));
        e->args.push_back(std::move(l));
        e->args.push_back(std::move(r));
        return e;
    }

    ExprPtr ternary(std::size_t d) {
        guard(d);
        auto cond = logicOr(d + 1);
        if (!peekKind(LexKind::Question)) return cond;
        ++pos_;
        auto a = ternary(d + 1);
        expect(LexKind::Colon, "':'");
        auto b = ternary(d + 1);
        auto e = node(Expr::Kind::Ternary);
        e->args.push_back(std::move(cond));
        e->args.push_back(std::move(a));
        e->args.push_back(std::move(b));
        return e;
    }

    ExprPtr logicOr(std::size_t d) {
        auto l = logicAnd(d + 1);
        while (peekOp("||")) {
            ++pos_;
            l = binary("||", std::move(l), logicAnd(d + 1));
        }
        return l;
    }

    ExprPtr logicAnd(std::size_t d) {
        auto l = compare(d + 1);
        while (peekOp("&&")) {
            ++pos_;
            l = binary("&&", std::move(l), compare(d + 1));
        }
        return l;
    }

    ExprPtr compare(std::size_t d) {
        auto l = additive(d + 1);
        for (const char* op : {"<", "<=", ">", ">=", "==", "!="}) {
            if (peekOp(op)) {
                ++pos_;
                return binary(op, std::move(l), additive(d + 1));
            }
        }
        return l;
    }

    ExprPtr additive(std::size_t d) {
        auto l = multiplicative(d + 1);
        while (peekOp("+") || peekOp("-")) {
            auto op = toks_[pos_++].text;
            l = binary(op, std::move(l), multiplicative(d + 1));
        }
        return l;
    }

    ExprPtr multiplicative(std::size_t d) {
        auto l = unary(d + 1);
        while (peekOp("*") || peekOp("/") || peekOp("%")) {
            auto op = toks_[pos_++].text;
            l = binary(op, std::move(l), unary(d + 1));
        }
        return l;
    }

    ExprPtr unary(std::size_t d) {
        guard(d);
        if (peekOp("-") || peekOp("!")) {
            auto e = node(Expr::Kind::Unary, toks_[pos_++].text);
            e->args.push_back(unary(d + 1));
            return e;
        }
        return primary(d + 1);
    }

    ExprPtr primary(std::size_t d) {
        const auto* t = peek();
        if (!t) fail(src_.size(), "unexpected end of expression");
        switch (t->kind) {
            case LexKind::Number: {
                ++pos_;
                auto e = node(Expr::Kind::Number);
                e->number = std::strtod(t->text.c_str(), nullptr);
                return e;
            }
            case LexKind::LParen: {
                ++pos_;
                auto e = ternary(d + 1);
                expect(LexKind::RParen, "')'");
                return e;
            }
            case LexKind::Ident: return identifier(d);
            default: fail(t->offset, "unexpected '" + t->text + "'");
        }
    }

    ExprPtr identifier(std::size_t d) {
        const Lexeme& id = toks_[pos_++];
        if (id.text == "params") {
            expect(LexKind::Dot, "'.' after params");
            const auto& field = expect(LexKind::Ident, "parameter name");
            return node(Expr::Kind::Param, field.text);
        }
        if (peekKind(LexKind::LParen)) {
            std::size_t arity = 0;
            if (id.text == "min" || id.text == "max") arity = 2;
            else if (id.text == "abs" || id.text == "floor") arity = 1;
            else fail(id.offset, "unknown function '" + id.text + "'");
            ++pos_;
            auto call = node(Expr::Kind::Call, id.text);
            for (std::size_t i = 0; i < arity; ++i) {
                if (i > 0) expect(LexKind::Comma, "','");
                call->args.push_back(ternary(d + 1));
            }
            expect(LexKind::RParen, "')'");
            return call;
        }
        if (id.text == "acc" || id.text == "x" || id.text == "step") {
            return node(Expr::Kind::Var, id.text);
        }
        fail(id.offset, "unknown identifier '" + id.text + "'");
    }

    std::string_view src_;
    std::vector<Lexeme> toks_;
    std::size_t pos_ = 0;
};

}  // namespace

std::vector<Lexeme> lex(std::string_view s) {
    std::vector<Lexeme> out;
    std::size_t i = 0;
    while (i < s.size()) {
        const char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) {
            ++i;
            continue;
        }
        const std::size_t start = i;
        if (digit(c) || (c == '.' && i + 1 < s.size() && digit(s[i + 1]))) {
            while (i < s.size() && digit(s[i])) ++i;
            if (i < s.size() && s[i] == '.') {
                ++i;
                while (i < s.size() && digit(s[i])) ++i;
            }
            if (i < s.size() && (s[i] == 'e' || s[i] == 'E')) {
                std::size_t j = i + 1;
                if (j < s.size() && (s[j] == '+' || s[j] == '-')) ++j;
                if (j < s.size() && digit(s[j])) {
                    i = j;
                    while (i < s.size() && digit(s[i])) ++i;
                }
            }
            out.push_back({LexKind::Number, std::string(s.substr(start, i - start)), start});
            continue;
        }
        if (identStart(c)) {
            while (i < s.size() && identChar(s[i])) ++i;
            out.push_back({LexKind::Ident, std::string(s.substr(start, i - start)), start});
            continue;
        }
        if (c == '"' || c == '\'') {
            ++i;
            while (i < s.size() && s[i] != c) i += (s[i] == '\\' && i + 1 < s.size()) ? 2 : 1;
            if (i < s.size()) ++i;
            out.push_back({LexKind::String, std::string(s.substr(start, i - start)), start});
            continue;
        }
        const std::string_view two = s.substr(i, 2);
        if (two == "<=" || two == ">=" || two == "==" || two == "!=" || two == "&&" || two == "||") {
            out.push_back({LexKind::Op, std::string(two), start});
            i += 2;
            continue;
        }
        LexKind kind = LexKind::Other;
        switch (c) {
            case '+': case '-': case '*': case '/': case '%': case '<': case '>': case '!':
                kind = LexKind::Op;
                break;
            case '(': kind = LexKind::LParen; break;
            case ')': kind = LexKind::RParen; break;
            case ',': kind = LexKind::Comma; break;
            case '.': kind = LexKind::Dot; break;
            case '?': kind = LexKind::Question; break;
            case ':': kind = LexKind::Colon; break;
            default: break;
        }
        out.push_back({kind, std::string(1, c), start});
        ++i;
    }
    return out;
}

ExprPtr parseExpr(std::string_view source) { return Parser(source).parseAll(); }

std::size_t exprDepth(const Expr& e) {
    std::size_t deepest = 0;
    for (const auto& a : e.args) deepest = std::max(deepest, exprDepth(*a));
    return deepest + 1;
}

double evaluate(const Expr& e, const EvalContext& ctx) {
    switch (e.kind) {
        case Expr::Kind::Number: return e.number;
        case Expr::Kind::Var:
            if (e.name == "acc") return ctx.acc;
            if (e.name == "x") return ctx.x;
            return ctx.step;
        case Expr::Kind::Param: {
            if (!ctx.params) return 0;
            const auto it = ctx.params->find(e.name);
            return it == ctx.params->end() ? 0 : it->second;
        }
        case Expr::Kind::Unary: {
            const double v = evaluate(*e.args[0], ctx);
            return e.name == "-" ? -v : (v == 0 ? 1 : 0);
        }
        case Expr::Kind::Ternary:
            return evaluate(*e.args[0], ctx) != 0 ? evaluate(*e.args[1], ctx) : evaluate(*e.args[2], ctx);
        case Expr::Kind::Call: {
            const double a = evaluate(*e.args[0], ctx);
            if (e.name == "abs") return std::fabs(a);
            if (e.name == "floor") return std::floor(a);
            const double b = evaluate(*e.args[1], ctx);
            return e.name == "min" ? std::min(a, b) : std::max(a, b);
        }
        case Expr::Kind::Binary: break;
    }
    const auto& op = e.name;
    if (op == "&&") return (evaluate(*e.args[0], ctx) != 0 && evaluate(*e.args[1], ctx) != 0) ? 1 : 0;
    if (op == "||") return (evaluate(*e.args[0], ctx) != 0 || evaluate(*e.args[1], ctx) != 0) ? 1 : 0;
    const double a = evaluate(*e.args[0], ctx);
    const double b = evaluate(*e.args[1], ctx);
    if (op == "+") return a + b;
    if (op == "-") return a - b;
    if (op == "*") return a * b;
    if (op == "/") return b == 0 ? 0 : a / b;
    if (op == "%") return b == 0 ? 0 : std::fmod(a, b);
    if (op == "<") return a < b;
    if (op == "<=") return a <= b;
    if (op == ">") return a > b;
    if (op == ">=") return a >= b;
    if (op == "==") return a == b;
    return a != b;
}

}  // namespace poai::pipeline
