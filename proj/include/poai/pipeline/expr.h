#pragma once

#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

namespace poai::pipeline {

// Plugin code is a single expression over the step record:
//   acc, x, step              numbers bound by the runtime
//   params.<name>             plugin parameter (worker config overrides)
//   + - * / %  < <= > >= == !=  && || !  cond ? a : b
//   min(a, b) max(a, b) abs(a) floor(a)
// Division or modulo by zero yields 0 so evaluation is total.

enum class LexKind { Number, Ident, Op, LParen, RParen, Comma, Dot, Question, Colon, String, Other };

struct Lexeme {
    LexKind kind;
    std::string text;
    std::size_t offset;
};

// Never fails: characters outside the language become Other lexemes, quoted
// text becomes a String lexeme. The safety pass decides what to do with them.
std::vector<Lexeme> lex(std::string_view source);

struct Expr;
using ExprPtr = std::unique_ptr<Expr>;

struct Expr {
    enum class Kind { Number, Var, Param, Unary, Binary, Ternary, Call };
    Kind kind;
    double number = 0;
    std::string name;  // variable, parameter, operator or function name
    std::vector<ExprPtr> args;
};

// Throws ProtocolError(InvalidArgument) naming the byte offset of the problem.
ExprPtr parseExpr(std::string_view source);

std::size_t exprDepth(const Expr& e);

struct EvalContext {
    double acc = 0;
    double x = 0;
    double step = 0;
    const std::map<std::string, double>* params = nullptr;
};

// Unknown parameters evaluate to 0.
double evaluate(const Expr& e, const EvalContext& ctx);

}  // namespace poai::pipeline
