#ifndef SLX_EXPR_HPP
#define SLX_EXPR_HPP

#include <functional>
#include <memory>
#include <string>

namespace slx {

/// Compiles an arithmetic expression in the variable `x` into a callable.
///
/// Grammar: numbers, x, + - * / ^, parentheses, unary minus, and the
/// functions sin cos tan exp log sqrt abs sinh cosh tanh atanh asinh acosh
/// atan asin acos, two-argument pow/min/max, constants pi and e.
/// Powers associate right. Throws InvalidProblem on parse errors.
std::function<double(double)> compile_expression(const std::string& text);

}  // namespace slx

#endif  // SLX_EXPR_HPP
