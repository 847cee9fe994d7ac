// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string_view>

#include "caporch/error.hpp"

namespace caporch {

enum class ExpressionErrorKind { ParseError, DivisionByZero, DomainError };
std::string_view to_string(ExpressionErrorKind k);
using ExpressionError = KindedError<ExpressionErrorKind>;

// Arithmetic over doubles.
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/' | '×' | '÷') unary)*
//   unary   := ('+' | '-') unary | power
//   power   := primary ('^' unary)?          right-associative, binds tighter than unary minus
//   primary := number | 'pi' | func '(' args ')' | '(' expr ')'
//   func    := sqrt | abs | sin | cos (1 arg), min | max (2+ args)
//
// Throws ExpressionError.
double eval_expression(std::string_view text);

}  // namespace caporch
