#pragma once

#include <string>

#include "kslab/smooth.hpp"

namespace kslab {

// Parse a closed-form expression in one named variable ("z", "theta", ...)
// into a Smooth1.  Derivatives are produced by symbolic differentiation of the
// parsed tree (with constant folding), so profile expressions from config
// files participate in the ansatz constructions with exact derivatives.
//
// Grammar: + - * / ^ (right-assoc), unary minus, parentheses, numbers,
// the variable, constants pi/e, and sin cos tan exp log sqrt sinh cosh tanh.
// Throws ParseError with a character position on malformed input.
Smooth1Ptr parse_expression(const std::string& src, const std::string& var);

}  // namespace kslab
