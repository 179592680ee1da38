#pragma once

#include "heightlab/exactnum.hpp"

#include <stdexcept>
#include <string>

namespace heightlab {

struct ParseError : std::runtime_error {
    ParseError(std::size_t pos, const std::string& what);
    std::size_t position;
};

// Grammar: integer and rational literals (3, -2/5), the variable t, + - * ^, parentheses.
// A literal directly followed by t or '(' is an implicit product.
QPoly parse_poly(const std::string& text);

}  // namespace heightlab
