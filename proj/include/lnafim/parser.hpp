#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "lnafim/expr.hpp"
#include "lnafim/network.hpp"

namespace lnafim {

/// Parses the reaction-network DSL:
///
///     species r p
///     params  k_r k_p g_r g_p
///     reaction 0 -> r        @ k_r
///     reaction r -> r + p    @ k_p * r
///
/// `#` starts a comment. Sides are `0` or `[int*]species` terms joined by
/// `+`. Errors are InputError with "line L, column C: ..." prefixes.
ReactionNetwork parse_model(std::string_view text);

/// Parses a single rate expression against the given symbol tables.
Expr parse_expression(std::string_view text, const std::vector<std::string>& species,
                      const std::vector<std::string>& params);

}  // namespace lnafim
