#pragma once

#include "minikind/ast.hpp"
#include "minikind/lexer.hpp"

namespace minikind {

// Parses a whole program and resolves the main node: a --%MAIN pragma wins,
// else a node literally named "main", else a sole node.
Program parse(const std::vector<Token>& tokens);

// Parses a single expression consuming the entire token stream (advice lines).
ExprPtr parse_expression(const std::vector<Token>& tokens);

Program parse_file(const std::string& path);
Program parse_source(const std::string& source, const std::string& filename);

}  // namespace minikind
