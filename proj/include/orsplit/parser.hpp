#pragma once

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

#include "orsplit/program.hpp"

namespace orsplit {

struct ParseError : std::runtime_error {
    int line;    // 1-based
    int column;  // 1-based
    ParseError(int l, int c, const std::string& msg)
        : std::runtime_error(std::to_string(l) + ":" + std::to_string(c) + ": " + msg),
          line(l),
          column(c) {}
};

/// Parses the Prolog subset: facts, rules, integers, atoms, variables,
/// [H|T] list sugar, % line comments, and `:- parallel name/arity.`
/// directives. Throws ParseError with a 1-based location on anything else.
std::shared_ptr<Program> parse_program(std::string_view text);

/// Parses one goal conjunction terminated by '.'. Terms are allocated in
/// `program`'s arena so the query can reference its symbols uniformly.
Query parse_query(Program& program, std::string_view text);

/// Canonical text for a program; parse(print(parse(t))) == parse(t).
std::string print_program(const Program& program);

/// Renders a term with template/query variable names (no bindings involved).
std::string print_term(Term t, const std::vector<std::string>& var_names);

}  // namespace orsplit
