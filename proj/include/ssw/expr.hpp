#pragma once

#include <string>

#include "ssw/gca.hpp"

namespace ssw {

// Grammar:
//   expr  := term (('+' | '-') term)*
//   term  := unary (('*' | '/') unary)*
//   unary := '-' unary | power
//   power := atom ('^' ['-'] digits)?
//   atom  := digits | ident | 'd(' ident ')' | 'D(' ident ')' | '(' expr ')'
// `i` is the imaginary unit when the table's field is Q(i).
// Division is allowed only by units (nonzero scalars or Laurent monomials).
Element parse(const std::string& text, const TablePtr& table);

inline std::string print(const Element& a) { return a.str(); }

}  // namespace ssw
