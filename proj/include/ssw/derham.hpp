#pragma once

#include "ssw/cdga.hpp"
#include "ssw/gca.hpp"

namespace ssw {

// g -> d(g) on ring generators, zero on symbols. Odd derivation.
Element de_rham(const Element& a);

// The cdga differential extended to forms; anticommutes with de_rham.
inline Element internal_diff(const Cdga& c, const Element& a) { return c.d(a); }

inline Element pushforward(const Morphism& f, const Element& a) { return f.apply(a); }

// Full contraction of a polyvector against a form of the same weight.
// For a canonical monomial D(g1)...D(gn) the d(g) symbols are stripped by
// left derivatives, innermost first (gn, then g(n-1), ...), and the shift
// twist (-1)^{k n(n-1)/2} of the table's shift k is applied.
Element contract(const Element& polyvector, const Element& form);

// Projection onto a fixed form weight / vector weight.
Element weight_part(const Element& a, int form_weight, int vec_weight);

}  // namespace ssw
