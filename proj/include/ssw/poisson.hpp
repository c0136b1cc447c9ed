#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ssw/cdga.hpp"
#include "ssw/darboux.hpp"
#include "ssw/gca.hpp"
#include "ssw/lagrangian.hpp"

namespace ssw {

// Polyvectors are elements over a table whose D(g) symbols stand for the
// coordinate vector fields; the table's shift sets their parity.

// Schouten bracket, a biderivation of shifted degree with [D(g), f] = df/dg
// and [D(g), D(h)] = 0.
Element schouten(const Element& v, const Element& w);

// Differential of polyvectors: the cdga differential on D symbols.
inline Element polyvector_diff(const Cdga& c, const Element& v) { return c.d(v); }

// Shifted parity of a polyvector: parity + shift + 1.
int shifted_parity(const Element& v);

struct StrictPoissonData {
    TablePtr table;
    int k = 0;
    Element pi;
    ResidualList checks;  // d pi and [pi, pi]
    bool ok() const { return all_zero(checks); }
};

ResidualList check_strict(const Cdga& c, const Element& pi);

StrictPoissonData bivector_from_darboux(const DarbouxInstance& inst);

// {f, g} = (-1)^{|f|+k+1} [[pi, f], g]. On coordinate functions this is the
// contraction of pi against d_dR f d_dR g; the derived form keeps the
// Koszul signs of odd coefficients when k is odd.
Element bracket_from_bivector(const Element& pi, int k, const Element& f, const Element& g);
// The literal contraction (-1)^{|f|+k+1} i_pi(d_dR f d_dR g).
Element contraction_bracket(const Element& pi, int k, const Element& f, const Element& g);

using Bracket = std::function<Element(const Element&, const Element&)>;

// Closed-form bracket on generator pairs: {y, x} = (-1)^{i+1} on paired
// generators at level i, zero otherwise (plain Darboux form only).
ResidualList check_bracket_table(const DarbouxInstance& inst, const Element& pi);

// Shifted antisymmetry, Jacobi, d-compatibility and Leibniz on all
// generator pairs / triples plus the given extra elements.
ResidualList check_p_structure(const Cdga& c, const Bracket& br, int k,
                               const std::vector<Element>& extra = {});

// Strict coisotropic structure on alpha: A -> B. pi is a bivector over the B
// table (whose D symbols carry the T_B[-k] parity) and `images` sends every
// ring generator of A to a polyvector over B of weight <= 1.
struct CoisotropicData {
    TablePtr source, target;
    int k = 0;
    Element pi;
    std::map<std::string, Element> images;
    Element apply(const Element& a) const;
};

CoisotropicData coisotropic_from_lagrangian(const LagrangianInstance& inst);

// Groups: pi_B (d pi, [pi, pi]), differential:<g> (d + [pi, -] against the
// image of dg), bracket:{a,b} against the Darboux bracket of A, and
// projection:<g> (weight-0 part equals alpha).
ResidualList check_coisotropic(const LagrangianInstance& inst, const CoisotropicData& data);

}  // namespace ssw
