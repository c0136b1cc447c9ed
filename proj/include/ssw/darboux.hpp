#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssw/cdga.hpp"
#include "ssw/gca.hpp"

namespace ssw {

enum class Variant { Darboux, Weak, Strong };
std::string variant_name(Variant v);

// Name of the j-th (1-based) generator of a family in a given degree:
// "x" / "x2" in degree 0, "xm1" / "xm1_2" in degree -1.
std::string family_name(const std::string& letter, int degree, int j, int count);

int floor_div(int a, int b);
int mod4(int k);

// One pairing level: x^i_j in degree i and y^{k-i}_j in degree k-i.
struct Level {
    int i = 0;
    std::vector<std::string> x, y;
};

struct DarbouxSpec {
    int k = -1;
    std::map<int, int> m;                // degree i -> m_i; weak: m[d] counts z
    std::vector<std::string> base_vars;  // names of the degree-0 x, optional
    std::set<std::string> invertible;
    std::string field = "Q";
    std::string phi = "0";
    std::vector<std::string> q;  // weak only
    bool attest_phi_reduced_zero = false;
};

struct DarbouxInstance {
    int k = 0;
    int d = 0;
    Variant variant = Variant::Darboux;
    TablePtr table;
    Cdga A;
    std::vector<Level> levels;  // i = 0, -1, ...
    std::vector<std::string> z;
    std::vector<Element> q;
    Element Phi, omega0, phi;
    bool attest_phi_reduced_zero = false;
    std::vector<std::string> warnings;

    Element gen(const std::string& name) const { return Element::generator(table, name); }
    std::map<int, int> m() const;
    // Names of the degree-0 ring generators.
    std::vector<std::string> degree_zero() const;
};

struct HamiltonianSplit {
    Element Phi_plus;
    std::map<std::string, Element> comp;  // y name -> Phi^{i+1}_j
    Element phi_plus;
};

DarbouxInstance build_darboux(const DarbouxSpec& spec);
DarbouxInstance build_weak_darboux(const DarbouxSpec& spec);
// Darboux builder over a prepared table; Phi must live in it.
DarbouxInstance darboux_from_table(int k, TablePtr t, std::vector<Level> levels, const Element& Phi,
                                   bool attest = false);

Element master_residual(const DarbouxInstance& inst);
// Generator images of d read off from Phi; needs k, variant, levels, z, q, Phi.
std::map<std::string, Element> hamiltonian_differential(const DarbouxInstance& inst);

// Identity groups. Every entry must be zero for the instance to be valid.
ResidualList check_symplectic_triple(const DarbouxInstance& inst);

HamiltonianSplit split_hamiltonian(const DarbouxInstance& inst);
ResidualList check_split(const DarbouxInstance& inst, const HamiltonianSplit& s);
ResidualList check_split_triple(const DarbouxInstance& inst, const HamiltonianSplit& s);

// Value of Phi at the origin of the non-unit degree-0 generators (units at 1).
Element phi_at_origin(const DarbouxInstance& inst);

DarbouxInstance strong_to_darboux(const DarbouxInstance& inst);

struct CritLocus {
    DarbouxInstance inst;
    std::vector<Element> ideal;
};
CritLocus crit(const std::vector<std::string>& base_vars, const std::string& phi,
               const std::set<std::string>& invertible = {}, const std::string& field = "Q");
CritLocus quadratic_zero_locus(const std::vector<std::string>& base_vars,
                               const std::vector<std::string>& q,
                               const std::vector<std::string>& s,
                               const std::set<std::string>& invertible = {},
                               const std::string& field = "Q");

}  // namespace ssw
