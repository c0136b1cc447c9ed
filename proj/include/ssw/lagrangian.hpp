#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "ssw/cdga.hpp"
#include "ssw/darboux.hpp"
#include "ssw/gca.hpp"

namespace ssw {

// u^i_j in degree i paired with v^{k-1-i}_j.
struct LagLevel {
    int i = 0;
    std::vector<std::string> u, v;
};

struct LagrangianSpec {
    std::map<int, int> n;                       // degree i -> n_i; weak: n[e] counts w
    std::map<std::string, std::string> alpha0;  // degree-0 x of the base -> generator of B^0
    std::set<std::string> invertible;           // further units of B^0
    std::vector<std::string> q;                 // weak only
    std::string psi = "0";
};

// Generator names of B. xt maps every x of the base to its image x~.
struct LagrangianShape {
    TablePtr table;
    std::map<std::string, std::string> xt;
    std::vector<LagLevel> levels;  // i = 0, -1, ...
    std::vector<std::string> w;
};

struct LagrangianInstance {
    DarbouxInstance base;
    HamiltonianSplit split;
    int k = 0;
    int e = 0;
    Variant variant = Variant::Darboux;
    LagrangianShape shape;
    TablePtr table;
    Cdga B;
    Morphism alpha;
    std::vector<Element> q;
    Element Psi, h0, psi;

    Element gen(const std::string& name) const { return Element::generator(table, name); }
    const std::vector<LagLevel>& levels() const { return shape.levels; }
    std::map<int, int> n() const;
};

LagrangianShape lagrangian_shape(const DarbouxInstance& base, const LagrangianSpec& spec, bool weak);

LagrangianInstance build_lagrangian_darboux(const DarbouxInstance& base, const LagrangianSpec& spec);
LagrangianInstance build_weak_lagrangian_darboux(const DarbouxInstance& base, const LagrangianSpec& spec);
// Builder over a prepared shape; Psi and q must live in shape.table.
LagrangianInstance lagrangian_from_shape(const DarbouxInstance& base, const LagrangianShape& shape,
                                         const std::vector<Element>& q, const Element& Psi);

// alpha on A_+: x -> x~, y -> 0. Only meaningful on y-free elements.
Morphism alpha_plus(const DarbouxInstance& base, const LagrangianShape& shape);

Element superpotential_residual(const LagrangianInstance& inst);
std::map<std::string, Element> lagrangian_differential(const LagrangianInstance& inst);
std::map<std::string, Element> lagrangian_alpha_images(const LagrangianInstance& inst);

// Full identity suite. Labels are "<group>:<identity>" with groups
// superpotential_pde, square_zero, morphism, isotropic, lagrangian_triple,
// consistency_chain.
ResidualList check_lagrangian(const LagrangianInstance& inst);

struct SuperpotentialSplit {
    Element Psi_plus;
    std::map<std::string, Element> comp;  // v name -> Psi^{i+1}_j
};

SuperpotentialSplit split_superpotential(const LagrangianInstance& inst);
// Labels: reassemble, plus, comp:<v>, alpha:<y>, dxt:<x~>, du:<u>, dv:<v>, twist.
ResidualList check_superpotential_split(const LagrangianInstance& inst, const SuperpotentialSplit& s);

// h = (h^0, h^1, ...); entry i is alpha_*(omega^i) - d h^i - d_dR h^{i-1}
// with omega^i = 0 for i > 0, reported one index past the end.
ResidualList verify_isotropic(const LagrangianInstance& inst, const std::vector<Element>& h);

// Exact degree-bounded primitive: finds X_0..X_P (X_p of weight p and
// degree k-p, ring exponents summing to at most `bound`) with
// d X_p + d_dR X_{p-1} = gamma_p for p = 0..P+1, gamma_{P+1} = 0.
std::vector<Element> find_primitive(const Cdga& B, int k, const std::vector<Element>& gamma, int bound);
ResidualList primitive_residuals(const Cdga& B, const std::vector<Element>& gamma, const std::vector<Element>& X);
// (-alpha(Phi + Phi+), -alpha_*(phi + phi+), (k-1) h0)
std::vector<Element> lagrangian_gamma(const LagrangianInstance& inst);

// Lagrangian data in general position: any B with the generator shape of a
// Lagrangian Darboux form, a cdga morphism alpha with alpha(x) = x~, and a
// primitive (Xi, psi).
struct RawLagrangian {
    LagrangianShape shape;
    Cdga B;
    Morphism alpha;
    Element Xi, psi;
};

ResidualList check_raw(const DarbouxInstance& base, const RawLagrangian& raw);

struct HomotopyCertificate {
    Cdga Bst;  // B tensor Q[s,t]
    Morphism H;
    Element hdot0;
    Morphism alpha_hat, alpha;  // s = 0 and s = 1 ends
    Element h0_hat, h0;
    ResidualList checks;
};

struct Normalized {
    LagrangianInstance inst;
    HomotopyCertificate cert;
    ResidualList steps;  // internal consistency of each pipeline stage
};

Normalized normalize(const DarbouxInstance& base, const RawLagrangian& raw);

RawLagrangian gauge_obfuscate(const LagrangianInstance& inst, std::uint64_t seed);

// H is a cdga morphism A -> Bst restricting to alpha_hat at s = 0 and to
// alpha at s = 1; hdot0 restricts to h0_hat and h0, is d_dR-closed and
// d hdot0 = H_*(omega0).
ResidualList verify_homotopy(const DarbouxInstance& base, const Cdga& Bst, const Morphism& H,
                             const Morphism& alpha_hat, const Morphism& alpha, const Element& hdot0,
                             const Element& h0_hat, const Element& h0);

// y^{k-i} images of the interpolating homotopy for a given set of a's
// (x~ name -> a). Used by normalize and gauge_obfuscate.
Morphism homotopy_morphism(const LagrangianInstance& inst, const Cdga& Bst,
                           const std::map<std::string, Element>& a);

}  // namespace ssw
