#pragma once

#include <map>
#include <string>
#include <vector>

#include "ssw/cdga.hpp"
#include "ssw/darboux.hpp"
#include "ssw/lagrangian.hpp"

namespace ssw {

// Rational values for the degree-0 generators.
using ClassicalPoint = std::map<std::string, Scalar>;

// rows x cols, rows indexed by the target basis.
using QMatrix = std::vector<std::vector<Scalar>>;

QMatrix zero_matrix(std::size_t rows, std::size_t cols);
std::size_t matrix_rank(const QMatrix& m);
QMatrix matmul(const QMatrix& a, const QMatrix& b);
bool is_zero_matrix(const QMatrix& m);
std::string matrix_str(const QMatrix& m);

// Throws InvalidPoint unless every degree-0 generator has a value, units
// are nonzero and d of every degree -1 generator vanishes at p.
void check_point(const Cdga& c, const ClassicalPoint& p);
// Value at p of a function; generators of negative degree evaluate to 0.
Scalar value_at(const Element& f, const ClassicalPoint& p);

// Finite complex of Q-vector spaces. d.at(n) maps degree n to degree n+1.
struct PointwiseComplex {
    std::map<int, std::vector<std::string>> basis;
    std::map<int, QMatrix> d;

    std::size_t dim(int n) const;
    QMatrix diff(int n) const;  // zero matrix when absent
    int lo() const;
    int hi() const;
    // d(n+1) d(n) for every n
    bool squares_to_zero() const;
    long cohomology(int n) const;
    long euler() const;
};

// delta g in degree |g|; d(delta g) = d_dR(dg) evaluated at p.
// With classical = false the point is not checked (diagnostics only).
PointwiseComplex cotangent_at(const Cdga& c, const ClassicalPoint& p, bool classical = true);
// D(g) in degree -|g|; the differential is the linearized action of d on
// vector fields at p, which is the transpose of the cotangent differential
// with sign -(-1)^{|g|}.
PointwiseComplex tangent_at(const Cdga& c, const ClassicalPoint& p, bool classical = true);

// Degreewise maps f.at(n): src^n -> tgt^n.
struct PointwiseMap {
    PointwiseComplex src, tgt;
    std::map<int, QMatrix> f;
    QMatrix at(int n) const;
    // f d - d f per degree
    bool is_chain_map() const;
};

PointwiseComplex mapping_cone(const PointwiseMap& m);
// Quasi-isomorphism by acyclicity of the cone.
bool quasi_iso_by_cone(const PointwiseMap& m);
// Quasi-isomorphism by comparing cohomology and the rank of the induced map.
bool quasi_iso_by_cohomology(const PointwiseMap& m);

struct NondegeneracyReport {
    bool nondegenerate = false;
    bool chain_map = false;
    bool complexes = false;  // source and target square to zero
    std::map<int, long> cone_cohomology;
    std::vector<std::string> lines;
    std::map<int, QMatrix> b_matrices;  // level i -> specialized pairing block
    // odd k: the self-paired middle degree, "symmetric" for k = 3 mod 4 and
    // "antisymmetric" for k = 1 mod 4
    QMatrix middle;
    std::string middle_kind;
};

// Contraction of omega0 as a map T_A -> L_A[k].
// classical = false skips point validation (diagnostic points off the
// classical locus); the report then also records whether the complexes square
// to zero there.
PointwiseMap symplectic_map_at(const DarbouxInstance& inst, const ClassicalPoint& p, bool classical = true);
NondegeneracyReport symplectic_nondegenerate_at(const DarbouxInstance& inst, const ClassicalPoint& p,
                                                bool classical = true);

// chi: T_{B/A} -> L_B[k-1], with T_{B/A} the fibre of T_B -> alpha^* T_A.
// h0 and omega0 are passed separately so that corrupted data can be checked.
struct LagrangianPointData {
    const Cdga* A;
    const Cdga* B;
    const Morphism* alpha;
    int k;
    Element omega0, h0;
};

PointwiseMap lagrangian_map_at(const LagrangianPointData& data, const ClassicalPoint& p, bool classical = true);
NondegeneracyReport lagrangian_nondegenerate_at(const LagrangianPointData& data, const ClassicalPoint& p,
                                                bool classical = true);
NondegeneracyReport lagrangian_nondegenerate_at(const LagrangianInstance& inst, const ClassicalPoint& p,
                                                bool classical = true);
NondegeneracyReport lagrangian_nondegenerate_at(const DarbouxInstance& base, const RawLagrangian& raw,
                                                const ClassicalPoint& p, bool classical = true);

}  // namespace ssw
