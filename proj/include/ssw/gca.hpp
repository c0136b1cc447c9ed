#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "ssw/scalar.hpp"

namespace ssw {

enum class GenKind : std::uint8_t { Ring, Dr, Vec };

struct Generator {
    std::string name;
    int degree = 0;       // internal cohomological degree
    int form_degree = 0;  // 1 for d(g) symbols
    int vec_weight = 0;   // 1 for D(g) symbols
    int parity = 0;       // Koszul parity
    bool invertible = false;
    GenKind kind = GenKind::Ring;
    int base = -1;  // ring generator behind a d(g) / D(g) symbol
    int dr = -1;    // index of d(g) for a ring generator
    int vec = -1;   // index of D(g) for a ring generator
};

struct RingGenSpec {
    std::string name;
    int degree = 0;
    bool invertible = false;
};

// Immutable generator table. Every ring generator g comes with the de Rham
// symbol d(g) and the vector symbol D(g). Indices follow lexicographic order
// of names, which is the canonical factor order in monomials.
//
// D(g) carries degree -|g| and parity (|g| + shift + 1) mod 2.
class Table {
public:
    static std::shared_ptr<const Table> make(const std::vector<RingGenSpec>& ring, int shift,
                                             const std::string& field = "Q");

    std::size_t size() const { return gens_.size(); }
    const Generator& operator[](std::size_t i) const { return gens_[i]; }
    const std::vector<Generator>& gens() const { return gens_; }
    std::optional<int> find(const std::string& name) const;
    int index(const std::string& name) const;  // throws UnknownGenerator
    int shift() const { return shift_; }
    const std::string& field() const { return field_; }
    bool gaussian() const { return field_ == "Q(i)"; }
    const std::vector<RingGenSpec>& ring_specs() const { return ring_; }
    std::vector<int> ring_indices() const;

private:
    std::vector<Generator> gens_;
    std::unordered_map<std::string, int> by_name_;
    std::vector<RingGenSpec> ring_;
    int shift_ = 0;
    std::string field_ = "Q";
};

using TablePtr = std::shared_ptr<const Table>;

struct Factor {
    std::uint32_t var;
    std::int32_t exp;
    friend bool operator==(const Factor&, const Factor&) = default;
};

// Sorted by var; exponents never zero; odd factors have exponent 1.
using Monomial = std::vector<Factor>;

struct MonomialLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

class Element {
public:
    using Terms = std::map<Monomial, Scalar, MonomialLess>;

    Element() = default;
    explicit Element(TablePtr t) : table_(std::move(t)) {}
    Element(TablePtr t, const Scalar& c);
    static Element generator(TablePtr t, int idx, int exp = 1);
    static Element generator(TablePtr t, const std::string& name, int exp = 1);

    const TablePtr& table() const { return table_; }
    const Terms& terms() const { return terms_; }
    bool is_zero() const { return terms_.empty(); }
    std::size_t size() const { return terms_.size(); }
    bool is_constant() const;
    Scalar constant_term() const;

    void add_term(const Monomial& m, const Scalar& c);

    Element& operator+=(const Element& o);
    Element& operator-=(const Element& o);
    Element& operator*=(const Scalar& c);
    Element operator-() const;
    friend Element operator+(Element a, const Element& b) { return a += b; }
    friend Element operator-(Element a, const Element& b) { return a -= b; }
    friend Element operator*(Element a, const Scalar& c) { return a *= c; }
    friend Element operator*(const Scalar& c, Element a) { return a *= c; }
    friend Element operator*(const Element& a, const Element& b);
    friend bool operator==(const Element& a, const Element& b);
    friend bool operator!=(const Element& a, const Element& b) { return !(a == b); }

    // Homogeneity data; nullopt when terms disagree (or element is zero).
    std::optional<int> degree() const;
    std::optional<int> form_degree() const;
    std::optional<int> vec_weight() const;
    std::optional<int> parity() const;

    // True when every monomial avoids the listed generator indices.
    bool free_of(const std::vector<int>& idx) const;
    bool involves(int idx) const;

    // Highest exponent of generator idx over all terms.
    int max_exp(int idx) const;
    int total_poly_degree() const;  // max sum of |exp| over terms

    Element pow(long e) const;
    bool is_unit() const;
    Element unit_inverse() const;  // throws NotAUnit

    std::string str() const;

private:
    TablePtr table_;
    Terms terms_;
};

int monomial_parity(const Table& t, const Monomial& m);
int monomial_degree(const Table& t, const Monomial& m);

// Product of monomials with Koszul sign; nullopt when an odd factor repeats.
std::optional<std::pair<int, Monomial>> mono_mul(const Table& t, const Monomial& a,
                                                 const Monomial& b);

void require_same_table(const Element& a, const Element& b);

// Left graded partial derivative.
Element differentiate(const Element& a, int g);
Element differentiate(const Element& a, const std::string& g);

// Derivation (of any parity) defined on generators; image(idx) returns
// nullptr for generators sent to zero. D(a) = sum_g D(g) * dL a / dg.
using GenImage = std::function<const Element*(int)>;
Element apply_derivation(const Element& a, const GenImage& image);

// Graded algebra morphism given by images of the generators occurring in a.
// Generators with no image map to themselves by name in the target table.
Element apply_morphism(const Element& a, const GenImage& image, const TablePtr& target);

// Substitute scalars for degree-0 ring generators.
Element evaluate(const Element& a, const std::map<std::string, Scalar>& point);
Element evaluate(const Element& a, const std::unordered_map<int, Scalar>& point);

// Re-express an element in another table by generator name.
Element transport(const Element& a, const TablePtr& target);

// Coefficient extraction: the part of a that is linear in generator g
// (stripped from the left) and the part free of g.
Element coefficient_free_of(const Element& a, const std::vector<int>& gens);

}  // namespace ssw
