#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "ssw/gca.hpp"

namespace ssw {

struct Residual {
    std::string label;  // offending generator or identity
    Element value;
    bool ok() const { return value.is_zero(); }
};
using ResidualList = std::vector<Residual>;

inline bool all_zero(const ResidualList& r) {
    for (const auto& x : r)
        if (!x.ok()) return false;
    return true;
}

// Differential graded algebra on a generator table. d is stored on ring
// generators and extended as an odd derivation to the de Rham symbols
// (d(d(g)) := -d_dR(dg)) and to the vector symbols (the Hamiltonian lift of
// the vector field sum dg * D(g)).
class Cdga {
public:
    Cdga() = default;
    Cdga(TablePtr t, const std::map<std::string, Element>& diff, bool nonpositive = true);

    const TablePtr& table() const { return table_; }
    bool nonpositive() const { return nonpositive_; }
    const Element* d_gen(int idx) const {
        return images_[idx] ? &*images_[idx] : nullptr;
    }
    Element d(const Element& a) const;

    ResidualList check_square_zero() const;

    // Count of ring generators per degree.
    std::map<int, int> dims() const;
    long vdim() const;

private:
    TablePtr table_;
    std::vector<std::optional<Element>> images_;
    bool nonpositive_ = true;
};

using Differential = std::function<Element(const Element&)>;

// Morphism of graded algebras given on ring generators; de Rham symbols are
// sent to d_dR of the images, so the same object is the pushforward on forms.
class Morphism {
public:
    Morphism() = default;
    Morphism(TablePtr source, TablePtr target, const std::map<std::string, Element>& images);

    const TablePtr& source() const { return source_; }
    const TablePtr& target() const { return target_; }
    Element apply(const Element& a) const;
    Element image(const std::string& gen) const;
    const Element* image(int idx) const { return images_[idx] ? &*images_[idx] : nullptr; }
    Morphism with_image(const std::string& gen, const Element& img) const;

private:
    TablePtr source_, target_;
    std::vector<std::optional<Element>> images_;
    std::map<std::string, Element> ring_images_;
};

// d_target(f(g)) - f(d_source(g)) for every ring generator g of the source.
ResidualList check_morphism(const Morphism& f, const Cdga& source, const Differential& d_target);
inline ResidualList check_morphism(const Morphism& f, const Cdga& source, const Cdga& target) {
    return check_morphism(f, source, [&](const Element& a) { return target.d(a); });
}

Morphism identity_morphism(const TablePtr& t);

// B tensor Q[s,t] with s in degree 0, t in degree 1 and ds = t.
Cdga homotopy_algebra(const Cdga& base);
// Restriction B[s,t] -> B at t = 0 and s = value.
Morphism restrict_homotopy(const Cdga& homotopy, const TablePtr& base, const Scalar& s_value);

enum class Role { Symplectic, Lagrangian };

struct ParityVerdict {
    bool ok = true;
    std::string rule;
};

// Parity constraints on virtual dimensions by k mod 4. For the Lagrangian
// role, vdim_x is the ambient and vdim_l the Lagrangian.
ParityVerdict vdim_parity_check(int k, Role role, long vdim_x, long vdim_l = 0);

}  // namespace ssw
