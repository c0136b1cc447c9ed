#include "ssw/cdga.hpp"

#include "ssw/derham.hpp"
#include "ssw/error.hpp"

namespace ssw {

namespace {
int mod4(int k) { return ((k % 4) + 4) % 4; }
}  // namespace

Cdga::Cdga(TablePtr t, const std::map<std::string, Element>& diff, bool nonpositive)
    : table_(std::move(t)), images_(table_->size()), nonpositive_(nonpositive) {
    const Table& tab = *table_;
    for (const auto& [name, img] : diff) {
        int idx = tab.index(name);
        const auto& g = tab[idx];
        if (g.kind != GenKind::Ring) throw Error("BadDifferential", "'" + name + "' is not a ring generator");
        if (nonpositive && g.degree > 0)
            throw Error("DegreeMismatch", "generator '" + name + "' has positive degree");
        if (img.is_zero()) continue;
        if (img.table() != table_) throw Error("MismatchedTables", "differential image of '" + name + "'");
        auto deg = img.degree();
        if (!deg || *deg != g.degree + 1 || img.form_degree().value_or(1) != 0 ||
            img.vec_weight().value_or(1) != 0)
            throw Error("DegreeMismatch", "d(" + name + ") = " + img.str() + " is not of degree " +
                                              std::to_string(g.degree + 1));
        images_[idx] = img;
    }
    if (nonpositive) {
        for (std::size_t i = 0; i < tab.size(); ++i)
            if (tab[i].kind == GenKind::Ring && tab[i].degree > 0)
                throw Error("DegreeMismatch", "generator '" + tab[i].name + "' has positive degree");
    }
    // d(d(g)) = -d_dR(dg)
    for (std::size_t i = 0; i < tab.size(); ++i) {
        if (tab[i].kind != GenKind::Ring || !images_[i]) continue;
        Element v = -de_rham(*images_[i]);
        if (!v.is_zero()) images_[tab[i].dr] = v;
    }
    // d(D(h)) = -(-1)^{|h|} sum_g (dL(dg)/dh) D(g)
    for (std::size_t h = 0; h < tab.size(); ++h) {
        if (tab[h].kind != GenKind::Ring) continue;
        Element acc(table_);
        for (std::size_t g = 0; g < tab.size(); ++g) {
            if (tab[g].kind != GenKind::Ring || !images_[g]) continue;
            Element p = differentiate(*images_[g], (int)h);
            if (!p.is_zero()) acc += p * Element::generator(table_, tab[g].vec);
        }
        if (tab[h].parity == 0) acc = -acc;
        if (!acc.is_zero()) images_[tab[h].vec] = acc;
    }
}

Element Cdga::d(const Element& a) const {
    if (a.is_zero()) return Element(table_);
    if (a.table() != table_) throw Error("MismatchedTables", "element is not over this cdga");
    return apply_derivation(a, [this](int i) { return d_gen(i); });
}

ResidualList Cdga::check_square_zero() const {
    ResidualList out;
    const Table& tab = *table_;
    for (std::size_t i = 0; i < tab.size(); ++i) {
        if (tab[i].kind != GenKind::Ring) continue;
        Element r = images_[i] ? d(*images_[i]) : Element(table_);
        out.push_back({tab[i].name, r});
    }
    return out;
}

std::map<int, int> Cdga::dims() const {
    std::map<int, int> m;
    for (const auto& g : table_->gens())
        if (g.kind == GenKind::Ring) m[g.degree]++;
    return m;
}

long Cdga::vdim() const {
    long v = 0;
    for (const auto& [deg, n] : dims()) v += (deg % 2 == 0) ? n : -n;
    return v;
}

Morphism::Morphism(TablePtr source, TablePtr target, const std::map<std::string, Element>& images)
    : source_(std::move(source)), target_(std::move(target)), images_(source_->size()) {
    const Table& s = *source_;
    for (const auto& [name, img] : images) {
        int idx = s.index(name);
        if (s[idx].kind != GenKind::Ring) throw Error("BadMorphism", "'" + name + "' is not a ring generator");
        Element v = img.is_zero() ? Element(target_) : img;
        if (v.table() != target_) throw Error("MismatchedTables", "image of '" + name + "'");
        if (!v.is_zero()) {
            auto deg = v.degree();
            if (!deg || *deg != s[idx].degree)
                throw Error("DegreeMismatch", "image of '" + name + "' = " + v.str() + " has wrong degree");
        }
        if (s[idx].invertible && !v.is_unit())
            throw Error("NotAUnit", "image of invertible '" + name + "' must be a unit");
        ring_images_[name] = v;
    }
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].kind != GenKind::Ring) continue;
        auto it = ring_images_.find(s[i].name);
        if (it == ring_images_.end()) {
            auto tidx = target_->find(s[i].name);
            if (!tidx) throw Error("BadMorphism", "no image for '" + s[i].name + "'");
            ring_images_[s[i].name] = Element::generator(target_, *tidx);
            it = ring_images_.find(s[i].name);
        }
        images_[i] = it->second;
        images_[s[i].dr] = de_rham(it->second);
        if (images_[s[i].dr]->is_zero()) images_[s[i].dr] = Element(target_);
    }
}

Element Morphism::apply(const Element& a) const {
    if (a.is_zero()) return Element(target_);
    if (a.table() != source_) throw Error("MismatchedTables", "element is not over the morphism source");
    for (const auto& [m, c] : a.terms())
        for (const auto& f : m)
            if ((*source_)[f.var].kind == GenKind::Vec)
                throw Error("BadMorphism", "cannot push vector symbols forward");
    return apply_morphism(a, [this](int i) { return image(i); }, target_);
}

Element Morphism::image(const std::string& gen) const { return ring_images_.at(gen); }

Morphism Morphism::with_image(const std::string& gen, const Element& img) const {
    auto m = ring_images_;
    m[gen] = img;
    return Morphism(source_, target_, m);
}

ResidualList check_morphism(const Morphism& f, const Cdga& source, const Differential& d_target) {
    ResidualList out;
    const Table& s = *f.source();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i].kind != GenKind::Ring) continue;
        Element lhs = d_target(*f.image((int)i));
        const Element* dg = source.d_gen((int)i);
        Element rhs = dg ? f.apply(*dg) : Element(f.target());
        out.push_back({s[i].name, lhs - rhs});
    }
    return out;
}

Morphism identity_morphism(const TablePtr& t) { return Morphism(t, t, {}); }

Cdga homotopy_algebra(const Cdga& base) {
    auto specs = base.table()->ring_specs();
    specs.push_back({"s", 0, false});
    specs.push_back({"t", 1, false});
    auto t = Table::make(specs, base.table()->shift(), base.table()->field());
    std::map<std::string, Element> diff;
    for (const auto& g : base.table()->gens()) {
        if (g.kind != GenKind::Ring) continue;
        if (const Element* img = base.d_gen(base.table()->index(g.name)))
            diff[g.name] = transport(*img, t);
    }
    diff["s"] = Element::generator(t, "t");
    return Cdga(t, diff, false);
}

Morphism restrict_homotopy(const Cdga& homotopy, const TablePtr& base, const Scalar& s_value) {
    std::map<std::string, Element> img;
    img["s"] = Element(base, s_value);
    img["t"] = Element(base);
    return Morphism(homotopy.table(), base, img);
}

ParityVerdict vdim_parity_check(int k, Role role, long vdim_x, long vdim_l) {
    ParityVerdict v;
    int r = mod4(k);
    if (role == Role::Symplectic) {
        switch (r) {
            case 0: v.rule = "k = 0 mod 4: vdim even"; v.ok = vdim_x % 2 == 0; break;
            case 1: v.rule = "k = 1 mod 4: vdim = 0"; v.ok = vdim_x == 0; break;
            case 2: v.rule = "k = 2 mod 4: any vdim"; v.ok = true; break;
            default: v.rule = "k = 3 mod 4: vdim = 0"; v.ok = vdim_x == 0; break;
        }
        return v;
    }
    switch (r) {
        case 0:
            v.rule = "k = 0 mod 4: vdim L = vdim X / 2";
            v.ok = 2 * vdim_l == vdim_x;
            break;
        case 1:
            v.rule = "k = 1 mod 4: vdim L even";
            v.ok = vdim_l % 2 == 0;
            break;
        case 2:
            v.rule = "k = 2 mod 4: vdim X even and vdim L = vdim X / 2";
            v.ok = vdim_x % 2 == 0 && 2 * vdim_l == vdim_x;
            break;
        default:
            v.rule = "k = 3 mod 4: any vdim L";
            v.ok = true;
            break;
    }
    return v;
}

}  // namespace ssw
