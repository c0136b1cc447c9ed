#include "ssw/gca.hpp"

#include <algorithm>
#include <cctype>

#include "ssw/error.hpp"

namespace ssw {

namespace {

bool is_identifier(const std::string& s) {
    if (s.empty() || !(std::isalpha((unsigned char)s[0]) || s[0] == '_')) return false;
    return std::all_of(s.begin(), s.end(),
                       [](char c) { return std::isalnum((unsigned char)c) || c == '_'; });
}

int mod2(int v) { return ((v % 2) + 2) % 2; }

}  // namespace

std::shared_ptr<const Table> Table::make(const std::vector<RingGenSpec>& ring, int shift,
                                         const std::string& field) {
    if (field != "Q" && field != "Q(i)") throw Error("BadField", "field must be Q or Q(i)");
    auto t = std::make_shared<Table>();
    t->ring_ = ring;
    t->shift_ = shift;
    t->field_ = field;
    std::vector<Generator> g;
    for (const auto& r : ring) {
        if (!is_identifier(r.name)) throw Error("BadName", "'" + r.name + "' is not an identifier");
        if (r.name == "d" || r.name == "D" || (field == "Q(i)" && r.name == "i"))
            throw Error("BadName", "'" + r.name + "' is reserved");
        if (r.invertible && r.degree != 0)
            throw Error("BadGenerator", "invertible generator '" + r.name + "' must have degree 0");
        Generator ring_g;
        ring_g.name = r.name;
        ring_g.degree = r.degree;
        ring_g.parity = mod2(r.degree);
        ring_g.invertible = r.invertible;
        ring_g.kind = GenKind::Ring;
        Generator dr;
        dr.name = "d(" + r.name + ")";
        dr.degree = r.degree;
        dr.form_degree = 1;
        dr.parity = mod2(r.degree + 1);
        dr.kind = GenKind::Dr;
        Generator vec;
        vec.name = "D(" + r.name + ")";
        vec.degree = -r.degree;
        vec.vec_weight = 1;
        vec.parity = mod2(r.degree + shift + 1);
        vec.kind = GenKind::Vec;
        g.push_back(ring_g);
        g.push_back(dr);
        g.push_back(vec);
    }
    std::sort(g.begin(), g.end(), [](const Generator& a, const Generator& b) { return a.name < b.name; });
    for (std::size_t i = 0; i < g.size(); ++i) {
        if (!t->by_name_.emplace(g[i].name, (int)i).second)
            throw Error("BadName", "duplicate generator '" + g[i].name + "'");
    }
    for (auto& x : g) {
        if (x.kind == GenKind::Ring) {
            x.dr = t->by_name_.at("d(" + x.name + ")");
            x.vec = t->by_name_.at("D(" + x.name + ")");
        } else {
            x.base = t->by_name_.at(x.name.substr(2, x.name.size() - 3));
        }
    }
    t->gens_ = std::move(g);
    return t;
}

std::optional<int> Table::find(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

int Table::index(const std::string& name) const {
    auto r = find(name);
    if (!r) throw Error("UnknownGenerator", "no generator named '" + name + "'");
    return *r;
}

std::vector<int> Table::ring_indices() const {
    std::vector<int> r;
    for (std::size_t i = 0; i < gens_.size(); ++i)
        if (gens_[i].kind == GenKind::Ring) r.push_back((int)i);
    return r;
}

bool MonomialLess::operator()(const Monomial& a, const Monomial& b) const {
    long da = 0, db = 0;
    for (const auto& f : a) da += std::abs(f.exp);
    for (const auto& f : b) db += std::abs(f.exp);
    if (da != db) return da > db;
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                        [](const Factor& x, const Factor& y) {
                                            if (x.var != y.var) return x.var < y.var;
                                            return x.exp > y.exp;
                                        });
}

int monomial_parity(const Table& t, const Monomial& m) {
    int p = 0;
    for (const auto& f : m) p ^= (t[f.var].parity & (f.exp & 1));
    return p;
}

int monomial_degree(const Table& t, const Monomial& m) {
    int d = 0;
    for (const auto& f : m) d += t[f.var].degree * f.exp;
    return d;
}

std::optional<std::pair<int, Monomial>> mono_mul(const Table& t, const Monomial& a,
                                                 const Monomial& b) {
    Monomial out;
    out.reserve(a.size() + b.size());
    int odd_a = 0;
    for (const auto& f : a) odd_a += t[f.var].parity;
    int sign = 0;
    std::size_t i = 0, j = 0;
    while (i < a.size() || j < b.size()) {
        if (j == b.size() || (i < a.size() && a[i].var < b[j].var)) {
            odd_a -= t[a[i].var].parity;
            out.push_back(a[i++]);
        } else if (i == a.size() || b[j].var < a[i].var) {
            if (t[b[j].var].parity) sign ^= (odd_a & 1);
            out.push_back(b[j++]);
        } else {
            if (t[a[i].var].parity) return std::nullopt;
            int e = a[i].exp + b[j].exp;
            if (e != 0) out.push_back({a[i].var, e});
            ++i;
            ++j;
        }
    }
    return std::make_pair(sign, std::move(out));
}

void require_same_table(const Element& a, const Element& b) {
    if (a.table() && b.table() && a.table() != b.table())
        throw Error("MismatchedTables", "elements live over different generator tables");
}

Element::Element(TablePtr t, const Scalar& c) : table_(std::move(t)) {
    if (!c.is_zero()) terms_.emplace(Monomial{}, c);
}

Element Element::generator(TablePtr t, int idx, int exp) {
    const auto& g = (*t)[idx];
    if (exp < 0 && !g.invertible) throw Error("NegativePower", "'" + g.name + "' is not invertible");
    if (exp > 1 && g.parity) throw Error("OddPower", "'" + g.name + "' is odd");
    Element e(t);
    if (exp == 0)
        e.terms_.emplace(Monomial{}, Scalar(1));
    else
        e.terms_.emplace(Monomial{{(std::uint32_t)idx, exp}}, Scalar(1));
    return e;
}

Element Element::generator(TablePtr t, const std::string& name, int exp) {
    int idx = t->index(name);
    return generator(std::move(t), idx, exp);
}

bool Element::is_constant() const {
    return terms_.empty() || (terms_.size() == 1 && terms_.begin()->first.empty());
}

Scalar Element::constant_term() const {
    auto it = terms_.find(Monomial{});
    return it == terms_.end() ? Scalar(0) : it->second;
}

void Element::add_term(const Monomial& m, const Scalar& c) {
    if (c.is_zero()) return;
    auto [it, fresh] = terms_.emplace(m, c);
    if (!fresh) {
        it->second += c;
        if (it->second.is_zero()) terms_.erase(it);
    }
}

Element& Element::operator+=(const Element& o) {
    require_same_table(*this, o);
    if (!table_) table_ = o.table_;
    for (const auto& [m, c] : o.terms_) add_term(m, c);
    return *this;
}

Element& Element::operator-=(const Element& o) {
    require_same_table(*this, o);
    if (!table_) table_ = o.table_;
    for (const auto& [m, c] : o.terms_) add_term(m, -c);
    return *this;
}

Element& Element::operator*=(const Scalar& c) {
    if (c.is_zero()) {
        terms_.clear();
        return *this;
    }
    for (auto& [m, v] : terms_) v *= c;
    return *this;
}

Element Element::operator-() const {
    Element r(*this);
    for (auto& [m, v] : r.terms_) v = -v;
    return r;
}

Element operator*(const Element& a, const Element& b) {
    require_same_table(a, b);
    Element r(a.table_ ? a.table_ : b.table_);
    if (a.is_zero() || b.is_zero()) return r;
    const Table& t = *r.table_;
    for (const auto& [ma, ca] : a.terms_) {
        for (const auto& [mb, cb] : b.terms_) {
            auto p = mono_mul(t, ma, mb);
            if (!p) continue;
            Scalar c = ca * cb;
            if (p->first) c = -c;
            r.add_term(p->second, c);
        }
    }
    return r;
}

bool operator==(const Element& a, const Element& b) {
    if (a.is_zero() && b.is_zero()) return true;
    require_same_table(a, b);
    return a.terms_ == b.terms_;
}

namespace {
template <class F>
std::optional<int> uniform(const Element& e, F f) {
    std::optional<int> r;
    if (!e.table()) return r;
    for (const auto& [m, c] : e.terms()) {
        int v = f(*e.table(), m);
        if (r && *r != v) return std::nullopt;
        r = v;
    }
    return r;
}
}  // namespace

std::optional<int> Element::degree() const { return uniform(*this, monomial_degree); }

std::optional<int> Element::form_degree() const {
    return uniform(*this, [](const Table& t, const Monomial& m) {
        int s = 0;
        for (const auto& f : m) s += t[f.var].form_degree * f.exp;
        return s;
    });
}

std::optional<int> Element::vec_weight() const {
    return uniform(*this, [](const Table& t, const Monomial& m) {
        int s = 0;
        for (const auto& f : m) s += t[f.var].vec_weight * f.exp;
        return s;
    });
}

std::optional<int> Element::parity() const { return uniform(*this, monomial_parity); }

bool Element::free_of(const std::vector<int>& idx) const {
    for (const auto& [m, c] : terms_)
        for (const auto& f : m)
            if (std::find(idx.begin(), idx.end(), (int)f.var) != idx.end()) return false;
    return true;
}

bool Element::involves(int idx) const { return !free_of({idx}); }

int Element::max_exp(int idx) const {
    int r = 0;
    for (const auto& [m, c] : terms_)
        for (const auto& f : m)
            if ((int)f.var == idx) r = std::max(r, f.exp);
    return r;
}

int Element::total_poly_degree() const {
    int r = 0;
    for (const auto& [m, c] : terms_) {
        int s = 0;
        for (const auto& f : m) s += std::abs(f.exp);
        r = std::max(r, s);
    }
    return r;
}

Element Element::pow(long e) const {
    if (e < 0) return unit_inverse().pow(-e);
    Element r(table_, Scalar(1)), b(*this);
    while (e) {
        if (e & 1) r = r * b;
        e >>= 1;
        if (e) b = b * b;
    }
    return r;
}

bool Element::is_unit() const {
    if (terms_.size() != 1) return false;
    for (const auto& f : terms_.begin()->first)
        if (!(*table_)[f.var].invertible) return false;
    return true;
}

Element Element::unit_inverse() const {
    if (!is_unit()) throw Error("NotAUnit", "'" + str() + "' is not a unit");
    const auto& [m, c] = *terms_.begin();
    Monomial inv = m;
    for (auto& f : inv) f.exp = -f.exp;
    Element r(table_);
    r.terms_.emplace(std::move(inv), c.inverse());
    return r;
}

std::string Element::str() const {
    if (terms_.empty()) return "0";
    std::string out;
    bool first = true;
    for (const auto& [m, c] : terms_) {
        std::string term;
        if (m.empty()) {
            term = c.str();
        } else {
            if (c.is_one())
                term = "";
            else if (c == Scalar(-1))
                term = "-";
            else
                term = c.str() + "*";
            bool first_f = true;
            for (const auto& f : m) {
                if (!first_f) term += "*";
                first_f = false;
                term += (*table_)[f.var].name;
                if (f.exp != 1) term += "^" + std::to_string(f.exp);
            }
        }
        if (first)
            out = term;
        else if (term[0] == '-')
            out += " - " + term.substr(1);
        else
            out += " + " + term;
        first = false;
    }
    return out;
}

Element differentiate(const Element& a, int g) {
    Element r(a.table());
    if (!a.table()) return r;
    const Table& t = *a.table();
    for (const auto& [m, c] : a.terms()) {
        int prefix = 0;
        for (std::size_t k = 0; k < m.size(); ++k) {
            if ((int)m[k].var == g) {
                Monomial rest = m;
                if (--rest[k].exp == 0) rest.erase(rest.begin() + (long)k);
                Scalar v = c * Scalar(m[k].exp);
                if (t[g].parity && prefix) v = -v;
                r.add_term(rest, v);
                break;
            }
            prefix ^= (t[m[k].var].parity & (m[k].exp & 1));
        }
    }
    return r;
}

Element differentiate(const Element& a, const std::string& g) {
    if (!a.table()) return a;
    return differentiate(a, a.table()->index(g));
}

Element apply_derivation(const Element& a, const GenImage& image) {
    Element r(a.table());
    if (!a.table()) return r;
    const Table& t = *a.table();
    std::map<int, Element> partial;
    for (const auto& [m, c] : a.terms()) {
        int prefix = 0;
        for (std::size_t k = 0; k < m.size(); ++k) {
            int h = (int)m[k].var;
            if (image(h)) {
                Monomial rest = m;
                if (--rest[k].exp == 0) rest.erase(rest.begin() + (long)k);
                Scalar v = c * Scalar(m[k].exp);
                if (t[h].parity && prefix) v = -v;
                auto it = partial.try_emplace(h, a.table()).first;
                it->second.add_term(rest, v);
            }
            prefix ^= (t[h].parity & (m[k].exp & 1));
        }
    }
    for (const auto& [h, p] : partial) r += (*image(h)) * p;
    return r;
}

Element apply_morphism(const Element& a, const GenImage& image, const TablePtr& target) {
    Element r(target);
    if (!a.table()) return r;
    const Table& t = *a.table();
    std::map<std::pair<int, int>, Element> cache;
    auto power = [&](int v, int e) -> const Element& {
        auto key = std::make_pair(v, e);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        const Element* img = image(v);
        Element base = img ? *img : Element::generator(target, target->index(t[v].name));
        return cache.emplace(key, base.pow(e)).first->second;
    };
    for (const auto& [m, c] : a.terms()) {
        Element term(target, c);
        for (const auto& f : m) {
            term = term * power((int)f.var, f.exp);
            if (term.is_zero()) break;
        }
        r += term;
    }
    return r;
}

Element evaluate(const Element& a, const std::unordered_map<int, Scalar>& point) {
    Element r(a.table());
    if (!a.table()) return r;
    const Table& t = *a.table();
    for (const auto& [v, s] : point) {
        if (t[v].invertible && s.is_zero())
            throw Error("ZeroUnit", "invertible generator '" + t[v].name + "' evaluated at 0");
    }
    for (const auto& [m, c] : a.terms()) {
        Scalar v = c;
        Monomial rest;
        for (const auto& f : m) {
            auto it = point.find((int)f.var);
            if (it == point.end())
                rest.push_back(f);
            else
                v *= it->second.pow(f.exp);
        }
        r.add_term(rest, v);
    }
    return r;
}

Element evaluate(const Element& a, const std::map<std::string, Scalar>& point) {
    if (!a.table()) return a;
    std::unordered_map<int, Scalar> p;
    for (const auto& [name, s] : point) {
        int v = a.table()->index(name);
        const auto& g = (*a.table())[v];
        if (g.kind != GenKind::Ring || g.degree != 0)
            throw Error("BadPoint", "'" + name + "' is not a degree-0 ring generator");
        p.emplace(v, s);
    }
    return evaluate(a, p);
}

Element transport(const Element& a, const TablePtr& target) {
    if (a.table() == target) return a;
    Element r(target);
    if (!a.table()) return r;
    const Table& t = *a.table();
    std::vector<int> map(t.size(), -1);
    for (const auto& [m, c] : a.terms()) {
        Monomial out;
        for (const auto& f : m) {
            if (map[f.var] < 0) map[f.var] = target->index(t[f.var].name);
            out.push_back({(std::uint32_t)map[f.var], f.exp});
        }
        // Name order is shared by both tables, so the factor order is preserved.
        r.add_term(out, c);
    }
    return r;
}

Element coefficient_free_of(const Element& a, const std::vector<int>& gens) {
    Element r(a.table());
    for (const auto& [m, c] : a.terms()) {
        bool hit = false;
        for (const auto& f : m)
            if (std::find(gens.begin(), gens.end(), (int)f.var) != gens.end()) hit = true;
        if (!hit) r.add_term(m, c);
    }
    return r;
}

}  // namespace ssw
