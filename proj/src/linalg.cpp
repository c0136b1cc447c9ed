#include "ssw/linalg.hpp"

#include <algorithm>

namespace ssw {

namespace {

struct Echelon {
    int ncols;
    std::map<int, SparseRow> pivots;  // leading column -> row with leading entry 1

    // Reduces r against the pivots; returns false when r becomes 0 = nonzero.
    bool insert(SparseRow r) {
        auto it = r.begin();
        while (it != r.end() && it->first < ncols) {
            auto p = pivots.find(it->first);
            if (p == pivots.end()) {
                ++it;
                continue;
            }
            Scalar f = it->second;
            int col = it->first;
            for (const auto& [c, v] : p->second) {
                Scalar nv = r[c] - f * v;
                if (nv.is_zero()) r.erase(c);
                else r[c] = nv;
            }
            it = r.upper_bound(col);
        }
        auto lead = r.begin();
        if (lead == r.end()) return true;
        if (lead->first >= ncols) return false;
        Scalar inv = lead->second.inverse();
        for (auto& [c, v] : r) v *= inv;
        pivots.emplace(lead->first, std::move(r));
        return true;
    }
};

}  // namespace

std::optional<std::vector<Scalar>> solve_exact(const std::vector<SparseRow>& rows,
                                               const std::vector<Scalar>& rhs, int ncols) {
    Echelon e{ncols, {}};
    for (std::size_t i = 0; i < rows.size(); ++i) {
        SparseRow r = rows[i];
        if (i < rhs.size() && !rhs[i].is_zero()) r[ncols] = rhs[i];
        if (!e.insert(std::move(r))) return std::nullopt;
    }
    std::vector<Scalar> x(ncols);
    for (auto it = e.pivots.rbegin(); it != e.pivots.rend(); ++it) {
        Scalar v;
        for (const auto& [c, a] : it->second) {
            if (c == it->first) continue;
            if (c == ncols) v += a;
            else v -= a * x[c];
        }
        x[it->first] = v;
    }
    return x;
}

std::size_t rank_exact(const std::vector<SparseRow>& rows) {
    int ncols = 0;
    for (const auto& r : rows)
        if (!r.empty()) ncols = std::max(ncols, r.rbegin()->first + 1);
    Echelon e{ncols, {}};
    for (const auto& r : rows) e.insert(r);
    return e.pivots.size();
}

std::vector<std::vector<Scalar>> nullspace(const std::vector<SparseRow>& rows, int ncols) {
    Echelon e{ncols, {}};
    for (const auto& r : rows) e.insert(r);
    std::vector<std::vector<Scalar>> basis;
    for (int f = 0; f < ncols; ++f) {
        if (e.pivots.count(f)) continue;
        std::vector<Scalar> x(ncols);
        x[f] = Scalar(1);
        for (auto it = e.pivots.rbegin(); it != e.pivots.rend(); ++it) {
            Scalar v;
            for (const auto& [c, a] : it->second)
                if (c != it->first) v -= a * x[c];
            x[it->first] = v;
        }
        basis.push_back(std::move(x));
    }
    return basis;
}

}  // namespace ssw
