#include "guardrec/cooccurrence.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <unordered_map>

namespace guardrec {

std::int64_t CountMatrix::at(Index i, Index j) const {
    if (i == j) return 0;
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(upper.begin(), upper.end(), std::make_pair(i, j),
                               [](const Entry& e, const std::pair<Index, Index>& key) {
                                   return e.i != key.first ? e.i < key.first : e.j < key.second;
                               });
    if (it != upper.end() && it->i == i && it->j == j) return it->count;
    return 0;
}

namespace {

// Pair counts over per-item index sets: every unordered pair inside one set
// contributes 1 to #(i,j).
CountMatrix count_pairs(Index dim, const std::vector<std::vector<Index>>& sets) {
    std::unordered_map<std::uint64_t, std::int64_t> counts;
    for (const auto& s : sets) {
        for (std::size_t a = 0; a < s.size(); ++a)
            for (std::size_t b = a + 1; b < s.size(); ++b) {
                Index i = s[a], j = s[b];
                if (i > j) std::swap(i, j);
                ++counts[(static_cast<std::uint64_t>(static_cast<std::uint32_t>(i)) << 32) |
                         static_cast<std::uint32_t>(j)];
            }
    }
    CountMatrix out;
    out.dim = dim;
    out.upper.reserve(counts.size());
    for (const auto& [key, c] : counts)
        out.upper.push_back({static_cast<Index>(key >> 32), static_cast<Index>(key & 0xffffffffu), c});
    std::sort(out.upper.begin(), out.upper.end(),
              [](const CountMatrix::Entry& a, const CountMatrix::Entry& b) {
                  return a.i != b.i ? a.i < b.i : a.j < b.j;
              });
    out.row_sums.assign(static_cast<std::size_t>(dim), 0);
    for (const auto& e : out.upper) {
        out.row_sums[static_cast<std::size_t>(e.i)] += e.count;
        out.row_sums[static_cast<std::size_t>(e.j)] += e.count;
    }
    for (auto v : out.row_sums) out.total += v;
    return out;
}

}  // namespace

CountMatrix url_cooccurrence_counts(const InteractionMatrix& x) {
    std::vector<std::vector<Index>> sets;
    sets.reserve(static_cast<std::size_t>(x.n_guardians()));
    for (Index g = 0; g < x.n_guardians(); ++g) {
        auto r = x.row(g);
        sets.emplace_back(r.begin(), r.end());
    }
    return count_pairs(x.n_urls(), sets);
}

CountMatrix guardian_cooccurrence_counts(const InteractionMatrix& x) {
    std::vector<std::vector<Index>> sets(static_cast<std::size_t>(x.n_urls()));
    for (Index g = 0; g < x.n_guardians(); ++g)
        for (Index u : x.row(g)) sets[static_cast<std::size_t>(u)].push_back(g);
    return count_pairs(x.n_guardians(), sets);
}

double SppmiMatrix::at(Index i, Index j) const {
    if (i == j) return 0.0;
    if (i > j) std::swap(i, j);
    auto it = std::lower_bound(upper.begin(), upper.end(), std::make_pair(i, j),
                               [](const Entry& e, const std::pair<Index, Index>& key) {
                                   return e.i != key.first ? e.i < key.first : e.j < key.second;
                               });
    if (it != upper.end() && it->i == i && it->j == j) return it->value;
    return 0.0;
}

Eigen::SparseMatrix<double> SppmiMatrix::to_sparse() const {
    Eigen::SparseMatrix<double> m(dim, dim);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(upper.size() * 2);
    for (const auto& e : upper) {
        trips.emplace_back(e.i, e.j, e.value);
        trips.emplace_back(e.j, e.i, e.value);
    }
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

Eigen::SparseMatrix<double> SppmiMatrix::mask_sparse() const {
    Eigen::SparseMatrix<double> m(dim, dim);
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(upper.size() * 2);
    for (const auto& e : upper) {
        trips.emplace_back(e.i, e.j, 1.0);
        trips.emplace_back(e.j, e.i, 1.0);
    }
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

SppmiMatrix sppmi(const CountMatrix& c, int shift) {
    if (shift < 1) throw Error("shift s must be >= 1");
    if (c.total <= 0) throw Error("no co-occurrence data (|D| = 0)");
    SppmiMatrix out;
    out.dim = c.dim;
    out.shift = shift;
    const double log_total = std::log(static_cast<double>(c.total));
    const double log_shift = std::log(static_cast<double>(shift));
    for (const auto& e : c.upper) {
        double pmi = std::log(static_cast<double>(e.count)) + log_total -
                     std::log(static_cast<double>(c.row_sums[static_cast<std::size_t>(e.i)])) -
                     std::log(static_cast<double>(c.row_sums[static_cast<std::size_t>(e.j)]));
        double v = pmi - log_shift;
        if (v > 0.0) out.upper.push_back({e.i, e.j, v});
    }
    return out;
}

void save_sppmi_tsv(const SppmiMatrix& m, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out.precision(17);
    for (const auto& e : m.upper) out << e.i << '\t' << e.j << '\t' << e.value << '\n';
}

SppmiMatrix load_sppmi_tsv(const std::string& path, Index dim, int shift) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    SppmiMatrix out;
    out.dim = dim;
    out.shift = shift;
    Index i, j;
    double v;
    while (in >> i >> j >> v) {
        if (i < 0 || j < 0 || i >= dim || j >= dim) throw Error(path + ": index out of range");
        if (i > j) std::swap(i, j);
        out.upper.push_back({i, j, v});
    }
    std::sort(out.upper.begin(), out.upper.end(), [](const auto& a, const auto& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return out;
}

}  // namespace guardrec
