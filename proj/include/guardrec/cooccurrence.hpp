#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/SparseCore>

#include "guardrec/dataset.hpp"

namespace guardrec {

// Symmetric co-occurrence counts #(i,j) with zero diagonal. Only the upper
// triangle (i < j) is materialized; the mirror is implied.
struct CountMatrix {
    Index dim = 0;
    struct Entry {
        Index i, j;  // i < j
        std::int64_t count;
    };
    std::vector<Entry> upper;             // sorted by (i, j)
    std::vector<std::int64_t> row_sums;   // #(i) = sum_j #(i,j)
    std::int64_t total = 0;               // |D| = sum_i #(i)

    std::int64_t at(Index i, Index j) const;
};

// #(i,j) = number of guardians that posted both URL i and URL j.
CountMatrix url_cooccurrence_counts(const InteractionMatrix& x);
// #(i,j) = number of URLs posted by both guardian i and guardian j.
CountMatrix guardian_cooccurrence_counts(const InteractionMatrix& x);

// Shifted positive PMI: value(i,j) = max(ln(#(i,j)|D| / (#(i)#(j))) - ln(s), 0),
// stored only where strictly positive. The mask has the same support.
struct SppmiMatrix {
    Index dim = 0;
    int shift = 1;
    struct Entry {
        Index i, j;  // i < j
        double value;
    };
    std::vector<Entry> upper;  // sorted by (i, j)

    std::size_t support_size() const { return 2 * upper.size(); }
    double at(Index i, Index j) const;
    Eigen::SparseMatrix<double> to_sparse() const;   // symmetric, both triangles
    Eigen::SparseMatrix<double> mask_sparse() const;
};

SppmiMatrix sppmi(const CountMatrix& c, int shift);

void save_sppmi_tsv(const SppmiMatrix& m, const std::string& path);
SppmiMatrix load_sppmi_tsv(const std::string& path, Index dim, int shift);

}  // namespace guardrec
