#pragma once

#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include "guardrec/dataset.hpp"

namespace guardrec {

// Sparse nonnegative document vectors, unit L2 norm (or exactly zero for an
// empty document). Stands in for externally trained embeddings.
struct DocVectors {
    std::vector<std::string> ids;  // aligned with vectors
    // each vector: (dimension, weight) pairs sorted by dimension
    std::vector<std::vector<std::pair<Index, double>>> vectors;
    Index dim = 0;
    std::vector<std::string> vocabulary;  // present for tf-idf vectors

    std::size_t size() const { return vectors.size(); }
};

// tf-idf with tf = raw count and idf = ln(n_docs / df); vocabulary is the top
// vocab_size terms by document frequency (ties broken lexicographically).
DocVectors tfidf_vectors(const std::vector<Document>& corpus, int vocab_size);

// TSV rows `id<TAB>f1<TAB>...<TAB>fD`; vectors are L2-normalized on load.
DocVectors load_precomputed_vectors(const std::string& path);

// Reorders vectors to match the given index space; ids absent from the space
// are skipped (counted), indices without a vector get the zero vector.
DocVectors align_to_index(const DocVectors& v, const IdIndex& space,
                          std::size_t* skipped = nullptr);

// Symmetric similarity matrix with zero diagonal plus its degree vector and
// graph Laplacian L = D - sim.
struct SimilarityBundle {
    Eigen::SparseMatrix<double> sim;
    Eigen::VectorXd degree;
    Eigen::SparseMatrix<double> laplacian;

    Index size() const { return static_cast<Index>(sim.rows()); }
};

// Pairwise cosine sparsified to each row's top_k largest entries (union
// symmetrization); negatives clamped to zero before sparsification.
SimilarityBundle cosine_similarity_matrix(const DocVectors& v, int top_k);

// Builds the bundle from an explicit symmetric similarity matrix (diagonal is
// discarded). Used when reloading exported matrices.
SimilarityBundle bundle_from_similarity(const Eigen::SparseMatrix<double>& sim);

void save_similarity_tsv(const SimilarityBundle& b, const std::string& path);
SimilarityBundle load_similarity_tsv(const std::string& path, Index dim);

}  // namespace guardrec
