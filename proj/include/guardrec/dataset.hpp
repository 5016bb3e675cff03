#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/SparseCore>

#include "guardrec/common.hpp"

namespace guardrec {

// Bijection between opaque string ids and dense indices in [0, size).
// Indices are assigned in first-appearance order.
class IdIndex {
public:
    Index add(const std::string& id);
    std::optional<Index> find(const std::string& id) const;
    const std::string& id(Index i) const { return ids_.at(static_cast<std::size_t>(i)); }
    Index size() const { return static_cast<Index>(ids_.size()); }
    bool empty() const { return ids_.empty(); }
    const std::vector<std::string>& ids() const { return ids_; }
    bool operator==(const IdIndex& other) const { return ids_ == other.ids_; }

private:
    std::vector<std::string> ids_;
    std::unordered_map<std::string, Index> lookup_;
};

struct InteractionTriplet {
    Index guardian = 0;
    Index url = 0;
    std::int64_t ts = kNoTimestamp;
    static constexpr std::int64_t kNoTimestamp = INT64_MIN;
};

// Sparse binary guardian x URL matrix X. The observation mask shares X's
// support, so only the support is stored (CSR, rows sorted). Immutable after
// construction.
class InteractionMatrix {
public:
    InteractionMatrix() = default;
    // Duplicates collapse to a single entry keeping the first timestamp seen.
    InteractionMatrix(Index n_guardians, Index n_urls, std::vector<InteractionTriplet> triplets,
                      IdIndex guardians = {}, IdIndex urls = {});

    Index n_guardians() const { return n_guardians_; }
    Index n_urls() const { return n_urls_; }
    std::size_t nnz() const { return cols_.size(); }

    // Sorted URL indices of one guardian row.
    std::span<const Index> row(Index guardian) const;
    std::span<const std::int64_t> row_timestamps(Index guardian) const;
    bool contains(Index guardian, Index url) const;

    const IdIndex& guardian_ids() const { return guardian_ids_; }
    const IdIndex& url_ids() const { return url_ids_; }
    bool has_timestamps() const { return has_timestamps_; }

    Eigen::SparseMatrix<double> to_sparse() const;
    std::vector<InteractionTriplet> triplets() const;

    bool operator==(const InteractionMatrix& other) const;

private:
    Index n_guardians_ = 0;
    Index n_urls_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<Index> cols_;
    std::vector<std::int64_t> ts_;
    bool has_timestamps_ = false;
    IdIndex guardian_ids_;
    IdIndex url_ids_;
};

// Symmetric binary adjacency over guardians, zero diagonal.
class SocialGraph {
public:
    SocialGraph() = default;
    // Edges are undirected pairs; self-edges and duplicates are dropped.
    SocialGraph(Index n, std::vector<std::pair<Index, Index>> edges);

    Index size() const { return n_; }
    std::size_t n_edges() const { return edge_count_; }  // undirected
    std::span<const Index> neighbors(Index i) const;
    double offdiag_density() const;
    Eigen::SparseMatrix<double> to_sparse() const;  // symmetric, both triangles

    bool operator==(const SocialGraph& other) const;

private:
    Index n_ = 0;
    std::size_t edge_count_ = 0;
    std::vector<std::size_t> row_ptr_;
    std::vector<Index> cols_;  // symmetric: j in row i  <=>  i in row j
};

struct SplitTriple {
    InteractionMatrix train;
    InteractionMatrix validation;
    InteractionMatrix test;
    std::uint64_t seed = 0;
};

struct Document {
    std::string id;
    std::string text;
};

struct SyntheticBundle {
    InteractionMatrix interactions;
    SocialGraph social;
    std::vector<Document> guardian_docs;
    std::vector<Document> url_docs;
    std::vector<int> guardian_block;  // per guardian index
    std::vector<int> url_block;       // per url index
    // Expected within-block share of interactions given the sampling rates.
    double planted_within_fraction = 0.0;
    double empirical_within_fraction = 0.0;
};

enum class InteractionFormat { tsv, jsonl };

InteractionMatrix load_interactions(const std::string& path, InteractionFormat format);
void save_interactions(const InteractionMatrix& m, const std::string& path, InteractionFormat format);

// Keeps guardians with >= min_distinct distinct URLs, drops URLs left with no
// interactions, re-indexes both dimensions densely preserving relative order.
InteractionMatrix filter_min_urls(const InteractionMatrix& m, Index min_distinct);

struct SplitRatios {
    double train = 0.70;
    double validation = 0.10;
    double test = 0.20;
};

// Per guardian: train = max(1, round(r_train * n)), test = max(1, round(r_test * n)),
// validation = remainder (may be 0). Requires every guardian to have >= 3 entries.
SplitTriple split_per_guardian(const InteractionMatrix& m, const SplitRatios& ratios,
                               std::uint64_t seed);

struct SocialLoadResult {
    SocialGraph graph;
    std::size_t skipped_unknown = 0;
    std::size_t dropped_self = 0;
};

SocialLoadResult load_social_edges(const std::string& path, const IdIndex& guardians);
void save_social_edges(const SocialGraph& g, const IdIndex& guardians, const std::string& path);

struct SyntheticConfig {
    Index n_guardians = 200;
    Index n_urls = 100;
    int n_blocks = 2;
    double in_block_rate = 0.80;
    double cross_block_rate = 0.01;
    double social_in_rate = 0.20;
    double social_cross_rate = 0.01;
    int doc_tokens = 40;
    int block_vocab = 30;
    int shared_vocab = 10;
    int max_row_retries = 100;
};

SyntheticBundle generate_synthetic(const SyntheticConfig& cfg, std::uint64_t seed);

std::vector<Document> load_documents(const std::string& path);  // docs.jsonl
void save_documents(const std::vector<Document>& docs, const std::string& path);

}  // namespace guardrec
