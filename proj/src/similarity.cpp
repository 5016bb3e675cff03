#include "guardrec/similarity.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include "guardrec/text.hpp"

namespace guardrec {

DocVectors tfidf_vectors(const std::vector<Document>& corpus, int vocab_size) {
    if (corpus.empty()) throw Error("tfidf_vectors: empty corpus");
    if (vocab_size < 1) throw Error("tfidf_vectors: vocab_size must be >= 1");

    std::vector<std::vector<std::string>> tokenized;
    tokenized.reserve(corpus.size());
    std::map<std::string, Index> df;  // ordered so ties resolve lexicographically
    for (const auto& doc : corpus) {
        auto toks = tokenize(doc.text);
        std::vector<std::string> distinct(toks);
        std::sort(distinct.begin(), distinct.end());
        distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
        for (const auto& t : distinct) ++df[t];
        tokenized.push_back(std::move(toks));
    }
    if (df.empty()) throw Error("tfidf_vectors: corpus has no usable terms");

    // Vocabulary: top vocab_size terms by document frequency.
    std::vector<std::pair<std::string, Index>> terms(df.begin(), df.end());
    std::stable_sort(terms.begin(), terms.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    if (static_cast<int>(terms.size()) > vocab_size) terms.resize(static_cast<std::size_t>(vocab_size));

    DocVectors out;
    out.dim = static_cast<Index>(terms.size());
    std::unordered_map<std::string, Index> term_index;
    for (Index t = 0; t < out.dim; ++t) {
        out.vocabulary.push_back(terms[static_cast<std::size_t>(t)].first);
        term_index.emplace(terms[static_cast<std::size_t>(t)].first, t);
    }

    const double n_docs = static_cast<double>(corpus.size());
    for (std::size_t d = 0; d < corpus.size(); ++d) {
        std::unordered_map<Index, double> tf;
        for (const auto& tok : tokenized[d]) {
            auto it = term_index.find(tok);
            if (it != term_index.end()) tf[it->second] += 1.0;
        }
        std::vector<std::pair<Index, double>> vec;
        vec.reserve(tf.size());
        double norm_sq = 0.0;
        for (const auto& [t, count] : tf) {
            double idf = std::log(n_docs / static_cast<double>(df[out.vocabulary[static_cast<std::size_t>(t)]]));
            double w = count * idf;
            if (w > 0.0) {
                vec.emplace_back(t, w);
                norm_sq += w * w;
            }
        }
        std::sort(vec.begin(), vec.end());
        if (norm_sq > 0.0) {
            double inv = 1.0 / std::sqrt(norm_sq);
            for (auto& [t, w] : vec) w *= inv;
        }
        out.ids.push_back(corpus[d].id);
        out.vectors.push_back(std::move(vec));
    }
    return out;
}

DocVectors load_precomputed_vectors(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    DocVectors out;
    std::string line;
    std::size_t line_no = 0;
    Index dim = -1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string id;
        if (!std::getline(ss, id, '\t') || id.empty())
            throw ParseError(path, line_no, "missing id");
        std::vector<double> values;
        std::string field;
        while (std::getline(ss, field, '\t')) {
            try {
                std::size_t used = 0;
                values.push_back(std::stod(field, &used));
                if (used != field.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw ParseError(path, line_no, "bad float '" + field + "'");
            }
        }
        if (values.empty()) throw ParseError(path, line_no, "no vector components");
        if (dim < 0)
            dim = static_cast<Index>(values.size());
        else if (static_cast<Index>(values.size()) != dim)
            throw ParseError(path, line_no,
                             "dimension mismatch: got " + std::to_string(values.size()) +
                                 ", expected " + std::to_string(dim));
        double norm_sq = 0.0;
        for (double v : values) norm_sq += v * v;
        std::vector<std::pair<Index, double>> vec;
        if (norm_sq > 0.0) {
            double inv = 1.0 / std::sqrt(norm_sq);
            for (Index t = 0; t < dim; ++t) {
                double w = values[static_cast<std::size_t>(t)] * inv;
                if (w != 0.0) vec.emplace_back(t, w);
            }
        }
        out.ids.push_back(id);
        out.vectors.push_back(std::move(vec));
    }
    if (out.vectors.empty()) throw Error(path + ": no vectors");
    out.dim = dim;
    return out;
}

DocVectors align_to_index(const DocVectors& v, const IdIndex& space, std::size_t* skipped) {
    DocVectors out;
    out.dim = v.dim;
    out.vocabulary = v.vocabulary;
    out.ids.reserve(static_cast<std::size_t>(space.size()));
    out.vectors.assign(static_cast<std::size_t>(space.size()), {});
    for (Index i = 0; i < space.size(); ++i) out.ids.push_back(space.id(i));
    std::size_t n_skipped = 0;
    for (std::size_t d = 0; d < v.vectors.size(); ++d) {
        auto idx = space.find(v.ids[d]);
        if (!idx) {
            ++n_skipped;
            continue;
        }
        out.vectors[static_cast<std::size_t>(*idx)] = v.vectors[d];
    }
    if (skipped) *skipped = n_skipped;
    if (n_skipped > 0)
        log_info("align_to_index: skipped " + std::to_string(n_skipped) +
                 " vectors with ids outside the index space");
    return out;
}

SimilarityBundle bundle_from_similarity(const Eigen::SparseMatrix<double>& sim_in) {
    const Index n = static_cast<Index>(sim_in.rows());
    if (sim_in.cols() != n) throw Error("similarity matrix must be square");
    // Drop the diagonal; D and sim diagonal cancel in L = D - sim anyway.
    std::vector<Eigen::Triplet<double>> trips;
    for (int k = 0; k < sim_in.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(sim_in, k); it; ++it)
            if (it.row() != it.col() && it.value() != 0.0)
                trips.emplace_back(it.row(), it.col(), it.value());
    SimilarityBundle b;
    b.sim.resize(n, n);
    b.sim.setFromTriplets(trips.begin(), trips.end());
    b.degree = Eigen::VectorXd::Zero(n);
    for (int k = 0; k < b.sim.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(b.sim, k); it; ++it)
            b.degree(it.row()) += it.value();
    std::vector<Eigen::Triplet<double>> lap;
    lap.reserve(trips.size() + static_cast<std::size_t>(n));
    for (Index i = 0; i < n; ++i)
        if (b.degree(i) != 0.0) lap.emplace_back(i, i, b.degree(i));
    for (const auto& t : trips) lap.emplace_back(t.row(), t.col(), -t.value());
    b.laplacian.resize(n, n);
    b.laplacian.setFromTriplets(lap.begin(), lap.end());
    return b;
}

SimilarityBundle cosine_similarity_matrix(const DocVectors& v, int top_k) {
    if (top_k < 1) throw Error("cosine_similarity_matrix: top_k must be >= 1");
    const Index n = static_cast<Index>(v.size());
    if (n == 0) throw Error("cosine_similarity_matrix: no vectors");

    // Postings lists over dimensions; vectors are unit so dot = cosine.
    std::vector<std::vector<std::pair<Index, double>>> postings(
        static_cast<std::size_t>(v.dim));
    for (Index d = 0; d < n; ++d)
        for (const auto& [t, w] : v.vectors[static_cast<std::size_t>(d)])
            postings[static_cast<std::size_t>(t)].emplace_back(d, w);

    std::vector<Eigen::Triplet<double>> kept;
    std::vector<double> acc(static_cast<std::size_t>(n), 0.0);
    std::vector<Index> touched;
    for (Index i = 0; i < n; ++i) {
        touched.clear();
        for (const auto& [t, w] : v.vectors[static_cast<std::size_t>(i)]) {
            for (const auto& [j, wj] : postings[static_cast<std::size_t>(t)]) {
                if (j == i) continue;
                if (acc[static_cast<std::size_t>(j)] == 0.0) touched.push_back(j);
                acc[static_cast<std::size_t>(j)] += w * wj;
            }
        }
        // clamp negatives (possible with imported vectors), keep row top_k
        std::vector<std::pair<Index, double>> entries;
        entries.reserve(touched.size());
        for (Index j : touched) {
            double s = acc[static_cast<std::size_t>(j)];
            acc[static_cast<std::size_t>(j)] = 0.0;
            if (s > 0.0) entries.emplace_back(j, std::min(s, 1.0));
        }
        std::sort(entries.begin(), entries.end(), [](const auto& a, const auto& b) {
            return a.second != b.second ? a.second > b.second : a.first < b.first;
        });
        if (static_cast<int>(entries.size()) > top_k) entries.resize(static_cast<std::size_t>(top_k));
        for (const auto& [j, s] : entries) kept.emplace_back(i, j, s);
    }

    // Union symmetrization: an entry survives if either endpoint kept it.
    std::map<std::pair<Index, Index>, double> sym;
    for (const auto& t : kept) {
        Index i = static_cast<Index>(t.row()), j = static_cast<Index>(t.col());
        if (i > j) std::swap(i, j);
        sym[{i, j}] = t.value();  // cosine is symmetric; duplicates agree
    }
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(sym.size() * 2);
    for (const auto& [ij, s] : sym) {
        trips.emplace_back(ij.first, ij.second, s);
        trips.emplace_back(ij.second, ij.first, s);
    }
    Eigen::SparseMatrix<double> sim(n, n);
    sim.setFromTriplets(trips.begin(), trips.end());
    return bundle_from_similarity(sim);
}

void save_similarity_tsv(const SimilarityBundle& b, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw Error("cannot write " + path);
    out.precision(17);
    for (int k = 0; k < b.sim.outerSize(); ++k)
        for (Eigen::SparseMatrix<double>::InnerIterator it(b.sim, k); it; ++it)
            if (it.row() < it.col()) out << it.row() << '\t' << it.col() << '\t' << it.value() << '\n';
}

SimilarityBundle load_similarity_tsv(const std::string& path, Index dim) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path);
    std::vector<Eigen::Triplet<double>> trips;
    Index i, j;
    double s;
    while (in >> i >> j >> s) {
        if (i < 0 || j < 0 || i >= dim || j >= dim) throw Error(path + ": index out of range");
        trips.emplace_back(i, j, s);
        trips.emplace_back(j, i, s);
    }
    Eigen::SparseMatrix<double> sim(dim, dim);
    sim.setFromTriplets(trips.begin(), trips.end());
    return bundle_from_similarity(sim);
}

}  // namespace guardrec
