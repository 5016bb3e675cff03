#include "guardrec/io.hpp"

#include <cstdio>
#include <cstring>
#include <fstream>
#include <vector>

namespace guardrec {

namespace {

constexpr char kMagic[4] = {'G', 'R', 'M', 'F'};
constexpr std::int32_t kFormatVersion = 1;

void write_matrix_row_major(std::ofstream& out, const Eigen::MatrixXd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            double v = m(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof(v));
        }
}

Eigen::MatrixXd read_matrix_row_major(std::ifstream& in, Eigen::Index rows, Eigen::Index cols,
                                      const std::string& path) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) {
            double v;
            in.read(reinterpret_cast<char*>(&v), sizeof(v));
            if (!in) throw Error(path + ": truncated model file");
            m(i, j) = v;
        }
    return m;
}

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw Error(path + ": truncated model file");
    return v;
}

}  // namespace

void save_model(const ModelParams& p, const std::string& path, bool include_kl) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod(out, kFormatVersion);
    write_pod<std::int64_t>(out, p.U.rows());
    write_pod<std::int64_t>(out, p.V.cols());
    write_pod<std::int32_t>(out, static_cast<std::int32_t>(p.U.cols()));
    const bool has_kl = include_kl && p.K.size() > 0 && p.L.size() > 0;
    write_pod<std::int32_t>(out, has_kl ? 1 : 0);
    write_matrix_row_major(out, p.U);
    write_matrix_row_major(out, p.V);
    if (has_kl) {
        write_matrix_row_major(out, p.K);
        write_matrix_row_major(out, p.L);
    }
    if (!out) throw Error("write failed for " + path);
}

ModelParams load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    char magic[4];
    in.read(magic, sizeof(magic));
    if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw Error(path + ": not a model file (bad magic)");
    auto version = read_pod<std::int32_t>(in, path);
    if (version != kFormatVersion)
        throw Error(path + ": unsupported model format version " + std::to_string(version));
    auto n = read_pod<std::int64_t>(in, path);
    auto m = read_pod<std::int64_t>(in, path);
    auto d = read_pod<std::int32_t>(in, path);
    auto has_kl = read_pod<std::int32_t>(in, path);
    if (n < 1 || m < 1 || d < 1) throw Error(path + ": bad dimensions in header");
    ModelParams p;
    p.U = read_matrix_row_major(in, n, d, path);
    p.V = read_matrix_row_major(in, d, m, path);
    if (has_kl) {
        p.K = read_matrix_row_major(in, d, m, path);
        p.L = read_matrix_row_major(in, d, n, path);
    } else {
        p.K.resize(d, m);
        p.K.setZero();
        p.L.resize(d, n);
        p.L.setZero();
    }
    return p;
}

std::string file_hash_hex(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::uint64_t h = 0xcbf29ce484222325ull;
    char buf[65536];
    while (in) {
        in.read(buf, sizeof(buf));
        std::streamsize got = in.gcount();
        if (got > 0) h = fnv1a64(buf, static_cast<std::size_t>(got), h);
    }
    char hex[17];
    std::snprintf(hex, sizeof(hex), "%016llx", static_cast<unsigned long long>(h));
    return hex;
}

}  // namespace guardrec
