#pragma once

#include <string>

#include "guardrec/gau.hpp"

namespace guardrec {

// Binary model container: magic + format version + dims, then row-major U and
// V, optionally K and L.
void save_model(const ModelParams& p, const std::string& path, bool include_kl = false);
ModelParams load_model(const std::string& path);

// FNV-1a over a file's bytes, hex-encoded; used for manifest fingerprints.
std::string file_hash_hex(const std::string& path);

}  // namespace guardrec
