#pragma once

#include <filesystem>
#include <vector>

#include "covsv/ensembles/decomposition.hpp"

namespace covsv::ensembles {

// Binary cache of decompositions. A file is a sequence of records:
//   8 bytes  magic "COVSVDC\0"
//   u32      format version (1)
//   u32      M, u32 N, u64 seed, u64 replicate
//   u32      law name length, then the name bytes
//   u32      count = min(M, N), u8 has_vectors
//   f64[count]            lambda
//   f64[M*count]          xi, column-major   (only if has_vectors)
//   f64[N*count]          zeta, column-major (only if has_vectors)
// All integers and floats are little-endian.
void write_cache(const std::filesystem::path& path, const std::vector<SampleDecomposition>& records);

// Throws DataError on a truncated or malformed file.
std::vector<SampleDecomposition> read_cache(const std::filesystem::path& path);

}  // namespace covsv::ensembles
