#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "oucd/tensor/tensor.hpp"

namespace oucd {

/// A dataset directory holds rainy/NAME.png and clean/NAME.png pairs plus one
/// manifest per split (train.txt, val.txt, test.txt). Each manifest starts with
/// "#seed=<u64> fractions=<a,b,c>" followed by one "rainy/NAME.png" per line.
struct Manifest {
    std::uint64_t seed = 0;
    std::array<double, 3> fractions{1.0, 0.0, 0.0};
    std::vector<std::string> entries;
    /// Directory the entries are relative to.
    std::filesystem::path root;
};

inline constexpr std::array<const char*, 3> kSplitNames{"train", "val", "test"};

/// Splits the pairs under `dir` deterministically and writes the three manifests.
/// Throws UsageError on an empty directory, negative fractions or fractions whose
/// sum differs from 1, IoError when a rainy image lacks its clean partner.
std::array<Manifest, 3> build_manifest(const std::filesystem::path& dir,
                                       const std::array<double, 3>& fractions,
                                       std::uint64_t seed);

void write_manifest(const Manifest& m, const std::filesystem::path& path);
/// Throws UsageError on a missing or malformed header, IoError if unreadable.
[[nodiscard]] Manifest read_manifest(const std::filesystem::path& path);

/// Manifest path for a dataset directory and split name; a path to a file is returned unchanged.
[[nodiscard]] std::filesystem::path manifest_path(const std::filesystem::path& dataset,
                                                  const std::string& split);

struct ImagePair {
    std::string name;
    Tensor<float> rainy;
    Tensor<float> clean;
};

/// Loads every pair listed in the manifest, in manifest order.
[[nodiscard]] std::vector<ImagePair> load_pairs(const Manifest& m);

/// "rainy/NAME.png" to "clean/NAME.png".
[[nodiscard]] std::string clean_entry(const std::string& rainy_entry);

} // namespace oucd
