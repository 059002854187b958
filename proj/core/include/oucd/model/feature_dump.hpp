#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "oucd/model/network.hpp"

namespace oucd {

/// Tap names a selector may address, e.g. "oc.enc.2", "uc.dec.*", "msff.enc", "*".
[[nodiscard]] std::vector<std::string> match_taps(const std::vector<std::string>& available,
                                                  const std::string& selector);

struct DumpResult {
    std::vector<std::filesystem::path> files;
    /// Maps whose values were all equal; written as all-zero images.
    std::vector<std::string> flat_maps;
};

/// Runs `y` (batch of one) through the network and writes every channel of the
/// selected taps as a grayscale PNG named <tap>_c<channel>.png, min-max
/// normalized per map. Throws UsageError if the selector matches nothing.
DumpResult dump_feature_maps(const Network<float>& net, const Tensor<float>& y,
                             const std::string& selector, const std::filesystem::path& out_dir);

} // namespace oucd
