#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "oucd/data/manifest.hpp"
#include "oucd/metrics/report.hpp"
#include "oucd/model/config.hpp"
#include "oucd/train/settings.hpp"

namespace oucd {

struct AblationRow {
    Variant variant = Variant::oucd;
    std::string label;
    std::size_t parameters = 0;
    double final_loss = 0.0;
    MetricReport report;
};

struct AblationReport {
    /// Always the four variants in the published row order.
    std::vector<AblationRow> rows;

    [[nodiscard]] std::string to_text() const;
    [[nodiscard]] std::string to_json() const;
};

/// Trains and evaluates every variant with the same seed, data order and step
/// budget; only base.model.variant changes between rows.
[[nodiscard]] AblationReport run_ablation(const TrainConfig& base,
                                          const std::vector<ImagePair>& train,
                                          const std::vector<ImagePair>& test,
                                          std::ostream* log = nullptr);

} // namespace oucd
