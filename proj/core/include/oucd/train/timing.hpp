#pragma once

#include <string>
#include <vector>

#include "oucd/model/network.hpp"

namespace oucd {

struct TimingReport {
    int height = 0;
    int width = 0;
    int warmups = 3;
    std::vector<double> samples;
    double median_seconds = 0.0;
    std::string hardware;

    [[nodiscard]] std::string to_text() const;
};

/// Median wall-clock time of `repetitions` single-image forward passes on a
/// seeded random size x size input, after `warmups` untimed passes.
[[nodiscard]] TimingReport timing_report(const Network<float>& net, int size, int repetitions,
                                         int warmups = 3);

/// CPU model and logical core count, best effort.
[[nodiscard]] std::string hardware_note();

} // namespace oucd
