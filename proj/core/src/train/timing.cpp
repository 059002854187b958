#include "oucd/train/timing.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <sstream>
#include <thread>

#include "oucd/common/error.hpp"
#include "oucd/common/rng.hpp"

namespace oucd {

std::string hardware_note() {
    std::string model = "unknown CPU";
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.starts_with("model name")) {
            const auto colon = line.find(':');
            if (colon != std::string::npos) {
                model = line.substr(colon + 2);
            }
            break;
        }
    }
    return model + ", " + std::to_string(std::thread::hardware_concurrency()) +
           " logical cores, single-threaded inference";
}

TimingReport timing_report(const Network<float>& net, int size, int repetitions, int warmups) {
    if (repetitions < 1 || warmups < 0) {
        throw UsageError("timing needs repetitions >= 1 and warmups >= 0");
    }
    TimingReport r;
    r.height = size;
    r.width = size;
    r.warmups = warmups;
    r.hardware = hardware_note();

    Tensor<float> y(Shape{1, net.config().in_channels, size, size});
    Rng rng(derive_seed(0, "timing"));
    std::uniform_real_distribution<float> dist(0.0F, 1.0F);
    for (auto& v : y.data()) {
        v = dist(rng);
    }
    for (int i = 0; i < warmups; ++i) {
        static_cast<void>(net.infer(y));
    }
    for (int i = 0; i < repetitions; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        static_cast<void>(net.infer(y));
        const auto t1 = std::chrono::steady_clock::now();
        r.samples.push_back(std::chrono::duration<double>(t1 - t0).count());
    }
    std::vector<double> sorted = r.samples;
    std::sort(sorted.begin(), sorted.end());
    const std::size_t n = sorted.size();
    r.median_seconds = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
    return r;
}

std::string TimingReport::to_text() const {
    std::ostringstream os;
    os << "image size: " << height << "x" << width << "\n";
    os << "repetitions: " << samples.size() << " (after " << warmups << " warm-up passes)\n";
    os << "median seconds per image: " << median_seconds << "\n";
    os << "hardware: " << hardware << "\n";
    return os.str();
}

} // namespace oucd
