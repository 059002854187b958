#include "oucd/metrics/report.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include <json.hpp>

namespace oucd {
namespace {

nlohmann::json finite_or_null(double v) {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
}

} // namespace

void MetricReport::finalize() {
    double p = 0.0;
    double s = 0.0;
    double t = 0.0;
    for (const auto& m : images) {
        p += m.psnr_db;
        s += m.ssim;
        t += m.seconds;
    }
    const double n = images.empty() ? 1.0 : static_cast<double>(images.size());
    mean_psnr = p / n;
    mean_ssim = s / n;
    mean_seconds = t / n;
}

std::string MetricReport::to_text() const {
    std::size_t width = 5;
    for (const auto& m : images) {
        width = std::max(width, m.name.size());
    }
    auto psnr_cell = [](double v) { return std::min(v, kPsnrTextCap); };
    std::ostringstream os;
    os << "dataset: " << dataset << "\n";
    os << std::left << std::setw(static_cast<int>(width) + 2) << "image" << std::right
       << std::setw(9) << "PSNR" << std::setw(9) << "SSIM" << "\n";
    os << std::fixed;
    for (const auto& m : images) {
        os << std::left << std::setw(static_cast<int>(width) + 2) << m.name << std::right
           << std::setw(9) << std::setprecision(2) << psnr_cell(m.psnr_db) << std::setw(9)
           << std::setprecision(4) << m.ssim << "\n";
    }
    os << std::left << std::setw(static_cast<int>(width) + 2) << "mean" << std::right
       << std::setw(9) << std::setprecision(2) << psnr_cell(mean_psnr) << std::setw(9)
       << std::setprecision(4) << mean_ssim << "\n";
    os << "mean inference time: " << std::setprecision(4) << mean_seconds << " s/image\n";
    return os.str();
}

std::string MetricReport::to_json() const {
    nlohmann::json j;
    j["dataset"] = dataset;
    j["images"] = nlohmann::json::array();
    for (const auto& m : images) {
        j["images"].push_back({{"name", m.name},
                               {"psnr_db", finite_or_null(m.psnr_db)},
                               {"ssim", m.ssim},
                               {"seconds", m.seconds}});
    }
    j["aggregate"] = {{"count", images.size()},
                      {"mean_psnr_db", finite_or_null(mean_psnr)},
                      {"mean_ssim", mean_ssim},
                      {"mean_seconds", mean_seconds}};
    return j.dump(2) + "\n";
}

} // namespace oucd
