#pragma once

#include <string>
#include <vector>

namespace oucd {

struct ImageMetrics {
    std::string name;
    /// +infinity for identical images.
    double psnr_db = 0.0;
    double ssim = 0.0;
    double seconds = 0.0;
};

struct MetricReport {
    std::string dataset;
    std::vector<ImageMetrics> images;
    double mean_psnr = 0.0;
    double mean_ssim = 0.0;
    double mean_seconds = 0.0;

    /// Recomputes the aggregates as arithmetic means of the per-image values.
    void finalize();

    /// Columns image / PSNR / SSIM; infinite PSNR is printed as 99.00.
    [[nodiscard]] std::string to_text() const;
    /// Per-image and aggregate fields; infinite PSNR becomes null.
    [[nodiscard]] std::string to_json() const;
};

inline constexpr double kPsnrTextCap = 99.0;

} // namespace oucd
