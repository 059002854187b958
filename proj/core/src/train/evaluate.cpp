#include "oucd/train/evaluate.hpp"

#include <algorithm>
#include <chrono>

#include "oucd/common/error.hpp"
#include "oucd/data/image_io.hpp"
#include "oucd/metrics/quality.hpp"
#include "oucd/train/trainer.hpp"

namespace oucd {

Tensor<float> infer_padded(const Network<float>& net, const Tensor<float>& y) {
    const Shape& s = y.shape();
    const int div = net.config().required_divisor();
    const int ph = (s.h + div - 1) / div * div;
    const int pw = (s.w + div - 1) / div * div;
    if (ph == s.h && pw == s.w) {
        return net.infer(y);
    }
    const Tensor<float> out = net.infer(ops::reflect_pad(y, ph, pw));
    return ops::crop(out, 0, 0, s.h, s.w);
}

Tensor<float> clamp_unit(Tensor<float> t) {
    for (auto& v : t.data()) {
        v = std::clamp(v, 0.0F, 1.0F);
    }
    return t;
}

MetricReport evaluate(const Network<float>& net, const std::vector<ImagePair>& pairs,
                      const std::string& dataset, const std::filesystem::path& prediction_dir) {
    if (!prediction_dir.empty()) {
        std::filesystem::create_directories(prediction_dir);
    }
    MetricReport report;
    report.dataset = dataset;
    for (const auto& p : pairs) {
        const auto t0 = std::chrono::steady_clock::now();
        const Tensor<float> pred = clamp_unit(infer_padded(net, p.rainy));
        const auto t1 = std::chrono::steady_clock::now();
        report.images.push_back({p.name, psnr(pred, p.clean), ssim(pred, p.clean),
                                 std::chrono::duration<double>(t1 - t0).count()});
        if (!prediction_dir.empty()) {
            save_image(pred, prediction_dir / (p.name + ".png"));
        }
    }
    report.finalize();
    return report;
}

MetricReport evaluate_identity(const std::vector<ImagePair>& pairs, const std::string& dataset) {
    MetricReport report;
    report.dataset = dataset;
    for (const auto& p : pairs) {
        report.images.push_back({p.name, psnr(p.rainy, p.clean), ssim(p.rainy, p.clean), 0.0});
    }
    report.finalize();
    return report;
}

MetricReport evaluate_checkpoint(const CheckpointBundle& bundle, const std::vector<ImagePair>& pairs,
                                 const std::string& dataset, const ModelConfig* expected) {
    if (expected != nullptr && expected->fingerprint() != bundle.fingerprint) {
        throw CheckpointError("checkpoint architecture fingerprint does not match the configured model");
    }
    const Network<float> net = network_from_checkpoint(bundle);
    return evaluate(net, pairs, dataset);
}

} // namespace oucd
