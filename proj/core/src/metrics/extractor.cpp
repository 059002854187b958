#include "oucd/metrics/extractor.hpp"

#include <array>
#include <cmath>

#include "oucd/common/error.hpp"
#include "oucd/common/rng.hpp"
#include "oucd/train/checkpoint.hpp"

namespace oucd {
namespace {

constexpr std::array<std::pair<int, int>, 6> kChannels{
    {{3, 16}, {16, 16}, {16, 32}, {32, 32}, {32, 64}, {64, 64}}};

} // namespace

template <typename T>
FeatureExtractor<T> FeatureExtractor<T>::empty_layers() {
    FeatureExtractor ex;
    for (std::size_t i = 0; i < kChannels.size(); ++i) {
        const auto [in, out] = kChannels[i];
        ex.layers_.push_back({"extractor.conv" + std::to_string(i + 1),
                              Tensor<T>(Shape{out, in, 3, 3}), Tensor<T>(Shape{out, 1, 1, 1})});
    }
    return ex;
}

template <typename T>
FeatureExtractor<T> FeatureExtractor<T>::seeded(std::uint64_t seed) {
    FeatureExtractor ex = empty_layers();
    for (auto& l : ex.layers_) {
        Rng rng(derive_seed(seed, l.name));
        const double bound = std::sqrt(6.0 / (l.weight.shape().c * 9.0));
        std::uniform_real_distribution<double> dist(-bound, bound);
        for (auto& v : l.weight.data()) {
            v = static_cast<T>(dist(rng));
        }
    }
    return ex;
}

template <typename T>
FeatureExtractor<T> FeatureExtractor<T>::from_file(const std::filesystem::path& path) {
    CheckpointBundle bundle;
    try {
        bundle = load_checkpoint(path);
    } catch (const CheckpointError& e) {
        throw IoError(std::string("extractor weights: ") + e.what());
    }
    FeatureExtractor ex = empty_layers();
    auto fill = [&](const std::string& name, Tensor<T>& dst) {
        const ParamRecord* rec = bundle.find_parameter(name);
        if (rec == nullptr) {
            throw IoError(path.string() + ": missing record " + name);
        }
        if (!(rec->shape == dst.shape())) {
            throw IoError(path.string() + ": record " + name + " has shape " + rec->shape.str() +
                          ", expected " + dst.shape().str());
        }
        std::copy(rec->data.begin(), rec->data.end(), dst.data().begin());
    };
    for (auto& l : ex.layers_) {
        fill(l.name + ".weight", l.weight);
        fill(l.name + ".bias", l.bias);
    }
    return ex;
}

template <typename T>
void FeatureExtractor<T>::save(const std::filesystem::path& path) const {
    CheckpointBundle bundle;
    for (const auto& l : layers_) {
        bundle.parameters.push_back(make_record(l.name + ".weight", l.weight));
        bundle.parameters.push_back(make_record(l.name + ".bias", l.bias));
    }
    save_checkpoint(bundle, path);
}

template <typename T>
std::vector<Var> FeatureExtractor<T>::forward(Tape<T>& tape, Var x) const {
    const Shape& s = tape.value(x).shape();
    if (s.c != 3 || s.h % 4 != 0 || s.w % 4 != 0) {
        throw ConfigError("feature extractor needs 3 channels and H, W divisible by 4, got " +
                          s.str());
    }
    std::vector<Var> taps;
    Var h = x;
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        const auto& l = layers_[i];
        h = tape.relu(tape.conv2d(h, tape.frozen(l.weight), tape.frozen(l.bias), 1, 1));
        if (i % 2 == 1) {
            taps.push_back(h);
            if (i + 1 < layers_.size()) {
                h = tape.maxpool2(h);
            }
        }
    }
    return taps;
}

template class FeatureExtractor<float>;
template class FeatureExtractor<double>;

} // namespace oucd
