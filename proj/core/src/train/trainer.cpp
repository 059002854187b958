#include "oucd/train/trainer.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <string_view>

#include "oucd/common/error.hpp"
#include "oucd/data/image_io.hpp"
#include "oucd/metrics/loss.hpp"

namespace oucd {
namespace {

FeatureExtractor<float> make_extractor(const TrainConfig& cfg) {
    if (!cfg.extractor_weights.empty()) {
        return FeatureExtractor<float>::from_file(cfg.extractor_weights);
    }
    return FeatureExtractor<float>::seeded();
}

Tensor<float> crop_square(const Tensor<float>& t, int top, int left, int size) {
    return ops::crop(t, top, left, size, size);
}

std::string g9(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

} // namespace

std::string StepLog::line() const {
    return "step=" + std::to_string(step) + " epoch=" + std::to_string(epoch) + " lr=" + g9(lr) +
           " loss=" + g9(loss) + " mse=" + g9(mse) + " perc=" + g9(perceptual);
}

Trainer::Trainer(TrainConfig config, std::vector<ImagePair> data)
    : config_(std::move(config)),
      data_(std::move(data)),
      net_(config_.model, derive_seed(config_.seed, "init")),
      extractor_(make_extractor(config_)),
      rng_(derive_seed(config_.seed, "data")) {
    config_.validate();
    for (const auto& p : data_) {
        const Shape& s = p.clean.shape();
        if (std::min(s.h, s.w) < config_.patch_size) {
            throw UsageError("training image " + p.name + " (" + s.str() +
                             ") is smaller than the patch size");
        }
    }
    const auto params = net_.parameters();
    adam_.reserve(params.size());
    for (const auto& p : params) {
        adam_.emplace_back(p.tensor->size());
    }
}

StepLog Trainer::step(const Tensor<float>& rainy, const Tensor<float>& clean, int epoch) {
    const double lr = config_.lr_at(epoch);
    net_.zero_grad();
    Tape<float> tape;
    const Var y = tape.constant(rainy);
    const Var x = tape.constant(clean);
    const auto fwd = net_.forward(tape, y);
    const auto terms = total_loss(tape, fwd.output, x, extractor_, config_.loss);

    StepLog log;
    log.step = step_ + 1;
    log.epoch = epoch;
    log.lr = lr;
    log.loss = tape.value(terms.total).data()[0];
    log.mse = tape.value(terms.mse).data()[0];
    log.perceptual = terms.has_perceptual ? tape.value(terms.perceptual).data()[0] : 0.0;
    if (!std::isfinite(log.loss)) {
        throw TrainingDiverged("non-finite loss at step " + std::to_string(log.step) + " (" +
                               log.line() + ")");
    }
    tape.backward(terms.total);

    auto params = net_.parameters();
    float scale = 1.0F;
    if (config_.grad_clip > 0.0) {
        double sq = 0.0;
        for (auto& p : params) {
            for (const float g : p.tensor->grad()) {
                sq += static_cast<double>(g) * g;
            }
        }
        const double norm = std::sqrt(sq);
        if (norm > config_.grad_clip) {
            scale = static_cast<float>(config_.grad_clip / norm);
        }
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto g = params[i].tensor->grad();
        if (scale != 1.0F) {
            for (auto& v : g) {
                v *= scale;
            }
        }
        adam_step(*params[i].tensor, std::span<const float>(g), adam_[i], static_cast<float>(lr));
    }
    ++step_;
    history_.push_back(log);
    return log;
}

void Trainer::run(std::ostream* log, const std::filesystem::path& diagnostics_dir) {
    if (data_.empty()) {
        throw UsageError("training set is empty");
    }
    if (log && config_.grad_clip > 0.0) {
        *log << "# gradient clipping enabled: global norm <= " << config_.grad_clip << "\n";
    }
    const int batch = std::min<int>(config_.batch_size, static_cast<int>(data_.size()));
    const int size = config_.patch_size;
    while (epoch_ < config_.total_epochs) {
        std::vector<std::size_t> order(data_.size());
        for (std::size_t i = 0; i < order.size(); ++i) {
            order[i] = i;
        }
        std::shuffle(order.begin(), order.end(), rng_);
        for (std::size_t start = 0; start < order.size(); start += batch) {
            if (config_.max_steps > 0 && step_ >= config_.max_steps) {
                return;
            }
            const std::size_t end = std::min(order.size(), start + batch);
            std::vector<Tensor<float>> ys;
            std::vector<Tensor<float>> xs;
            for (std::size_t k = start; k < end; ++k) {
                const ImagePair& p = data_[order[k]];
                const Shape& s = p.clean.shape();
                std::uniform_int_distribution<int> top(0, s.h - size);
                std::uniform_int_distribution<int> left(0, s.w - size);
                const int t = top(rng_);
                const int l = left(rng_);
                ys.push_back(crop_square(p.rainy, t, l, size));
                xs.push_back(crop_square(p.clean, t, l, size));
            }
            const Tensor<float> y = concat_batch<float>(ys);
            const Tensor<float> x = concat_batch<float>(xs);
            try {
                const StepLog s = step(y, x, epoch_);
                if (log) {
                    *log << s.line() << std::endl;
                }
            } catch (const TrainingDiverged&) {
                if (!diagnostics_dir.empty()) {
                    std::filesystem::create_directories(diagnostics_dir);
                    for (std::size_t k = 0; k < ys.size(); ++k) {
                        const std::string stem = "diverged_step" + std::to_string(step_ + 1) +
                                                 "_" + data_[order[start + k]].name;
                        save_image(ys[k], diagnostics_dir / (stem + "_rainy.png"));
                        save_image(xs[k], diagnostics_dir / (stem + "_clean.png"));
                    }
                }
                throw;
            }
        }
        ++epoch_;
    }
}

CheckpointBundle Trainer::checkpoint() const {
    CheckpointBundle b;
    b.fingerprint = net_.config().fingerprint();
    b.model_config = net_.config().to_text();
    b.epoch = epoch_;
    b.step = step_;
    b.adam_steps = adam_.empty() ? 0 : adam_.front().step_count;
    std::ostringstream rs;
    rs << rng_;
    b.rng_state = rs.str();
    const auto params = net_.parameters();
    for (std::size_t i = 0; i < params.size(); ++i) {
        b.parameters.push_back(make_record(params[i].first, *params[i].second));
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        const Shape& s = params[i].second->shape();
        const auto& st = adam_[i];
        if (st.first_moment.empty()) {
            continue;
        }
        b.optimizer.push_back({"adam.m:" + params[i].first, s, st.first_moment});
        b.optimizer.push_back({"adam.v:" + params[i].first, s, st.second_moment});
    }
    return b;
}

void load_parameters(Network<float>& net, const CheckpointBundle& bundle) {
    if (bundle.fingerprint != net.config().fingerprint()) {
        throw CheckpointError("architecture fingerprint mismatch: checkpoint " +
                              std::to_string(bundle.fingerprint) + ", network " +
                              std::to_string(net.config().fingerprint()));
    }
    for (auto& p : net.parameters()) {
        const ParamRecord* rec = bundle.find_parameter(p.name);
        if (rec == nullptr) {
            throw CheckpointError("checkpoint lacks record " + p.name);
        }
        if (!(rec->shape == p.tensor->shape())) {
            throw CheckpointError("record " + p.name + " has shape " + rec->shape.str() +
                                  ", expected " + p.tensor->shape().str());
        }
        std::copy(rec->data.begin(), rec->data.end(), p.tensor->data().begin());
    }
}

Network<float> network_from_checkpoint(const CheckpointBundle& bundle) {
    ModelConfig cfg;
    try {
        cfg = ModelConfig::from_config(ConfigFile::parse(bundle.model_config));
    } catch (const std::exception& e) {
        throw CheckpointError(std::string("checkpoint model config is invalid: ") + e.what());
    }
    Network<float> net(cfg, 0);
    load_parameters(net, bundle);
    return net;
}

std::uint64_t parameter_hash(const Network<float>& net) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (const auto& [name, t] : net.parameters()) {
        const auto bytes = std::string_view(reinterpret_cast<const char*>(t->data().data()),
                                            t->size() * sizeof(float));
        h = mix64(h ^ fnv1a64(bytes));
    }
    return h;
}

} // namespace oucd
