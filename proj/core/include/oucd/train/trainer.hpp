#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>
#include <vector>

#include "oucd/common/rng.hpp"
#include "oucd/data/manifest.hpp"
#include "oucd/metrics/extractor.hpp"
#include "oucd/model/network.hpp"
#include "oucd/tensor/adam.hpp"
#include "oucd/train/checkpoint.hpp"
#include "oucd/train/settings.hpp"

namespace oucd {

/// Raised when the loss becomes NaN or infinite.
class TrainingDiverged : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepLog {
    long long step = 0;
    int epoch = 0;
    double lr = 0.0;
    double loss = 0.0;
    double mse = 0.0;
    double perceptual = 0.0;

    /// "step=<n> epoch=<e> lr=<f> loss=<f> mse=<f> perc=<f>"
    [[nodiscard]] std::string line() const;
};

/// Owns the network, optimizer state and data order of one run.
///
/// Each step draws the next `batch_size` pairs of the epoch's shuffled order,
/// crops one random patch from each, runs forward, total loss and backward,
/// then applies Adam with the learning rate of the current epoch. The whole
/// trajectory is a function of (config, data).
class Trainer {
public:
    Trainer(TrainConfig config, std::vector<ImagePair> data);

    /// Trains until total_epochs or max_steps, whichever comes first. Each step
    /// is logged to `log` when given. On a non-finite loss the offending batch
    /// is written under `diagnostics_dir` (if non-empty) and TrainingDiverged is thrown.
    void run(std::ostream* log = nullptr, const std::filesystem::path& diagnostics_dir = {});

    /// One optimizer step on an explicit batch (no cropping).
    StepLog step(const Tensor<float>& rainy, const Tensor<float>& clean, int epoch);

    [[nodiscard]] Network<float>& network() noexcept { return net_; }
    [[nodiscard]] const Network<float>& network() const noexcept { return net_; }
    [[nodiscard]] const TrainConfig& config() const noexcept { return config_; }
    [[nodiscard]] const std::vector<StepLog>& history() const noexcept { return history_; }
    [[nodiscard]] long long steps_done() const noexcept { return step_; }
    [[nodiscard]] int epochs_done() const noexcept { return epoch_; }

    [[nodiscard]] CheckpointBundle checkpoint() const;

private:
    TrainConfig config_;
    std::vector<ImagePair> data_;
    Network<float> net_;
    FeatureExtractor<float> extractor_;
    std::vector<AdamState<float>> adam_;
    Rng rng_;
    long long step_ = 0;
    int epoch_ = 0;
    std::vector<StepLog> history_;
};

/// Rebuilds the network described by a checkpoint and loads its parameters.
[[nodiscard]] Network<float> network_from_checkpoint(const CheckpointBundle& bundle);

/// Copies checkpoint parameters into `net`. Throws CheckpointError on a
/// fingerprint mismatch or a missing / misshapen record.
void load_parameters(Network<float>& net, const CheckpointBundle& bundle);

/// FNV-1a over every parameter's bytes, in parameter order.
[[nodiscard]] std::uint64_t parameter_hash(const Network<float>& net);

} // namespace oucd
