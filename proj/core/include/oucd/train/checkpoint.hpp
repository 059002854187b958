#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "oucd/tensor/tensor.hpp"

namespace oucd {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct ParamRecord {
    std::string name;
    Shape shape;
    std::vector<float> data;

    bool operator==(const ParamRecord&) const = default;
};

/// Everything needed to resume or evaluate a run.
///
/// File layout, little-endian:
///   "OUCD" | u32 version | u64 fingerprint | str model_config | i64 epoch | i64 step
///   | f64 beta1 | f64 beta2 | f64 epsilon | u64 adam_steps | str rng_state
///   | u64 record_count | record*
/// where str is u32 length + bytes and a record is
///   str name | i32 n, c, h, w | f32 data[n*c*h*w].
/// Parameters come first, then optimizer moments named "adam.m:<param>" and "adam.v:<param>".
struct CheckpointBundle {
    std::uint32_t version = kCheckpointVersion;
    std::uint64_t fingerprint = 0;
    std::string model_config;
    std::int64_t epoch = 0;
    std::int64_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    std::uint64_t adam_steps = 0;
    std::string rng_state;
    std::vector<ParamRecord> parameters;
    std::vector<ParamRecord> optimizer;

    /// nullptr when absent.
    [[nodiscard]] const ParamRecord* find_parameter(const std::string& name) const;
    [[nodiscard]] const ParamRecord* find_optimizer(const std::string& name) const;

    bool operator==(const CheckpointBundle&) const = default;
};

[[nodiscard]] std::vector<std::uint8_t> serialize_checkpoint(const CheckpointBundle& bundle);
/// Throws CheckpointError naming the field or record that failed (bad magic,
/// unsupported version, truncation, trailing bytes).
[[nodiscard]] CheckpointBundle deserialize_checkpoint(std::span<const std::uint8_t> bytes,
                                                      const std::string& source = "checkpoint");

void save_checkpoint(const CheckpointBundle& bundle, const std::filesystem::path& path);
/// IoError-free: an unreadable file is reported as CheckpointError too.
[[nodiscard]] CheckpointBundle load_checkpoint(const std::filesystem::path& path);

template <typename T>
[[nodiscard]] ParamRecord make_record(const std::string& name, const Tensor<T>& t) {
    return {name, t.shape(), std::vector<float>(t.data().begin(), t.data().end())};
}

} // namespace oucd
