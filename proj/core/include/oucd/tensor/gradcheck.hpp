#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "oucd/common/rng.hpp"
#include "oucd/tensor/tape.hpp"

namespace oucd {

enum class Precision { single, shadow };

[[nodiscard]] std::string_view to_string(Precision p) noexcept;

struct GradCheckRow {
    std::string op;
    std::string operand;
    Precision precision = Precision::single;
    int cases = 0;
    double max_rel_error = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct GradCheckReport {
    std::vector<GradCheckRow> rows;

    [[nodiscard]] bool passed() const;
    /// Plain-text table, one row per (op, operand, precision).
    [[nodiscard]] std::string to_table() const;
    void append(const GradCheckReport& other);
};

/// Builds the op's output from its operand handles.
template <typename T>
using OpUnderTest = std::function<Var(Tape<T>&, std::span<const Var>)>;

/// Draws one random case: the operand tensors, in the order the op expects.
template <typename T>
using CaseGenerator = std::function<std::vector<Tensor<T>>(Rng&)>;

struct GradCheckOptions {
    int cases = 100;
    /// Maximum allowed relative error; <= 0 picks the precision default
    /// (1e-2 single, 1e-5 shadow).
    double tolerance = 0.0;
    std::uint64_t seed = 0;
};

/// Fraction of the operand's largest gradient magnitude below which entries are
/// compared against that floor instead of their own size.
inline constexpr double kScaleFloor = 1e-2;

/// |analytic - numeric| / max(|analytic|, |numeric|, 1e-3, kScaleFloor * scale).
/// `scale` is the largest numeric gradient magnitude of the operand, so
/// near-zero entries are judged against float32 finite-difference resolution
/// rather than their own size.
[[nodiscard]] double relative_error(double analytic, double numeric, double scale = 0.0) noexcept;

/// Central-difference check of `op` against its recorded backward pass. The
/// scalar probed is sum(output * R) for a fixed random R per case, so every
/// output element contributes.
template <typename T>
GradCheckReport gradient_check(std::string_view name, std::span<const std::string> operand_names,
                               const OpUnderTest<T>& op, const CaseGenerator<T>& generate,
                               const GradCheckOptions& options);

/// The primitive suite: conv2d, maxpool2, bilinear_up2, bilinear_down, relu, add, mse.
[[nodiscard]] const std::vector<std::string>& gradcheck_op_names();

/// Runs the named primitive (or "all") in the given precision. Throws
/// UsageError for unknown names.
GradCheckReport run_gradcheck(std::string_view op, Precision precision,
                              const GradCheckOptions& options);

} // namespace oucd
