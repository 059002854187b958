#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace oucd {

enum class BranchKind { overcomplete, undercomplete };

[[nodiscard]] std::string_view to_string(BranchKind b) noexcept;

struct RfQuery {
    BranchKind branch = BranchKind::undercomplete;
    int layer = 1;
    int kernel = 3;
};

/// Side length, in input pixels, of the receptive field of block `layer`'s conv:
/// 2^(i-1) * k when pooling precedes it, (1/2)^(i-1) * k when upsampling does.
/// Throws UsageError if layer or kernel is below 1.
[[nodiscard]] double receptive_field(const RfQuery& q);

struct RfRow {
    int layer = 0;
    double undercomplete = 0.0;
    double overcomplete = 0.0;
};

[[nodiscard]] std::vector<RfRow> receptive_field_table(int kernel, int max_layer);
[[nodiscard]] std::string format_rf_table(int kernel, const std::vector<RfRow>& rows);

} // namespace oucd
