#pragma once

#include <string>
#include <vector>

#include "oucd/tensor/tensor.hpp"

namespace oucd {

/// One executed layer, laid out like the architecture tables: block name,
/// layer, kernel/scale factor, filters, padding, input size, output size.
struct TraceRow {
    std::string branch;  // "Overcomplete", "Undercomplete", "Fusion", "Output"
    std::string block;   // "Encoder", "Decoder", "MSFF", ...
    std::string layer;   // "Conv1", "Upsampling", "MaxPooling", "ReLU", "SkipAdd", ...
    std::string kernel;  // "3 × 3", "2 × 2", "-"
    std::string filters; // "32" or "-"
    std::string padding; // "1" or "-"
    Shape input;
    Shape output;
    /// Rows that correspond to a line of the published tables (conv/resample/ReLU
    /// inside a branch). Fusion bookkeeping rows are false.
    bool table_row = false;
};

/// "C × H × W" for the per-sample extent.
[[nodiscard]] std::string size_label(const Shape& s);

class Trace {
public:
    void add(TraceRow row) { rows_.push_back(std::move(row)); }
    [[nodiscard]] const std::vector<TraceRow>& rows() const noexcept { return rows_; }
    /// Rows of one branch that map onto table lines, in execution order.
    [[nodiscard]] std::vector<TraceRow> table_rows(const std::string& branch) const;
    /// Plain-text table with the same columns as the architecture tables.
    [[nodiscard]] std::string to_table() const;

private:
    std::vector<TraceRow> rows_;
};

} // namespace oucd
