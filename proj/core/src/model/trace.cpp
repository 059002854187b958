#include "oucd/model/trace.hpp"

#include <algorithm>
#include <array>
#include <sstream>

namespace oucd {
namespace {

// Display width in code points; the tables use the multi-byte "×".
std::size_t display_width(const std::string& s) {
    return static_cast<std::size_t>(
        std::count_if(s.begin(), s.end(), [](char c) { return (c & 0xC0) != 0x80; }));
}

std::string pad(const std::string& s, std::size_t width) {
    const std::size_t w = display_width(s);
    return s + std::string(width > w ? width - w : 0, ' ');
}

} // namespace

std::string size_label(const Shape& s) {
    return std::to_string(s.c) + " × " + std::to_string(s.h) + " × " + std::to_string(s.w);
}

std::vector<TraceRow> Trace::table_rows(const std::string& branch) const {
    std::vector<TraceRow> out;
    std::copy_if(rows_.begin(), rows_.end(), std::back_inserter(out),
                 [&](const TraceRow& r) { return r.table_row && r.branch == branch; });
    return out;
}

std::string Trace::to_table() const {
    const std::array<std::string, 8> header = {"Branch", "Block name", "Layer",
                                               "Kernel size/Scale Factor", "Filters",
                                               "Padding", "Input size", "Output size"};
    std::vector<std::array<std::string, 8>> cells;
    for (const auto& r : rows_) {
        cells.push_back({r.branch, r.block, r.layer, r.kernel, r.filters, r.padding,
                         size_label(r.input), size_label(r.output)});
    }
    std::array<std::size_t, 8> widths{};
    for (std::size_t i = 0; i < header.size(); ++i) {
        widths[i] = display_width(header[i]);
        for (const auto& row : cells) {
            widths[i] = std::max(widths[i], display_width(row[i]));
        }
    }
    std::ostringstream out;
    auto emit = [&](const std::array<std::string, 8>& row) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            out << (i ? " | " : "") << pad(row[i], widths[i]);
        }
        out << "\n";
    };
    emit(header);
    std::size_t total = 0;
    for (const auto w : widths) {
        total += w + 3;
    }
    out << std::string(total - 3, '-') << "\n";
    for (const auto& row : cells) {
        emit(row);
    }
    return out.str();
}

} // namespace oucd
