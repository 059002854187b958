#include "oucd/model/receptive_field.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>

#include "oucd/common/error.hpp"

namespace oucd {

std::string_view to_string(BranchKind b) noexcept {
    return b == BranchKind::overcomplete ? "overcomplete" : "undercomplete";
}

double receptive_field(const RfQuery& q) {
    if (q.layer < 1) {
        throw UsageError("receptive field layer index must be >= 1");
    }
    if (q.kernel < 1) {
        throw UsageError("receptive field kernel must be >= 1");
    }
    const double k = q.kernel;
    const int steps = q.layer - 1;
    // Exact in binary floating point for any reasonable depth.
    return q.branch == BranchKind::undercomplete ? std::ldexp(k, steps) : std::ldexp(k, -steps);
}

std::vector<RfRow> receptive_field_table(int kernel, int max_layer) {
    if (max_layer < 1) {
        throw UsageError("max layer must be >= 1");
    }
    std::vector<RfRow> rows;
    for (int i = 1; i <= max_layer; ++i) {
        rows.push_back({i, receptive_field({BranchKind::undercomplete, i, kernel}),
                        receptive_field({BranchKind::overcomplete, i, kernel})});
    }
    return rows;
}

std::string format_rf_table(int kernel, const std::vector<RfRow>& rows) {
    std::ostringstream os;
    os << "receptive field side length (input pixels), k = " << kernel << "\n";
    os << std::left << std::setw(8) << "layer" << std::setw(16) << "undercomplete"
       << "overcomplete\n";
    for (const auto& r : rows) {
        std::ostringstream u;
        std::ostringstream o;
        u << std::setprecision(12) << r.undercomplete;
        o << std::setprecision(12) << r.overcomplete;
        os << std::setw(8) << r.layer << std::setw(16) << u.str() << o.str() << "\n";
    }
    return os.str();
}

} // namespace oucd
