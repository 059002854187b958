#include "oucd/model/feature_dump.hpp"

#include <algorithm>
#include <iomanip>
#include <sstream>

#include "oucd/common/error.hpp"
#include "oucd/data/image_io.hpp"

namespace oucd {

std::vector<std::string> match_taps(const std::vector<std::string>& available,
                                    const std::string& selector) {
    std::vector<std::string> out;
    for (const auto& name : available) {
        bool hit = name == selector || selector == "*";
        if (!hit && selector.ends_with(".*")) {
            const std::string prefix = selector.substr(0, selector.size() - 1);
            hit = name.starts_with(prefix);
        }
        if (hit) {
            out.push_back(name);
        }
    }
    if (out.empty()) {
        std::string known;
        for (const auto& name : available) {
            known += (known.empty() ? "" : ", ") + name;
        }
        throw UsageError("unknown layer selector '" + selector + "' (available: " + known + ")");
    }
    return out;
}

DumpResult dump_feature_maps(const Network<float>& net, const Tensor<float>& y,
                             const std::string& selector, const std::filesystem::path& out_dir) {
    if (y.shape().n != 1) {
        throw UsageError("feature dump expects a single image");
    }
    Tape<float> tape(false);
    // A non-recording tape never writes to parameters, so binding through a const network is safe.
    auto fwd = const_cast<Network<float>&>(net).forward(tape, tape.frozen(y));

    std::vector<std::string> names;
    for (const auto& [name, var] : fwd.taps) {
        names.push_back(name);
    }
    const auto selected = match_taps(names, selector);

    std::filesystem::create_directories(out_dir);
    DumpResult result;
    for (const auto& [name, var] : fwd.taps) {
        if (std::find(selected.begin(), selected.end(), name) == selected.end()) {
            continue;
        }
        const Tensor<float>& t = tape.value(var);
        const Shape& s = t.shape();
        for (int c = 0; c < s.c; ++c) {
            const float* p = t.plane(0, c);
            const auto [lo, hi] = std::minmax_element(p, p + s.plane());
            std::vector<float> norm(s.plane(), 0.0F);
            std::ostringstream label;
            label << name << "_c" << std::setw(3) << std::setfill('0') << c;
            if (*hi > *lo) {
                const float range = *hi - *lo;
                std::transform(p, p + s.plane(), norm.begin(),
                               [&](float v) { return (v - *lo) / range; });
            } else {
                result.flat_maps.push_back(label.str());
            }
            const auto path = out_dir / (label.str() + ".png");
            save_gray(norm, s.h, s.w, path);
            result.files.push_back(path);
        }
    }
    return result;
}

} // namespace oucd
