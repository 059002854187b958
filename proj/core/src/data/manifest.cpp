#include "oucd/data/manifest.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "oucd/common/error.hpp"
#include "oucd/common/rng.hpp"
#include "oucd/data/image_io.hpp"

namespace fs = std::filesystem;

namespace oucd {

std::string clean_entry(const std::string& rainy_entry) {
    constexpr std::string_view prefix = "rainy/";
    if (!rainy_entry.starts_with(prefix)) {
        throw UsageError("manifest entry '" + rainy_entry + "' does not start with rainy/");
    }
    return "clean/" + rainy_entry.substr(prefix.size());
}

std::array<Manifest, 3> build_manifest(const fs::path& dir, const std::array<double, 3>& fractions,
                                       std::uint64_t seed) {
    double total = 0.0;
    for (const double f : fractions) {
        if (!(f >= 0.0)) {
            throw UsageError("split fractions must be non-negative");
        }
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-9) {
        throw UsageError("split fractions must sum to 1");
    }

    std::vector<std::string> names;
    const fs::path rainy = dir / "rainy";
    if (fs::is_directory(rainy)) {
        for (const auto& e : fs::directory_iterator(rainy)) {
            if (e.is_regular_file() && e.path().extension() == ".png") {
                names.push_back(e.path().filename().string());
            }
        }
    }
    if (names.empty()) {
        throw UsageError(dir.string() + ": no rainy/*.png images");
    }
    std::sort(names.begin(), names.end());
    for (const auto& n : names) {
        if (!fs::is_regular_file(dir / "clean" / n)) {
            throw IoError((dir / "clean" / n).string() + ": missing clean image");
        }
    }

    Rng rng(derive_seed(seed, "manifest"));
    std::shuffle(names.begin(), names.end(), rng);

    const auto n = static_cast<double>(names.size());
    const auto n_train = static_cast<std::size_t>(std::llround(fractions[0] * n));
    const auto n_val =
        std::min(names.size() - n_train, static_cast<std::size_t>(std::llround(fractions[1] * n)));
    const std::array<std::size_t, 4> bounds{0, n_train, n_train + n_val, names.size()};

    std::array<Manifest, 3> out;
    for (std::size_t s = 0; s < 3; ++s) {
        out[s].seed = seed;
        out[s].fractions = fractions;
        out[s].root = dir;
        for (std::size_t i = bounds[s]; i < bounds[s + 1]; ++i) {
            out[s].entries.push_back("rainy/" + names[i]);
        }
        std::sort(out[s].entries.begin(), out[s].entries.end());
        write_manifest(out[s], dir / (std::string(kSplitNames[s]) + ".txt"));
    }
    return out;
}

void write_manifest(const Manifest& m, const fs::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) {
        throw IoError(path.string() + ": cannot write manifest");
    }
    os << "#seed=" << m.seed << " fractions=" << std::setprecision(17) << m.fractions[0] << ","
       << m.fractions[1] << "," << m.fractions[2] << "\n";
    for (const auto& e : m.entries) {
        os << e << "\n";
    }
    if (!os) {
        throw IoError(path.string() + ": write failed");
    }
}

Manifest read_manifest(const fs::path& path) {
    std::ifstream is(path);
    if (!is) {
        throw IoError(path.string() + ": cannot read manifest");
    }
    Manifest m;
    m.root = path.parent_path();
    std::string header;
    std::getline(is, header);
    char comma1 = 0;
    char comma2 = 0;
    std::istringstream hs(header);
    std::string seed_tok;
    std::string frac_tok;
    hs >> seed_tok >> frac_tok;
    if (!seed_tok.starts_with("#seed=") || !frac_tok.starts_with("fractions=")) {
        throw UsageError(path.string() + ": missing '#seed=<u64> fractions=<a,b,c>' header");
    }
    try {
        m.seed = std::stoull(seed_tok.substr(6));
    } catch (const std::exception&) {
        throw UsageError(path.string() + ": bad seed in header");
    }
    std::istringstream fs_(frac_tok.substr(10));
    if (!(fs_ >> m.fractions[0] >> comma1 >> m.fractions[1] >> comma2 >> m.fractions[2]) ||
        comma1 != ',' || comma2 != ',') {
        throw UsageError(path.string() + ": bad fractions in header");
    }
    std::string line;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (!line.empty()) {
            m.entries.push_back(line);
        }
    }
    return m;
}

fs::path manifest_path(const fs::path& dataset, const std::string& split) {
    if (fs::is_regular_file(dataset)) {
        return dataset;
    }
    return dataset / (split + ".txt");
}

std::vector<ImagePair> load_pairs(const Manifest& m) {
    std::vector<ImagePair> out;
    out.reserve(m.entries.size());
    for (const auto& e : m.entries) {
        ImagePair p{fs::path(e).stem().string(), load_image(m.root / e),
                    load_image(m.root / clean_entry(e))};
        if (!(p.rainy.shape() == p.clean.shape())) {
            throw IoError((m.root / e).string() + ": rainy and clean sizes differ");
        }
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace oucd
