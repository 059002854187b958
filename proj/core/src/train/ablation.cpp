#include "oucd/train/ablation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "oucd/train/evaluate.hpp"
#include "oucd/train/trainer.hpp"

namespace oucd {

AblationReport run_ablation(const TrainConfig& base, const std::vector<ImagePair>& train,
                            const std::vector<ImagePair>& test, std::ostream* log) {
    AblationReport out;
    for (const Variant v : ablation_order()) {
        TrainConfig cfg = base;
        cfg.model.variant = v;
        if (log) {
            *log << "# variant " << to_string(v) << "\n";
        }
        Trainer trainer(cfg, train);
        trainer.run(log);
        AblationRow row;
        row.variant = v;
        row.label = std::string(ablation_label(v));
        row.parameters = trainer.network().param_count();
        row.final_loss = trainer.history().empty() ? 0.0 : trainer.history().back().loss;
        row.report = evaluate(trainer.network(), test, std::string(to_string(v)));
        out.rows.push_back(std::move(row));
    }
    return out;
}

std::string AblationReport::to_text() const {
    std::size_t width = 7;
    for (const auto& r : rows) {
        width = std::max(width, r.label.size());
    }
    std::ostringstream os;
    os << std::left << std::setw(static_cast<int>(width) + 2) << "variant" << std::right
       << std::setw(9) << "PSNR" << std::setw(9) << "SSIM" << std::setw(12) << "params" << "\n";
    os << std::fixed;
    for (const auto& r : rows) {
        os << std::left << std::setw(static_cast<int>(width) + 2) << r.label << std::right
           << std::setw(9) << std::setprecision(2) << std::min(r.report.mean_psnr, kPsnrTextCap)
           << std::setw(9) << std::setprecision(4) << r.report.mean_ssim << std::setw(12)
           << r.parameters << "\n";
    }
    return os.str();
}

std::string AblationReport::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        const double p = r.report.mean_psnr;
        j.push_back({{"variant", std::string(to_string(r.variant))},
                     {"label", r.label},
                     {"parameters", r.parameters},
                     {"final_loss", r.final_loss},
                     {"mean_psnr_db", std::isfinite(p) ? nlohmann::json(p) : nlohmann::json(nullptr)},
                     {"mean_ssim", r.report.mean_ssim}});
    }
    return nlohmann::json{{"rows", j}}.dump(2) + "\n";
}

} // namespace oucd
