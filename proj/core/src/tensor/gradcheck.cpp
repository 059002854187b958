#include "oucd/tensor/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <memory>
#include <numeric>
#include <sstream>

#include "oucd/common/error.hpp"

namespace oucd {
namespace {

template <typename T>
Tensor<T> uniform(Shape s, Rng& rng, double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    Tensor<T> t(s);
    for (auto& v : t.data()) {
        v = static_cast<T>(dist(rng));
    }
    return t;
}

int pick(Rng& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

template <typename T>
constexpr double fd_step() {
    return std::is_same_v<T, float> ? 1e-3 : 1e-6;
}

template <typename T>
double probe(const OpUnderTest<T>& op, const std::vector<Tensor<T>>& operands,
             const Tensor<T>& weights) {
    Tape<T> tape(false);
    std::vector<Var> vars;
    vars.reserve(operands.size());
    for (const auto& t : operands) {
        vars.push_back(tape.constant(t));
    }
    const Tensor<T>& out = tape.value(op(tape, vars));
    double acc = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        acc += static_cast<double>(out.data()[i]) * static_cast<double>(weights.data()[i]);
    }
    return acc;
}

template <typename T>
GradCheckReport run_primitive(std::string_view name, Precision precision,
                              const GradCheckOptions& options) {
    using Ops = std::vector<Tensor<T>>;
    std::vector<std::string> operands;
    OpUnderTest<T> op;
    CaseGenerator<T> gen;

    if (name == "conv2d") {
        // Stride and padding are drawn per case and shared with the op closure.
        operands = {"input", "weight", "bias"};
        struct Geo {
            int stride, pad;
        };
        auto geo = std::make_shared<Geo>();
        gen = [geo](Rng& rng) {
            const int k = pick(rng, 0, 1) == 0 ? 1 : 3;
            geo->stride = pick(rng, 1, 2);
            geo->pad = k == 3 ? pick(rng, 0, 1) : 0;
            const int n = pick(rng, 1, 2);
            const int cin = pick(rng, 1, 3);
            const int cout = pick(rng, 1, 3);
            const int h = pick(rng, k + 1, 7);
            const int w = pick(rng, k + 1, 7);
            return Ops{uniform<T>({n, cin, h, w}, rng, -1, 1),
                       uniform<T>({cout, cin, k, k}, rng, -1, 1),
                       uniform<T>({cout, 1, 1, 1}, rng, -1, 1)};
        };
        op = [geo](Tape<T>& t, std::span<const Var> v) {
            return t.conv2d(v[0], v[1], v[2], geo->stride, geo->pad);
        };
    } else if (name == "maxpool2") {
        operands = {"input"};
        gen = [](Rng& rng) {
            const Shape s{pick(rng, 1, 2), pick(rng, 1, 2), 2 * pick(rng, 1, 3),
                          2 * pick(rng, 1, 3)};
            // Distinct values spaced 0.01 apart so no window sits on a tie.
            std::vector<int> order(s.numel());
            std::iota(order.begin(), order.end(), 0);
            std::shuffle(order.begin(), order.end(), rng);
            Tensor<T> x(s);
            for (std::size_t i = 0; i < order.size(); ++i) {
                x.data()[i] = static_cast<T>(0.01 * order[i] - 0.5);
            }
            return Ops{x};
        };
        op = [](Tape<T>& t, std::span<const Var> v) { return t.maxpool2(v[0]); };
    } else if (name == "bilinear_up2") {
        operands = {"input"};
        gen = [](Rng& rng) {
            return Ops{uniform<T>({pick(rng, 1, 2), pick(rng, 1, 2), pick(rng, 1, 5),
                                   pick(rng, 1, 5)},
                                  rng, -1, 1)};
        };
        op = [](Tape<T>& t, std::span<const Var> v) { return t.upsample2(v[0]); };
    } else if (name == "bilinear_down") {
        operands = {"input"};
        auto factor = std::make_shared<int>(2);
        gen = [factor](Rng& rng) {
            *factor = pick(rng, 0, 1) == 0 ? 2 : 4;
            return Ops{uniform<T>({pick(rng, 1, 2), pick(rng, 1, 2), *factor * pick(rng, 1, 3),
                                   *factor * pick(rng, 1, 3)},
                                  rng, -1, 1)};
        };
        op = [factor](Tape<T>& t, std::span<const Var> v) {
            return t.downsample(v[0], *factor);
        };
    } else if (name == "relu") {
        operands = {"input"};
        gen = [](Rng& rng) {
            // Bounded away from the kink by 0.1.
            Tensor<T> x = uniform<T>({pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 6),
                                      pick(rng, 1, 6)},
                                     rng, 0.1, 1.0);
            std::bernoulli_distribution sign(0.5);
            for (auto& v : x.data()) {
                if (sign(rng)) {
                    v = -v;
                }
            }
            return Ops{x};
        };
        op = [](Tape<T>& t, std::span<const Var> v) { return t.relu(v[0]); };
    } else if (name == "add") {
        operands = {"a", "b"};
        gen = [](Rng& rng) {
            const Shape s{pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 5)};
            return Ops{uniform<T>(s, rng, -1, 1), uniform<T>(s, rng, -1, 1)};
        };
        op = [](Tape<T>& t, std::span<const Var> v) { return t.add(v[0], v[1]); };
    } else if (name == "mse") {
        operands = {"prediction", "target"};
        gen = [](Rng& rng) {
            const Shape s{pick(rng, 1, 2), pick(rng, 1, 3), pick(rng, 1, 5), pick(rng, 1, 5)};
            return Ops{uniform<T>(s, rng, 0, 1), uniform<T>(s, rng, 0, 1)};
        };
        op = [](Tape<T>& t, std::span<const Var> v) { return t.mse(v[0], v[1]); };
    } else {
        throw UsageError("unknown gradcheck op '" + std::string(name) + "'");
    }
    GradCheckReport report = gradient_check<T>(name, operands, op, gen, options);
    for (auto& row : report.rows) {
        row.precision = precision;
    }
    return report;
}

} // namespace

std::string_view to_string(Precision p) noexcept {
    return p == Precision::single ? "float32" : "float64";
}

double relative_error(double analytic, double numeric, double scale) noexcept {
    const double denom =
        std::max({std::abs(analytic), std::abs(numeric), 1e-3, kScaleFloor * scale});
    return std::abs(analytic - numeric) / denom;
}

bool GradCheckReport::passed() const {
    return !rows.empty() &&
           std::all_of(rows.begin(), rows.end(), [](const auto& r) { return r.passed; });
}

void GradCheckReport::append(const GradCheckReport& other) {
    rows.insert(rows.end(), other.rows.begin(), other.rows.end());
}

std::string GradCheckReport::to_table() const {
    std::ostringstream out;
    out << std::left << std::setw(15) << "op" << std::setw(12) << "operand" << std::setw(9)
        << "dtype" << std::setw(7) << "cases" << std::setw(14) << "max_rel_err" << std::setw(11)
        << "tolerance" << "result\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(15) << r.op << std::setw(12) << r.operand << std::setw(9)
            << to_string(r.precision) << std::setw(7) << r.cases << std::setw(14)
            << std::scientific << std::setprecision(3) << r.max_rel_error << std::setw(11)
            << r.tolerance << std::defaultfloat << (r.passed ? "PASS" : "FAIL") << "\n";
    }
    return out.str();
}

template <typename T>
GradCheckReport gradient_check(std::string_view name, std::span<const std::string> operand_names,
                               const OpUnderTest<T>& op, const CaseGenerator<T>& generate,
                               const GradCheckOptions& options) {
    const double tol = options.tolerance > 0 ? options.tolerance
                                             : (std::is_same_v<T, float> ? 1e-2 : 1e-5);
    const double h = fd_step<T>();
    Rng rng(options.seed ^ fnv1a64(name));
    std::vector<double> worst(operand_names.size(), 0.0);

    for (int c = 0; c < options.cases; ++c) {
        std::vector<Tensor<T>> operands = generate(rng);
        if (operands.size() != operand_names.size()) {
            throw ContractError("gradient_check: generator produced the wrong operand count");
        }

        Tape<T> tape;
        std::vector<Var> vars;
        for (const auto& t : operands) {
            vars.push_back(tape.input(t));
        }
        const Var out = op(tape, vars);
        Tensor<T> weights = uniform<T>(tape.value(out).shape(), rng, -1, 1);
        tape.backward(tape.dot(out, weights));

        for (std::size_t k = 0; k < operands.size(); ++k) {
            const Tensor<T>& analytic = tape.grad(vars[k]);
            std::vector<double> numeric(operands[k].size());
            double scale = 0.0;
            for (std::size_t i = 0; i < operands[k].size(); ++i) {
                // Divide by the step actually representable in T, not the nominal 2h.
                const T saved = operands[k].data()[i];
                const T hi = static_cast<T>(saved + h);
                const T lo = static_cast<T>(saved - h);
                operands[k].data()[i] = hi;
                const double up = probe(op, operands, weights);
                operands[k].data()[i] = lo;
                const double down = probe(op, operands, weights);
                operands[k].data()[i] = saved;
                numeric[i] = (up - down) / (static_cast<double>(hi) - static_cast<double>(lo));
                scale = std::max(scale, std::abs(numeric[i]));
            }
            for (std::size_t i = 0; i < numeric.size(); ++i) {
                worst[k] = std::max(worst[k],
                                    relative_error(analytic.data()[i], numeric[i], scale));
            }
        }
    }

    GradCheckReport report;
    for (std::size_t k = 0; k < operand_names.size(); ++k) {
        report.rows.push_back(GradCheckRow{std::string(name), operand_names[k],
                                           std::is_same_v<T, float> ? Precision::single
                                                                    : Precision::shadow,
                                           options.cases, worst[k], tol, worst[k] <= tol});
    }
    return report;
}

template GradCheckReport gradient_check<float>(std::string_view, std::span<const std::string>,
                                               const OpUnderTest<float>&,
                                               const CaseGenerator<float>&,
                                               const GradCheckOptions&);
template GradCheckReport gradient_check<double>(std::string_view, std::span<const std::string>,
                                                const OpUnderTest<double>&,
                                                const CaseGenerator<double>&,
                                                const GradCheckOptions&);

const std::vector<std::string>& gradcheck_op_names() {
    static const std::vector<std::string> names = {"conv2d", "maxpool2",      "bilinear_up2",
                                                   "bilinear_down", "relu", "add", "mse"};
    return names;
}

GradCheckReport run_gradcheck(std::string_view op, Precision precision,
                              const GradCheckOptions& options) {
    if (op == "all") {
        GradCheckReport all;
        for (const auto& name : gradcheck_op_names()) {
            all.append(run_gradcheck(name, precision, options));
        }
        return all;
    }
    if (std::find(gradcheck_op_names().begin(), gradcheck_op_names().end(), op) ==
        gradcheck_op_names().end()) {
        throw UsageError("unknown gradcheck op '" + std::string(op) + "'");
    }
    return precision == Precision::single ? run_primitive<float>(op, precision, options)
                                          : run_primitive<double>(op, precision, options);
}

} // namespace oucd
