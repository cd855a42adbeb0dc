#include "drl/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "drl/errors.hpp"

namespace drl {

MetricsReport metrics(const ConstraintSet& pi, const Matrix& dataset, double tol) {
    if (dataset.cols != pi.dimension()) {
        throw DimensionMismatch("dataset has " + std::to_string(dataset.cols) + " columns, constraints expect " +
                                std::to_string(pi.dimension()));
    }
    MetricsReport report;
    report.n_rows = dataset.rows;
    report.n_constraints = pi.size();
    report.per_constraint_violation_counts.assign(pi.size(), 0);
    if (pi.empty() || dataset.rows == 0) return report;

    const SetEvaluator eval(pi);
    long double scvc_sum = 0;
    for (std::size_t r = 0; r < dataset.rows; ++r) {
        std::size_t violated = 0;
        for (std::size_t c = 0; c < pi.size(); ++c) {
            if (!eval.constraint_satisfied(c, dataset.row(r), tol)) {
                ++violated;
                ++report.per_constraint_violation_counts[c];
            }
        }
        if (violated > 0) ++report.violating_rows;
        scvc_sum += 100.0L * violated / pi.size();
    }
    const auto n = static_cast<double>(dataset.rows);
    const auto m = static_cast<double>(pi.size());
    report.cvr = 100.0 * static_cast<double>(report.violating_rows) / n;
    report.scvc = static_cast<double>(scvc_sum / dataset.rows);
    const auto hit = std::count_if(report.per_constraint_violation_counts.begin(),
                                   report.per_constraint_violation_counts.end(),
                                   [](std::size_t k) { return k > 0; });
    report.cvc = 100.0 * static_cast<double>(hit) / m;
    return report;
}

const char* to_string(VariableOrdering::Method method) {
    switch (method) {
        case VariableOrdering::Method::given: return "given";
        case VariableOrdering::Method::random: return "random";
        case VariableOrdering::Method::corr: return "corr";
        case VariableOrdering::Method::kde: return "kde";
    }
    return "?";
}

VariableOrdering ordering_given(std::size_t dimension) {
    VariableOrdering out;
    out.permutation.resize(dimension);
    std::iota(out.permutation.begin(), out.permutation.end(), VarIndex{0});
    return out;
}

namespace {

// Uniform in [0, bound) by rejection on the top of the 64-bit range.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % bound;
    std::uint64_t x = rng();
    while (x >= limit) x = rng();
    return x % bound;
}

std::vector<VarIndex> rank_ascending(const std::vector<double>& scores) {
    std::vector<VarIndex> order(scores.size());
    std::iota(order.begin(), order.end(), VarIndex{0});
    std::stable_sort(order.begin(), order.end(), [&](VarIndex a, VarIndex b) { return scores[a] < scores[b]; });
    return order;
}

void check_pair(const Matrix& real, const Matrix& synthetic) {
    if (real.cols != synthetic.cols) {
        throw DimensionMismatch("real data has " + std::to_string(real.cols) + " columns, synthetic data " +
                                std::to_string(synthetic.cols));
    }
}

}  // namespace

VariableOrdering ordering_random(std::size_t dimension, std::uint64_t seed) {
    VariableOrdering out = ordering_given(dimension);
    out.method = VariableOrdering::Method::random;
    out.seed = seed;
    std::mt19937_64 rng(seed);
    for (std::size_t i = dimension; i > 1; --i) {
        const auto j = static_cast<std::size_t>(bounded(rng, i));
        std::swap(out.permutation[i - 1], out.permutation[j]);
    }
    return out;
}

std::vector<double> correlation_matrix(const Matrix& data) {
    const std::size_t n = data.rows;
    const std::size_t d = data.cols;
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    std::sort(rows.begin(), rows.end(), [&](std::size_t a, std::size_t b) {
        auto ra = data.row(a);
        auto rb = data.row(b);
        return std::lexicographical_compare(ra.begin(), ra.end(), rb.begin(), rb.end());
    });

    std::vector<long double> mean(d, 0);
    for (std::size_t r : rows)
        for (std::size_t j = 0; j < d; ++j) mean[j] += data(r, j);
    for (auto& m : mean) m /= static_cast<long double>(n);

    std::vector<long double> cov(d * d, 0);
    for (std::size_t r : rows) {
        for (std::size_t j = 0; j < d; ++j) {
            const long double dj = data(r, j) - mean[j];
            for (std::size_t k = j; k < d; ++k) cov[j * d + k] += dj * (data(r, k) - mean[k]);
        }
    }
    std::vector<double> corr(d * d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t k = j; k < d; ++k) {
            const long double vj = cov[j * d + j];
            const long double vk = cov[k * d + k];
            double c = 0.0;
            if (vj > 0 && vk > 0) c = static_cast<double>(cov[j * d + k] / std::sqrt(vj * vk));
            corr[j * d + k] = c;
            corr[k * d + j] = c;
        }
    }
    return corr;
}

VariableOrdering ordering_corr(const Matrix& real, const Matrix& synthetic) {
    check_pair(real, synthetic);
    if (real.rows < 2 || synthetic.rows < 2) throw Error("correlation ordering needs at least two rows per table");
    const std::size_t d = real.cols;
    const auto cr = correlation_matrix(real);
    const auto cs = correlation_matrix(synthetic);
    VariableOrdering out;
    out.method = VariableOrdering::Method::corr;
    out.scores.assign(d, 0.0);
    for (std::size_t j = 0; j < d; ++j) {
        long double s = 0;
        for (std::size_t k = 0; k < d; ++k) {
            if (k != j) s += std::fabs(cr[j * d + k] - cs[j * d + k]);
        }
        out.scores[j] = static_cast<double>(s);
    }
    out.permutation = rank_ascending(out.scores);
    return out;
}

double histogram_kl(std::span<const double> real, std::span<const double> synthetic, std::size_t bins,
                    double alpha) {
    if (bins < 2) throw Error("histogram needs at least two bins");
    if (real.empty() || synthetic.empty()) throw Error("histogram needs at least one value per table");
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (auto v : {real, synthetic}) {
        for (double x : v) {
            lo = std::min(lo, x);
            hi = std::max(hi, x);
        }
    }
    if (!(hi > lo)) return 0.0;

    auto histogram = [&](std::span<const double> values) {
        std::vector<long double> h(bins, 0);
        const long double width = static_cast<long double>(hi) - lo;
        for (double x : values) {
            auto b = static_cast<std::size_t>((static_cast<long double>(x) - lo) / width * bins);
            h[std::min(b, bins - 1)] += 1;
        }
        const long double total = static_cast<long double>(values.size()) + alpha * bins;
        for (auto& p : h) p = (p + alpha) / total;
        return h;
    };
    const auto p = histogram(real);
    const auto q = histogram(synthetic);
    long double kl = 0;
    for (std::size_t b = 0; b < bins; ++b) kl += p[b] * std::log(p[b] / q[b]);
    return static_cast<double>(std::max<long double>(kl, 0));
}

VariableOrdering ordering_kde(const Matrix& real, const Matrix& synthetic, std::size_t bins) {
    check_pair(real, synthetic);
    const std::size_t d = real.cols;
    VariableOrdering out;
    out.method = VariableOrdering::Method::kde;
    out.bins = bins;
    out.scores.assign(d, 0.0);
    std::vector<double> a(real.rows);
    std::vector<double> b(synthetic.rows);
    for (std::size_t j = 0; j < d; ++j) {
        for (std::size_t r = 0; r < real.rows; ++r) a[r] = real(r, j);
        for (std::size_t r = 0; r < synthetic.rows; ++r) b[r] = synthetic(r, j);
        out.scores[j] = histogram_kl(a, b, bins);
    }
    out.permutation = rank_ascending(out.scores);
    return out;
}

bool is_permutation_of_iota(std::span<const VarIndex> permutation) {
    std::vector<bool> seen(permutation.size(), false);
    for (VarIndex v : permutation) {
        if (v >= permutation.size() || seen[v]) return false;
        seen[v] = true;
    }
    return true;
}

}  // namespace drl
