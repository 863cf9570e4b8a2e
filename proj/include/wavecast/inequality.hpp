#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "wavecast/common.hpp"

namespace wavecast {

/// Lorenz curve (cumulative population share vs cumulative usage share,
/// ascending-sorted) plus the Gini coefficient.
struct LorenzResult {
    std::vector<std::pair<double, double>> curve;  // (pop share, usage share), (0,0) .. (1,1)
    double gini = 0.0;
};

/// Population Gini on ascending-sorted x (1-based rank i):
///   G = sum_i (2i - N - 1) x_i / (N^2 mu).
inline LorenzResult gini_lorenz(std::vector<double> usage_counts) {
    if (usage_counts.empty()) throw std::invalid_argument("gini_lorenz: empty input");
    for (double v : usage_counts)
        if (v < 0.0 || !std::isfinite(v))
            throw std::invalid_argument("gini_lorenz: counts must be finite and >= 0");
    std::sort(usage_counts.begin(), usage_counts.end());
    const std::size_t n = usage_counts.size();
    KahanSum total;
    for (double v : usage_counts) total.add(v);
    const double sum = total.value();
    if (sum <= 0.0) throw std::invalid_argument("gini_lorenz: all counts are zero");

    LorenzResult r;
    r.curve.reserve(n + 1);
    r.curve.emplace_back(0.0, 0.0);
    KahanSum cum, weighted;
    for (std::size_t i = 0; i < n; ++i) {
        cum.add(usage_counts[i]);
        weighted.add((2.0 * static_cast<double>(i + 1) - static_cast<double>(n) - 1.0) *
                     usage_counts[i]);
        r.curve.emplace_back(static_cast<double>(i + 1) / static_cast<double>(n),
                             cum.value() / sum);
    }
    r.gini = weighted.value() / (static_cast<double>(n) * static_cast<double>(n) * (sum /
             static_cast<double>(n)));
    return r;
}

/// Two-parameter Pareto fit P(X <= x) = 1 - (scale/x)^shape, maximum
/// likelihood on the tail: scale = min(x), shape = n / sum(ln(x/scale)).
struct ParetoFit {
    double scale = 0.0;
    double shape = 0.0;

    double cdf(double x) const {
        if (x <= scale) return 0.0;
        return 1.0 - std::pow(scale / x, shape);
    }
};

inline ParetoFit pareto_cdf_fit(const std::vector<double>& frequencies) {
    if (frequencies.size() < 2) throw std::invalid_argument("pareto_cdf_fit: need >= 2 points");
    double scale = *std::min_element(frequencies.begin(), frequencies.end());
    if (scale <= 0.0) throw std::invalid_argument("pareto_cdf_fit: frequencies must be > 0");
    KahanSum logsum;
    for (double x : frequencies) logsum.add(std::log(x / scale));
    double denom = logsum.value();
    if (denom <= 0.0) throw std::invalid_argument("pareto_cdf_fit: degenerate tail");
    return {scale, static_cast<double>(frequencies.size()) / denom};
}

}  // namespace wavecast
