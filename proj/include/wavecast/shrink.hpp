#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "wavecast/common.hpp"
#include "wavecast/wavelet.hpp"

namespace wavecast {

enum class ThresholdRule { Hard, Soft };

enum class ThresholdSource { Manual, Universal, SureHybrid, Budget };

/// How to shrink a pyramid: the pointwise rule, where the threshold comes
/// from, the noise scale, and which levels are touched (1 = finest).
/// Budget selection is global over all detail levels and ignores the rule
/// and level range: it keeps values, it does not shrink them.
struct ThresholdSpec {
    ThresholdRule rule = ThresholdRule::Soft;
    ThresholdSource source = ThresholdSource::Universal;
    double manual_lambda = 0.0;
    int budget_level = 3;
    std::optional<double> sigma;  // nullopt = estimate from the finest HHH subband
    std::size_t level_lo = 1;
    std::size_t level_hi = std::numeric_limits<std::size_t>::max();

    void validate_for(const CoeffPyramid& pyr) const {
        if (source == ThresholdSource::Manual && manual_lambda < 0.0)
            throw std::invalid_argument("ThresholdSpec: manual threshold must be >= 0");
        if (source == ThresholdSource::Budget) {
            if (budget_level < 0) throw std::invalid_argument("ThresholdSpec: budget level < 0");
            return;  // budget is global; the level range does not apply
        }
        if (level_lo < 1 || level_lo > pyr.depth())
            throw std::invalid_argument("ThresholdSpec: level range out of bounds");
        std::size_t hi = std::min(level_hi, pyr.depth());
        if (hi < level_lo) throw std::invalid_argument("ThresholdSpec: empty level range");
    }
};

/// Keep-or-kill / shrink-toward-zero pointwise rules,
///   eta_H(d, lambda) = d * I[|d| > lambda]
///   eta_S(d, lambda) = sgn(d) (|d| - lambda) I[|d| > lambda].
inline double threshold_value(double d, double lambda, ThresholdRule rule) {
    if (std::abs(d) <= lambda) return 0.0;
    if (rule == ThresholdRule::Hard) return d;
    return d > 0.0 ? d - lambda : d + lambda;
}

struct SigmaEstimate {
    double sigma = 0.0;
    bool degenerate = false;  // finest HHH subband was identically zero
};

/// Robust noise scale: median(|finest HHH|) / 0.6745.
inline SigmaEstimate estimate_sigma(const CoeffPyramid& pyr) {
    if (pyr.depth() == 0) throw std::invalid_argument("estimate_sigma: empty pyramid");
    const auto& hhh = pyr.levels.front().hhh.raw();
    std::vector<double> mags(hhh.size());
    for (std::size_t i = 0; i < hhh.size(); ++i) mags[i] = std::abs(hhh[i]);
    std::size_t n = mags.size();
    std::nth_element(mags.begin(), mags.begin() + n / 2, mags.end());
    double med = mags[n / 2];
    if (n % 2 == 0) {
        double lower = *std::max_element(mags.begin(), mags.begin() + n / 2);
        med = 0.5 * (med + lower);
    }
    if (med == 0.0) return {0.0, true};
    return {med / 0.6745, false};
}

/// Donoho-Johnstone universal threshold sigma * sqrt(2 ln n).
inline double universal_threshold(double sigma, std::size_t n) {
    if (sigma < 0.0) throw std::invalid_argument("universal_threshold: sigma < 0");
    if (n < 2) throw std::invalid_argument("universal_threshold: n must be >= 2");
    return sigma * std::sqrt(2.0 * std::log(static_cast<double>(n)));
}

namespace detail {

/// SURE objective and minimizer on unit-noise data. Candidates are 0 plus
/// the distinct |y_i| not exceeding sqrt(2 ln n); ties pick the smallest
/// threshold. Sorted prefix sums give each candidate in O(1).
inline double sure_minimizer_unit(std::vector<double> mags) {
    const std::size_t n = mags.size();
    std::sort(mags.begin(), mags.end());
    std::vector<double> prefix(n + 1, 0.0);
    for (std::size_t i = 0; i < n; ++i) prefix[i + 1] = prefix[i] + mags[i] * mags[i];
    const double cap = std::sqrt(2.0 * std::log(static_cast<double>(n)));
    const double nd = static_cast<double>(n);

    double best_t = 0.0;
    double best_risk = nd;  // SURE(0) = n - 0 + 0
    for (std::size_t i = 0; i < n;) {
        std::size_t j = i;
        while (j + 1 < n && mags[j + 1] == mags[i]) ++j;
        double t = mags[i];
        if (t > cap) break;
        std::size_t cnt = j + 1;  // #{ |y| <= t }
        double risk = nd - 2.0 * static_cast<double>(cnt) + prefix[cnt] +
                      static_cast<double>(n - cnt) * t * t;
        if (risk < best_risk) {
            best_risk = risk;
            best_t = t;
        }
        i = j + 1;
    }
    return best_t;
}

}  // namespace detail

/// SureShrink threshold: minimize Stein's unbiased risk estimate over the
/// rescaled coefficients, falling back to the universal threshold when the
/// sparsity statistic (sum(y^2) - n)/n is at most (log2 n)^{3/2}/sqrt(n).
inline double sure_threshold(const std::vector<double>& d, double sigma) {
    if (d.empty()) throw std::invalid_argument("sure_threshold: empty coefficient vector");
    if (sigma <= 0.0) throw std::invalid_argument("sure_threshold: sigma must be > 0");
    const std::size_t n = d.size();
    std::vector<double> mags(n);
    KahanSum energy;
    for (std::size_t i = 0; i < n; ++i) {
        double y = d[i] / sigma;
        mags[i] = std::abs(y);
        energy.add(y * y);
    }
    const double nd = static_cast<double>(n);
    const double sparsity = (energy.value() - nd) / nd;
    const double log2n = std::log2(nd);
    if (sparsity <= std::pow(log2n, 1.5) / std::sqrt(nd))
        return n >= 2 ? universal_threshold(sigma, n) : 0.0;
    return sigma * detail::sure_minimizer_unit(std::move(mags));
}

/// What shrink_pyramid did. `coefficients_retained` is the nonzero detail
/// count surviving the rule (the table's Coeff column); the approximation
/// block is reported separately because it is never thresholded.
struct ShrinkReport {
    std::size_t coefficients_retained = 0;  // nonzero detail coefficients kept
    std::size_t approx_retained = 0;        // nonzero LLL entries (always kept)
    double compression_ratio = 0.0;         // records / coefficients_retained, when known
    std::vector<double> threshold_used;     // per level, index 0 = finest
    double sigma_used = 0.0;
};

/// records / retained. Reported rounded to integer in the tables.
inline double compression_ratio(std::size_t retained, std::uint64_t total_records) {
    if (retained == 0) throw std::invalid_argument("compression_ratio: retained must be >= 1");
    return static_cast<double>(total_records) / static_cast<double>(retained);
}

/// Retained-coefficient budget of the reference tables: level L keeps the
/// 7 * 2^L largest-magnitude detail coefficients.
inline std::size_t budget_coefficient_count(int level) {
    if (level < 0 || level > 56) throw std::invalid_argument("budget level out of range");
    return std::size_t{7} << static_cast<unsigned>(level);
}

namespace detail {

struct CoeffRef {
    double magnitude;
    std::uint32_t level;
    std::uint32_t subband;
    std::uint64_t index;
};

/// Keep the k largest magnitudes across all detail subbands, zero the rest.
/// Ties at the cut break by (level, subband order, linear index) ascending.
inline void apply_budget(CoeffPyramid& pyr, std::size_t k) {
    std::vector<CoeffRef> refs;
    std::size_t total = 0;
    for (const auto& lvl : pyr.levels)
        for (std::size_t s = 0; s < 7; ++s) total += lvl.by_index(s).size();
    refs.reserve(total);
    for (std::size_t j = 0; j < pyr.depth(); ++j)
        for (std::size_t s = 0; s < 7; ++s) {
            const auto& band = pyr.levels[j].by_index(s).raw();
            for (std::size_t i = 0; i < band.size(); ++i)
                refs.push_back({std::abs(band[i]), static_cast<std::uint32_t>(j),
                                static_cast<std::uint32_t>(s), i});
        }
    auto better = [](const CoeffRef& a, const CoeffRef& b) {
        if (a.magnitude != b.magnitude) return a.magnitude > b.magnitude;
        return std::tie(a.level, a.subband, a.index) < std::tie(b.level, b.subband, b.index);
    };
    if (k < refs.size())
        std::nth_element(refs.begin(), refs.begin() + static_cast<std::ptrdiff_t>(k), refs.end(),
                         better);
    std::vector<std::vector<std::uint8_t>> keep;
    for (std::size_t j = 0; j < pyr.depth(); ++j)
        for (std::size_t s = 0; s < 7; ++s)
            keep.emplace_back(pyr.levels[j].by_index(s).size(), 0);
    for (std::size_t i = 0; i < std::min(k, refs.size()); ++i)
        keep[refs[i].level * 7 + refs[i].subband][refs[i].index] = 1;
    for (std::size_t j = 0; j < pyr.depth(); ++j)
        for (std::size_t s = 0; s < 7; ++s) {
            auto& band = pyr.levels[j].by_index(s).raw();
            const auto& mask = keep[j * 7 + s];
            for (std::size_t i = 0; i < band.size(); ++i)
                if (!mask[i]) band[i] = 0.0;
        }
}

}  // namespace detail

/// Threshold the detail subbands of a pyramid. The approximation block is
/// never touched. Returns the shrunk pyramid and a report; pass the binned
/// record count to fill the compression column.
inline std::pair<CoeffPyramid, ShrinkReport> shrink_pyramid(
    const CoeffPyramid& pyramid, const ThresholdSpec& spec,
    std::optional<std::uint64_t> record_count = std::nullopt) {
    spec.validate_for(pyramid);
    CoeffPyramid out = pyramid;
    ShrinkReport report;
    report.threshold_used.assign(out.depth(), 0.0);

    double sigma = 0.0;
    if (spec.source == ThresholdSource::Universal || spec.source == ThresholdSource::SureHybrid) {
        if (spec.sigma)
            sigma = *spec.sigma;
        else
            sigma = estimate_sigma(pyramid).sigma;
        report.sigma_used = sigma;
    }

    const std::size_t lo = spec.level_lo;
    const std::size_t hi = std::min(spec.level_hi, out.depth());

    switch (spec.source) {
        case ThresholdSource::Budget: {
            std::size_t k = budget_coefficient_count(spec.budget_level);
            detail::apply_budget(out, k);
            // record the effective cutoff per level: the smallest kept magnitude
            for (std::size_t j = 0; j < out.depth(); ++j) {
                double cut = 0.0;
                bool any = false;
                for (std::size_t s = 0; s < 7; ++s)
                    for (double v : out.levels[j].by_index(s).raw())
                        if (v != 0.0) {
                            double m = std::abs(v);
                            if (!any || m < cut) cut = m;
                            any = true;
                        }
                report.threshold_used[j] = any ? cut : 0.0;
            }
            break;
        }
        case ThresholdSource::Manual:
        case ThresholdSource::Universal: {
            double lambda = spec.manual_lambda;
            if (spec.source == ThresholdSource::Universal) {
                std::size_t total = 1;
                for (std::size_t i = 0; i < 3; ++i) total *= pyramid.lll.nx() << pyramid.depth();
                lambda = sigma == 0.0 ? 0.0 : universal_threshold(sigma, total);
            }
            for (std::size_t j = lo - 1; j < hi; ++j) {
                report.threshold_used[j] = lambda;
                for (std::size_t s = 0; s < 7; ++s)
                    for (double& v : out.levels[j].by_index(s).raw())
                        v = threshold_value(v, lambda, spec.rule);
            }
            break;
        }
        case ThresholdSource::SureHybrid: {
            for (std::size_t j = lo - 1; j < hi; ++j) {
                std::vector<double> pooled;
                for (std::size_t s = 0; s < 7; ++s) {
                    const auto& band = out.levels[j].by_index(s).raw();
                    pooled.insert(pooled.end(), band.begin(), band.end());
                }
                double lambda = sigma > 0.0 ? sure_threshold(pooled, sigma) : 0.0;
                report.threshold_used[j] = lambda;
                for (std::size_t s = 0; s < 7; ++s)
                    for (double& v : out.levels[j].by_index(s).raw())
                        v = threshold_value(v, lambda, spec.rule);
            }
            break;
        }
    }

    for (const auto& lvl : out.levels)
        for (std::size_t s = 0; s < 7; ++s)
            for (double v : lvl.by_index(s).raw())
                if (v != 0.0) ++report.coefficients_retained;
    for (double v : out.lll.raw())
        if (v != 0.0) ++report.approx_retained;
    if (record_count && report.coefficients_retained > 0)
        report.compression_ratio = compression_ratio(report.coefficients_retained, *record_count);
    return {std::move(out), std::move(report)};
}

/// dwt3d -> shrink_pyramid -> idwt3d, nothing else.
inline std::pair<DemandTensor, ShrinkReport> denoise(
    const DemandTensor& tensor, const FilterBank& bank, std::size_t depth,
    const ThresholdSpec& spec, std::optional<std::uint64_t> record_count = std::nullopt) {
    CoeffPyramid pyr = dwt3d(tensor, bank, depth);
    auto [shrunk, report] = shrink_pyramid(pyr, spec, record_count);
    return {idwt3d(shrunk, bank), std::move(report)};
}

/// Evaluation-time option: zero out negative reconstructed demand.
inline void clamp_nonnegative(Tensor3& t) {
    for (double& v : t.raw())
        if (v < 0.0) v = 0.0;
}

}  // namespace wavecast
