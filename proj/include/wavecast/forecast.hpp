#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavecast/common.hpp"
#include "wavecast/tensor.hpp"

namespace wavecast {

/// Spatial slice of the denoised tensor at time t, used as the prediction
/// for time t + lead (persistence of the denoised signal).
inline std::vector<double> predict_at_lead(const Tensor3& denoised, std::size_t t,
                                           std::size_t lead) {
    if (t >= denoised.nz() || t + lead >= denoised.nz())
        throw std::out_of_range("predict_at_lead: time index out of range");
    std::vector<double> slice(denoised.nx() * denoised.ny());
    for (std::size_t i = 0; i < denoised.nx(); ++i)
        for (std::size_t j = 0; j < denoised.ny(); ++j)
            slice[i * denoised.ny() + j] = denoised(i, j, t);
    return slice;
}

/// MSE, MAE and the shape moments of an error sample. Kurtosis is
/// non-excess (m4 / m2^2); skewness and kurtosis are flagged undefined for
/// constant samples.
struct ErrorMoments {
    double mse = 0.0;
    double mae = 0.0;
    double skewness = 0.0;
    double kurtosis = 0.0;
    bool shape_defined = false;
};

inline ErrorMoments error_moments(std::span<const double> errors) {
    const std::size_t n = errors.size();
    if (n < 2) throw std::invalid_argument("error_moments: need at least 2 values");
    KahanSum sq, abs_, mean_;
    for (double e : errors) {
        sq.add(e * e);
        abs_.add(std::abs(e));
        mean_.add(e);
    }
    const double nd = static_cast<double>(n);
    ErrorMoments m;
    m.mse = sq.value() / nd;
    m.mae = abs_.value() / nd;
    const double mu = mean_.value() / nd;
    KahanSum m2, m3, m4;
    for (double e : errors) {
        double d = e - mu;
        double d2 = d * d;
        m2.add(d2);
        m3.add(d2 * d);
        m4.add(d2 * d2);
    }
    double c2 = m2.value() / nd;
    if (c2 > 0.0) {
        m.skewness = (m3.value() / nd) / std::pow(c2, 1.5);
        m.kurtosis = (m4.value() / nd) / (c2 * c2);
        m.shape_defined = true;
    } else {
        m.skewness = std::numeric_limits<double>::quiet_NaN();
        m.kurtosis = std::numeric_limits<double>::quiet_NaN();
    }
    return m;
}

/// One row of the predictive-performance table. `level` is the budget level
/// label, kLevelNone for the un-thresholded baseline. Percent columns are
/// signed fractions (-0.2239 means -22.39%) relative to the baseline row.
inline constexpr int kLevelNone = -1;

struct EvalReport {
    std::size_t periodicity = 0;
    int level = kLevelNone;
    std::size_t coeff = 0;
    double compress = 0.0;
    ErrorMoments moments;
    double pct_change_mse = 0.0;
    double pct_change_mae = 0.0;
    double pct_change_skew = 0.0;
};

/// Errors e(x,y,t) = truth(x,y,t+period) - denoised(x,y,t) over all valid t,
/// reduced to moments. Percent columns are left at zero; fill them against
/// the baseline row with apply_baseline.
inline EvalReport evaluate_periodicity(const Tensor3& truth, const Tensor3& denoised,
                                       std::size_t period) {
    if (!truth.same_shape(denoised))
        throw std::invalid_argument("evaluate_periodicity: shape mismatch");
    if (period == 0 || period >= truth.nz())
        throw std::invalid_argument("evaluate_periodicity: period must be in [1, nt)");
    std::vector<double> errors;
    errors.reserve(truth.nx() * truth.ny() * (truth.nz() - period));
    for (std::size_t i = 0; i < truth.nx(); ++i)
        for (std::size_t j = 0; j < truth.ny(); ++j)
            for (std::size_t t = 0; t + period < truth.nz(); ++t)
                errors.push_back(truth(i, j, t + period) - denoised(i, j, t));
    EvalReport r;
    r.periodicity = period;
    r.moments = error_moments(errors);
    return r;
}

inline double pct_change(double value, double baseline) {
    if (baseline == 0.0) return std::numeric_limits<double>::quiet_NaN();
    return (value - baseline) / baseline;
}

/// Fill the percent-change columns of `row` relative to `baseline`; the
/// baseline row itself stays at exactly 0.
inline void apply_baseline(EvalReport& row, const EvalReport& baseline) {
    if (&row == &baseline || row.level == kLevelNone) {
        row.pct_change_mse = row.pct_change_mae = row.pct_change_skew = 0.0;
        return;
    }
    row.pct_change_mse = pct_change(row.moments.mse, baseline.moments.mse);
    row.pct_change_mae = pct_change(row.moments.mae, baseline.moments.mae);
    row.pct_change_skew = pct_change(row.moments.skewness, baseline.moments.skewness);
}

/// Signed mean prediction error over the full spatial grid, per (period t,
/// lead l). Entries where t + l falls off the time axis are NaN.
struct ErrorSurface {
    std::size_t period_lo = 1, period_hi = 0;  // inclusive, 1-based time index
    std::size_t lead_lo = 1, lead_hi = 0;      // inclusive
    std::vector<double> values;                // period-major

    std::size_t periods() const { return period_hi - period_lo + 1; }
    std::size_t leads() const { return lead_hi - lead_lo + 1; }
    double at(std::size_t period, std::size_t lead) const {
        return values[(period - period_lo) * leads() + (lead - lead_lo)];
    }
};

inline ErrorSurface error_surface(const Tensor3& truth, const Tensor3& denoised,
                                  std::size_t period_lo, std::size_t period_hi,
                                  std::size_t lead_lo, std::size_t lead_hi) {
    if (!truth.same_shape(denoised)) throw std::invalid_argument("error_surface: shape mismatch");
    if (period_lo < 1 || period_lo > period_hi || period_hi > truth.nz())
        throw std::invalid_argument("error_surface: bad period range");
    if (lead_lo < 1 || lead_lo > lead_hi)
        throw std::invalid_argument("error_surface: bad lead range");
    ErrorSurface s;
    s.period_lo = period_lo;
    s.period_hi = period_hi;
    s.lead_lo = lead_lo;
    s.lead_hi = lead_hi;
    s.values.assign(s.periods() * s.leads(), std::numeric_limits<double>::quiet_NaN());
    const double cells = static_cast<double>(truth.nx() * truth.ny());
    for (std::size_t p = period_lo; p <= period_hi; ++p) {
        std::size_t t = p - 1;
        for (std::size_t l = lead_lo; l <= lead_hi; ++l) {
            if (t + l >= truth.nz()) break;
            KahanSum acc;
            for (std::size_t i = 0; i < truth.nx(); ++i)
                for (std::size_t j = 0; j < truth.ny(); ++j)
                    acc.add(truth(i, j, t + l) - denoised(i, j, t));
            s.values[(p - period_lo) * s.leads() + (l - lead_lo)] = acc.value() / cells;
        }
    }
    return s;
}

// --- CSV export ---

namespace detail {

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.10g", v);
    return buf;
}

}  // namespace detail

inline constexpr const char* kEvalCsvHeader =
    "level,coeff,compress,mse,mae,skew,kurt,pct_mse,pct_mae,pct_skew";

/// Write one periodicity's table rows. Row order follows the input.
inline void export_report(std::ostream& out, std::span<const EvalReport> rows) {
    out << kEvalCsvHeader << '\n';
    for (const auto& r : rows) {
        if (r.level == kLevelNone)
            out << "none,";
        else
            out << r.level << ',';
        out << r.coeff << ',' << detail::fmt_double(r.compress) << ','
            << detail::fmt_double(r.moments.mse) << ',' << detail::fmt_double(r.moments.mae)
            << ',' << detail::fmt_double(r.moments.skewness) << ','
            << detail::fmt_double(r.moments.kurtosis) << ','
            << detail::fmt_double(r.pct_change_mse) << ',' << detail::fmt_double(r.pct_change_mae)
            << ',' << detail::fmt_double(r.pct_change_skew) << '\n';
    }
    if (!out) throw std::runtime_error("report write failed");
}

inline void export_report(const std::string& path, std::span<const EvalReport> rows) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    export_report(out, rows);
}

/// Long-format surface: period,lead,avg_error; undefined entries are skipped.
inline void export_surface(std::ostream& out, const ErrorSurface& s) {
    out << "period,lead,avg_error\n";
    for (std::size_t p = s.period_lo; p <= s.period_hi; ++p)
        for (std::size_t l = s.lead_lo; l <= s.lead_hi; ++l) {
            double v = s.at(p, l);
            if (std::isnan(v)) continue;
            out << p << ',' << l << ',' << detail::fmt_double(v) << '\n';
        }
    if (!out) throw std::runtime_error("surface write failed");
}

inline void export_surface(const std::string& path, const ErrorSurface& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    export_surface(out, s);
}

}  // namespace wavecast
