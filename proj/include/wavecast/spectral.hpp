#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "wavecast/common.hpp"
#include "wavecast/tensor.hpp"

namespace wavecast {

namespace detail {

/// Iterative radix-2 Cooley-Tukey; n must be a power of two.
inline void fft_inplace(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (!is_power_of_two(n)) throw std::invalid_argument("fft: length must be a power of two");
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                std::complex<double> u = a[i + k];
                std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse)
        for (auto& x : a) x /= static_cast<double>(n);
}

}  // namespace detail

/// One-sided periodogram of a mean-removed series: bins f = 0..n/2 with
/// power scaled so that total power equals variance * length.
struct Periodogram {
    std::vector<double> power;       // index = frequency bin
    std::vector<std::size_t> peaks;  // local maxima, sorted by power descending
};

inline Periodogram periodogram(const std::vector<double>& series, std::size_t top_m = 8) {
    const std::size_t n = series.size();
    if (!is_power_of_two(n) || n < 4)
        throw std::invalid_argument("periodogram: length must be a power of two >= 4");
    KahanSum meansum;
    for (double x : series) meansum.add(x);
    const double mean = meansum.value() / static_cast<double>(n);
    std::vector<std::complex<double>> a(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = series[i] - mean;
    detail::fft_inplace(a, false);

    Periodogram p;
    p.power.resize(n / 2 + 1);
    const double nd = static_cast<double>(n);
    p.power[0] = std::norm(a[0]) / nd;  // zero after mean removal
    for (std::size_t f = 1; f < n / 2; ++f) p.power[f] = 2.0 * std::norm(a[f]) / nd;
    p.power[n / 2] = std::norm(a[n / 2]) / nd;

    for (std::size_t f = 1; f + 1 <= n / 2; ++f) {
        double right = f + 1 < p.power.size() ? p.power[f + 1] : -1.0;
        if (p.power[f] > p.power[f - 1] && p.power[f] > right) p.peaks.push_back(f);
    }
    std::sort(p.peaks.begin(), p.peaks.end(),
              [&](std::size_t x, std::size_t y) { return p.power[x] > p.power[y]; });
    if (p.peaks.size() > top_m) p.peaks.resize(top_m);
    return p;
}

/// Morlet continuous wavelet transform power, computed per scale in the
/// frequency domain. The cone of influence marks samples closer than
/// sqrt(2) * scale to either edge as unreliable.
struct PowerSpectrum {
    std::vector<double> scales;
    std::size_t n_times = 0;
    std::vector<double> power;         // scale-major: power[s * n_times + t]
    std::vector<double> coi_boundary;  // per time: largest reliable scale

    double at(std::size_t scale_idx, std::size_t t) const {
        return power[scale_idx * n_times + t];
    }
    bool in_coi(std::size_t scale_idx, std::size_t t) const {
        return scales[scale_idx] > coi_boundary[t];
    }
};

inline constexpr double kMorletOmega0 = 6.0;

/// Fourier period equivalent to a Morlet scale: (4 pi / (w0 + sqrt(2 + w0^2))) * s.
inline double morlet_period_for_scale(double scale) {
    return 4.0 * std::numbers::pi / (kMorletOmega0 + std::sqrt(2.0 + kMorletOmega0 * kMorletOmega0)) *
           scale;
}

inline double morlet_scale_for_period(double period) {
    return period * (kMorletOmega0 + std::sqrt(2.0 + kMorletOmega0 * kMorletOmega0)) /
           (4.0 * std::numbers::pi);
}

/// Dyadic scale ladder s_j = s0 * 2^(j/4) covering periods up to n/2 steps.
inline std::vector<double> default_morlet_scales(std::size_t n) {
    std::vector<double> scales;
    double s = 2.0;
    double s_max = morlet_scale_for_period(static_cast<double>(n) / 2.0);
    while (s <= s_max) {
        scales.push_back(s);
        s *= std::pow(2.0, 0.25);
    }
    if (scales.empty()) scales.push_back(2.0);
    return scales;
}

inline PowerSpectrum morlet_power(const std::vector<double>& series,
                                  const std::vector<double>& scales) {
    const std::size_t n = series.size();
    if (n < 4) throw std::invalid_argument("morlet_power: series too short");
    if (scales.empty()) throw std::invalid_argument("morlet_power: no scales");
    for (std::size_t i = 0; i < scales.size(); ++i) {
        if (scales[i] <= 0.0 || (i > 0 && scales[i] <= scales[i - 1]))
            throw std::invalid_argument("morlet_power: scales must be positive ascending");
        if (scales[i] > static_cast<double>(n))
            throw std::invalid_argument("morlet_power: scale exceeds series length");
    }
    std::size_t padded = 1;
    while (padded < n) padded <<= 1;

    KahanSum meansum;
    for (double x : series) meansum.add(x);
    const double mean = meansum.value() / static_cast<double>(n);
    std::vector<std::complex<double>> spectrum(padded, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) spectrum[i] = series[i] - mean;
    detail::fft_inplace(spectrum, false);

    PowerSpectrum ps;
    ps.scales = scales;
    ps.n_times = n;
    ps.power.assign(scales.size() * n, 0.0);
    ps.coi_boundary.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double dist = static_cast<double>(std::min(t, n - 1 - t));
        ps.coi_boundary[t] = dist / std::sqrt(2.0);
    }

    const double norm_pi = std::pow(std::numbers::pi, -0.25);
    parallel_for(scales.size(), [&](std::size_t si) {
        const double s = scales[si];
        std::vector<std::complex<double>> prod(padded);
        for (std::size_t k = 0; k < padded; ++k) {
            // angular frequency of bin k (negative for the upper half)
            double w = 2.0 * std::numbers::pi * static_cast<double>(k) /
                       static_cast<double>(padded);
            if (k > padded / 2) w -= 2.0 * std::numbers::pi;
            double daughter = 0.0;
            if (w > 0.0) {
                double arg = s * w - kMorletOmega0;
                daughter = std::sqrt(2.0 * std::numbers::pi * s) * norm_pi *
                           std::exp(-0.5 * arg * arg);
            }
            prod[k] = spectrum[k] * daughter;
        }
        detail::fft_inplace(prod, true);
        for (std::size_t t = 0; t < n; ++t) ps.power[si * n + t] = std::norm(prod[t]);
    });
    return ps;
}

/// Total demand across the spatial grid per time step.
inline std::vector<double> flatten_time(const Tensor3& t) {
    std::vector<double> out(t.nz(), 0.0);
    std::vector<KahanSum> acc(t.nz());
    for (std::size_t i = 0; i < t.nx(); ++i)
        for (std::size_t j = 0; j < t.ny(); ++j)
            for (std::size_t k = 0; k < t.nz(); ++k) acc[k].add(t(i, j, k));
    for (std::size_t k = 0; k < t.nz(); ++k) out[k] = acc[k].value();
    return out;
}

}  // namespace wavecast
