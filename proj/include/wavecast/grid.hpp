#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>

#include "wavecast/common.hpp"
#include "wavecast/contracts.hpp"
#include "wavecast/tensor.hpp"

namespace wavecast {

/// Meters per degree used for both axes. The flat conversion (no cosine
/// correction) is what reproduces the reference cell sizes.
inline constexpr double kMetersPerDegree = 111000.0;

/// Binning geometry: a closed lon x lat x time box split into n^3 cells.
struct GridSpec {
    double lon_min = 116.0;
    double lon_max = 116.8;
    double lat_min = 39.8;
    double lat_max = 40.0;
    std::int64_t t_min = 1500076800;  // 2017-07-15T00:00:00Z
    std::int64_t t_max = 1502582400;  // 2017-08-13T00:00:00Z
    std::size_t n = 1024;

    void validate() const {
        if (!(lon_min < lon_max)) throw std::invalid_argument("GridSpec: lon_min >= lon_max");
        if (!(lat_min < lat_max)) throw std::invalid_argument("GridSpec: lat_min >= lat_max");
        if (!(t_min < t_max)) throw std::invalid_argument("GridSpec: t_min >= t_max");
        if (n < 2 || !is_power_of_two(n))
            throw std::invalid_argument("GridSpec: n must be a power of two >= 2");
    }
};

/// The default Beijing box at the reference resolution.
inline GridSpec beijing_grid(std::size_t n = 1024) {
    GridSpec g;
    g.n = n;
    g.validate();
    return g;
}

struct CellResolution {
    double meters_lon;
    double meters_lat;
    double minutes;
};

inline CellResolution cell_resolution(const GridSpec& g) {
    g.validate();
    double nd = static_cast<double>(g.n);
    return {(g.lon_max - g.lon_min) / nd * kMetersPerDegree,
            (g.lat_max - g.lat_min) / nd * kMetersPerDegree,
            static_cast<double>(g.t_max - g.t_min) / nd / 60.0};
}

/// Demand counts on a grid. Entries are reals so the same type carries
/// reconstructed (possibly fractional or negative) demand.
struct DemandTensor {
    GridSpec spec;
    Tensor3 counts;

    DemandTensor() = default;
    explicit DemandTensor(const GridSpec& s) : spec(s), counts(s.n, s.n, s.n) {}
    DemandTensor(const GridSpec& s, Tensor3 t) : spec(s), counts(std::move(t)) {}
};

namespace detail {

inline std::size_t bin_index(double v, double vmin, double vmax, std::size_t n) {
    double idx = std::floor((v - vmin) / (vmax - vmin) * static_cast<double>(n));
    if (idx < 0.0) return 0;  // caller guarantees v >= vmin
    std::size_t i = static_cast<std::size_t>(idx);
    return i >= n ? n - 1 : i;  // v == vmax clamps into the last cell
}

}  // namespace detail

struct BinResult {
    DemandTensor tensor;
    std::size_t binned = 0;
    std::size_t out_of_bounds = 0;
};

/// Bin contract START points into the demand tensor. Records outside the
/// closed box are counted but not binned. Pure fold: order-independent.
inline BinResult bin_contracts(std::span<const ContractRecord> records, const GridSpec& spec) {
    spec.validate();
    BinResult r;
    r.tensor = DemandTensor(spec);
    for (const auto& rec : records) {
        if (rec.start_lon < spec.lon_min || rec.start_lon > spec.lon_max ||
            rec.start_lat < spec.lat_min || rec.start_lat > spec.lat_max ||
            rec.start_time < spec.t_min || rec.start_time > spec.t_max) {
            ++r.out_of_bounds;
            continue;
        }
        std::size_t i = detail::bin_index(rec.start_lon, spec.lon_min, spec.lon_max, spec.n);
        std::size_t j = detail::bin_index(rec.start_lat, spec.lat_min, spec.lat_max, spec.n);
        std::size_t k = detail::bin_index(static_cast<double>(rec.start_time),
                                          static_cast<double>(spec.t_min),
                                          static_cast<double>(spec.t_max), spec.n);
        r.tensor.counts(i, j, k) += 1.0;
        ++r.binned;
    }
    return r;
}

}  // namespace wavecast
