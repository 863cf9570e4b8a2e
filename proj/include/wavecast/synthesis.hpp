#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavecast/common.hpp"
#include "wavecast/contracts.hpp"
#include "wavecast/grid.hpp"

namespace wavecast {

/// Synthetic population: habitual riders with planted demand cycles and
/// OU-distributed home movement, plus casual riders as space-time noise.
struct PopulationConfig {
    std::size_t n_habitual = 200;
    std::size_t n_casual = 200;
    std::vector<std::size_t> periods = {10, 18, 36, 247};  // steps
    double ou_sigma = 0.0;   // home-range scale, degrees (0 = stationary homes)
    double ou_tau = 32.0;    // relaxation time, steps
    double casual_rate = 4.0;  // mean contracts per casual rider
    double habitual_reliability = 1.0;  // probability a scheduled contract happens
    double casual_growth = 0.0;  // time density ~ ((t)/T)^growth; 0 = uniform
    std::size_t home_clusters = 4;
    double cluster_spread = 0.01;  // degrees
    double jitter = 0.5;  // uniform time jitter, in cells; <= 0.5 keeps cycles exact
    std::uint64_t seed = 1;
    GridSpec grid = beijing_grid(64);

    void validate() const {
        grid.validate();
        if (periods.empty()) throw std::invalid_argument("PopulationConfig: no periods");
        for (auto p : periods)
            if (p < 2) throw std::invalid_argument("PopulationConfig: period must be >= 2 steps");
        if (ou_sigma < 0.0 || ou_tau <= 0.0)
            throw std::invalid_argument("PopulationConfig: bad OU parameters");
        if (casual_rate < 0.0) throw std::invalid_argument("PopulationConfig: casual_rate < 0");
        if (habitual_reliability < 0.0 || habitual_reliability > 1.0)
            throw std::invalid_argument("PopulationConfig: reliability outside [0, 1]");
        if (casual_growth < 0.0) throw std::invalid_argument("PopulationConfig: growth < 0");
        if (jitter < 0.0 || jitter > 0.5)
            throw std::invalid_argument("PopulationConfig: jitter outside [0, 0.5]");
        if (home_clusters == 0) throw std::invalid_argument("PopulationConfig: no home clusters");
    }
};

struct RiderInfo {
    std::string rider_id;
    bool habitual = false;
    std::size_t period = 0;  // habitual riders only
    double home_lon = 0.0;
    double home_lat = 0.0;
    std::size_t contracts = 0;
};

struct GroundTruth {
    DemandTensor habitual;  // planted periodic demand, binned alone
    DemandTensor observed;  // habitual + casual, exactly
    std::vector<RiderInfo> riders;
    std::size_t habitual_records = 0;
    std::size_t casual_records = 0;
};

namespace detail {

inline std::mt19937_64 rider_rng(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t s = seed ^ (0xa5a5a5a5a5a5a5a5ULL + stream * 0x9e3779b97f4a7c15ULL);
    std::uint64_t a = splitmix64(s), b = splitmix64(s);
    std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                      static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
    return std::mt19937_64(seq);
}

inline double clamp(double v, double lo, double hi) { return std::max(lo, std::min(hi, v)); }

}  // namespace detail

struct SimulationResult {
    std::vector<ContractRecord> contracts;  // sorted by (start_time, rider_id)
    GroundTruth truth;
};

/// Generate the synthetic contract stream. Habitual rider r contracts at
/// steps phase + k*period (each realized with the configured reliability),
/// jittered within its time cell, from a home point moved by the exact OU
/// discretization x' = x e^(-dt/tau) + N(0, sigma^2 (1 - e^(-2 dt/tau))).
/// Casual riders place Poisson-many contracts at uniform locations with a
/// time density proportional to (t/T)^growth. Fully deterministic per seed:
/// every rider draws from its own (seed, rider index) substream.
inline SimulationResult simulate_population(const PopulationConfig& cfg) {
    cfg.validate();
    const GridSpec& g = cfg.grid;
    const double span = static_cast<double>(g.t_max - g.t_min);
    const double cell_dt = span / static_cast<double>(g.n);

    // cluster centers sit in the middle half of the box
    std::mt19937_64 cluster_rng = detail::rider_rng(cfg.seed, 0x10000000ULL);
    std::vector<std::pair<double, double>> clusters(cfg.home_clusters);
    for (auto& c : clusters) {
        std::uniform_real_distribution<double> ulon(g.lon_min + 0.25 * (g.lon_max - g.lon_min),
                                                    g.lon_max - 0.25 * (g.lon_max - g.lon_min));
        std::uniform_real_distribution<double> ulat(g.lat_min + 0.25 * (g.lat_max - g.lat_min),
                                                    g.lat_max - 0.25 * (g.lat_max - g.lat_min));
        c = {ulon(cluster_rng), ulat(cluster_rng)};
    }

    SimulationResult result;
    std::vector<ContractRecord> habitual_records;

    char idbuf[32];
    for (std::size_t r = 0; r < cfg.n_habitual; ++r) {
        auto rng = detail::rider_rng(cfg.seed, r + 1);
        std::snprintf(idbuf, sizeof(idbuf), "H%06zu", r);
        RiderInfo info;
        info.rider_id = idbuf;
        info.habitual = true;
        info.period = cfg.periods[r % cfg.periods.size()];

        const auto& cl = clusters[r % clusters.size()];
        std::normal_distribution<double> spread(0.0, cfg.cluster_spread);
        info.home_lon = detail::clamp(cl.first + spread(rng), g.lon_min, g.lon_max);
        info.home_lat = detail::clamp(cl.second + spread(rng), g.lat_min, g.lat_max);

        std::uniform_int_distribution<std::size_t> phase_dist(0, info.period - 1);
        const std::size_t phase = phase_dist(rng);

        const double decay = std::exp(-static_cast<double>(info.period) / cfg.ou_tau);
        const double step_sd = cfg.ou_sigma * std::sqrt(1.0 - decay * decay);
        std::normal_distribution<double> stationary(0.0, cfg.ou_sigma);
        std::normal_distribution<double> unit(0.0, 1.0);
        double dev_lon = cfg.ou_sigma > 0.0 ? stationary(rng) : 0.0;
        double dev_lat = cfg.ou_sigma > 0.0 ? stationary(rng) : 0.0;

        std::uniform_real_distribution<double> jit(-cfg.jitter, cfg.jitter);
        std::uniform_real_distribution<double> take(0.0, 1.0);
        std::uniform_int_distribution<std::uint32_t> bike(0, 999999);
        std::uniform_real_distribution<double> ride_len(240.0, 1200.0);
        std::normal_distribution<double> hop(0.0, 0.002);

        for (std::size_t s = phase; s < g.n; s += info.period) {
            if (cfg.ou_sigma > 0.0) {
                dev_lon = dev_lon * decay + step_sd * unit(rng);
                dev_lat = dev_lat * decay + step_sd * unit(rng);
            }
            double u = take(rng);
            double jv = cfg.jitter > 0.0 ? jit(rng) : 0.0;
            if (u >= cfg.habitual_reliability) continue;  // skipped cycle
            ContractRecord rec;
            rec.rider_id = info.rider_id;
            std::snprintf(idbuf, sizeof(idbuf), "B%06u", bike(rng));
            rec.bike_id = idbuf;
            double t = static_cast<double>(g.t_min) +
                       (static_cast<double>(s) + 0.5 + jv) * cell_dt;
            rec.start_time = static_cast<std::int64_t>(t);
            rec.start_lon = detail::clamp(info.home_lon + dev_lon, g.lon_min, g.lon_max);
            rec.start_lat = detail::clamp(info.home_lat + dev_lat, g.lat_min, g.lat_max);
            rec.end_time = rec.start_time + static_cast<std::int64_t>(ride_len(rng));
            rec.end_lon = detail::clamp(rec.start_lon + hop(rng), g.lon_min, g.lon_max);
            rec.end_lat = detail::clamp(rec.start_lat + hop(rng), g.lat_min, g.lat_max);
            ++info.contracts;
            habitual_records.push_back(std::move(rec));
        }
        result.truth.riders.push_back(std::move(info));
    }

    std::vector<ContractRecord> casual_records;
    for (std::size_t r = 0; r < cfg.n_casual; ++r) {
        auto rng = detail::rider_rng(cfg.seed, 0x20000000ULL + r);
        std::snprintf(idbuf, sizeof(idbuf), "C%06zu", r);
        RiderInfo info;
        info.rider_id = idbuf;
        std::poisson_distribution<std::size_t> count_dist(cfg.casual_rate);
        std::size_t count = count_dist(rng);
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        std::uniform_real_distribution<double> ulon(g.lon_min, g.lon_max);
        std::uniform_real_distribution<double> ulat(g.lat_min, g.lat_max);
        std::uniform_int_distribution<std::uint32_t> bike(0, 999999);
        std::uniform_real_distribution<double> ride_len(240.0, 1200.0);
        std::normal_distribution<double> hop(0.0, 0.002);
        for (std::size_t k = 0; k < count; ++k) {
            ContractRecord rec;
            rec.rider_id = info.rider_id;
            std::snprintf(idbuf, sizeof(idbuf), "B%06u", bike(rng));
            rec.bike_id = idbuf;
            // inverse-CDF of density ~ x^growth on [0,1]
            double frac = std::pow(u01(rng), 1.0 / (cfg.casual_growth + 1.0));
            double t = static_cast<double>(g.t_min) +
                       std::min(frac, 1.0 - 1e-12) * span;
            rec.start_time = static_cast<std::int64_t>(t);
            rec.start_lon = ulon(rng);
            rec.start_lat = ulat(rng);
            rec.end_time = rec.start_time + static_cast<std::int64_t>(ride_len(rng));
            rec.end_lon = detail::clamp(rec.start_lon + hop(rng), g.lon_min, g.lon_max);
            rec.end_lat = detail::clamp(rec.start_lat + hop(rng), g.lat_min, g.lat_max);
            ++info.contracts;
            casual_records.push_back(std::move(rec));
        }
        result.truth.riders.push_back(std::move(info));
    }

    result.truth.habitual_records = habitual_records.size();
    result.truth.casual_records = casual_records.size();

    BinResult hab = bin_contracts(habitual_records, g);
    result.truth.habitual = std::move(hab.tensor);

    result.contracts = std::move(habitual_records);
    result.contracts.insert(result.contracts.end(),
                            std::make_move_iterator(casual_records.begin()),
                            std::make_move_iterator(casual_records.end()));
    std::stable_sort(result.contracts.begin(), result.contracts.end(),
                     [](const ContractRecord& a, const ContractRecord& b) {
                         if (a.start_time != b.start_time) return a.start_time < b.start_time;
                         return a.rider_id < b.rider_id;
                     });

    BinResult all = bin_contracts(result.contracts, g);
    result.truth.observed = std::move(all.tensor);
    return result;
}

/// True iff the habitual tensor repeats along time with the given period,
/// up to edge truncation. A tolerance of c cells accepts slices that match
/// after shifting by up to c time cells.
inline bool planted_cycle_check(const GroundTruth& truth, std::size_t period,
                                std::size_t tolerance_cells = 0) {
    const Tensor3& t = truth.habitual.counts;
    if (period == 0 || period >= t.nz()) return false;
    auto slices_equal = [&](std::size_t a, std::size_t b) {
        for (std::size_t i = 0; i < t.nx(); ++i)
            for (std::size_t j = 0; j < t.ny(); ++j)
                if (t(i, j, a) != t(i, j, b)) return false;
        return true;
    };
    for (std::size_t s = 0; s + period < t.nz(); ++s) {
        bool ok = false;
        std::size_t lo = period >= tolerance_cells ? s + period - tolerance_cells : s;
        std::size_t hi = s + period + tolerance_cells;
        for (std::size_t b = lo; b <= hi && b < t.nz(); ++b)
            if (slices_equal(s, b)) {
                ok = true;
                break;
            }
        if (!ok) return false;
    }
    return true;
}

}  // namespace wavecast
