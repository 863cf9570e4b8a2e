#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavecast/contracts.hpp"
#include "wavecast/grid.hpp"

namespace wavecast {

struct TrackPoint {
    std::int64_t time = 0;  // epoch seconds
    double lon = 0.0;
    double lat = 0.0;
};

/// Time-ordered contract start points of one rider.
struct RiderTrack {
    std::string rider_id;
    std::vector<TrackPoint> points;  // strictly increasing times
};

/// Group contracts by rider into time-sorted tracks (contract start points).
/// Simultaneous duplicate times collapse to the first occurrence so the
/// strictly-increasing invariant holds.
inline std::vector<RiderTrack> tracks_from_contracts(std::span<const ContractRecord> records) {
    std::map<std::string, std::vector<TrackPoint>> by_rider;
    for (const auto& r : records)
        by_rider[r.rider_id].push_back({r.start_time, r.start_lon, r.start_lat});
    std::vector<RiderTrack> tracks;
    tracks.reserve(by_rider.size());
    for (auto& [id, pts] : by_rider) {
        std::stable_sort(pts.begin(), pts.end(),
                         [](const TrackPoint& a, const TrackPoint& b) { return a.time < b.time; });
        std::vector<TrackPoint> dedup;
        for (const auto& p : pts)
            if (dedup.empty() || p.time > dedup.back().time) dedup.push_back(p);
        tracks.push_back({id, std::move(dedup)});
    }
    return tracks;
}

struct VariogramBin {
    double lag = 0.0;  // bin midpoint, seconds
    double semivariance = 0.0;
    std::size_t pairs = 0;  // 0 marks a missing (empty) bin
};

/// Empirical semivariogram gamma(tau) = (1/2N) sum of squared planar
/// displacements over point pairs whose time gap falls in each lag bin.
/// Displacements are degrees^2, or meters^2 with the flat per-degree
/// conversion when `meters` is set. Empty bins are reported missing.
inline std::vector<VariogramBin> variogram(const RiderTrack& track,
                                           std::span<const double> lag_edges,
                                           bool meters = false) {
    if (track.points.size() < 2) throw std::invalid_argument("variogram: need >= 2 points");
    if (lag_edges.size() < 2) throw std::invalid_argument("variogram: need >= 1 lag bin");
    for (std::size_t i = 1; i < lag_edges.size(); ++i)
        if (!(lag_edges[i] > lag_edges[i - 1]) || lag_edges[i - 1] < 0.0)
            throw std::invalid_argument("variogram: lag edges must be positive ascending");
    const double unit = meters ? kMetersPerDegree : 1.0;
    std::vector<VariogramBin> bins(lag_edges.size() - 1);
    for (std::size_t b = 0; b < bins.size(); ++b)
        bins[b].lag = 0.5 * (lag_edges[b] + lag_edges[b + 1]);
    std::vector<double> acc(bins.size(), 0.0);
    const auto& pts = track.points;
    for (std::size_t i = 0; i < pts.size(); ++i)
        for (std::size_t j = i + 1; j < pts.size(); ++j) {
            double tau = static_cast<double>(pts[j].time - pts[i].time);
            if (tau >= lag_edges.back()) break;  // times sorted: later j only grow
            auto it = std::upper_bound(lag_edges.begin(), lag_edges.end(), tau);
            if (it == lag_edges.begin()) continue;
            std::size_t b = static_cast<std::size_t>(it - lag_edges.begin()) - 1;
            if (b >= bins.size()) continue;
            double dx = (pts[j].lon - pts[i].lon) * unit;
            double dy = (pts[j].lat - pts[i].lat) * unit;
            acc[b] += dx * dx + dy * dy;
            ++bins[b].pairs;
        }
    for (std::size_t b = 0; b < bins.size(); ++b)
        bins[b].semivariance =
            bins[b].pairs ? acc[b] / (2.0 * static_cast<double>(bins[b].pairs))
                          : std::numeric_limits<double>::quiet_NaN();
    return bins;
}

/// Equal-width lag bins with width = median inter-observation gap.
inline std::vector<double> default_lag_edges(const RiderTrack& track, std::size_t num_bins = 20) {
    if (track.points.size() < 2) throw std::invalid_argument("default_lag_edges: need >= 2 points");
    std::vector<double> gaps;
    gaps.reserve(track.points.size() - 1);
    for (std::size_t i = 1; i < track.points.size(); ++i)
        gaps.push_back(static_cast<double>(track.points[i].time - track.points[i - 1].time));
    std::nth_element(gaps.begin(), gaps.begin() + gaps.size() / 2, gaps.end());
    double width = gaps[gaps.size() / 2];
    if (width <= 0.0) width = 1.0;
    std::vector<double> edges(num_bins + 1);
    for (std::size_t i = 0; i <= num_bins; ++i) edges[i] = width * static_cast<double>(i);
    if (edges[0] == 0.0) edges[0] = 1e-9;  // lags must be positive
    return edges;
}

/// Ornstein-Uhlenbeck semivariance fit gamma(tau) = sigma2 (1 - e^(-tau/tau0))
/// by grid-refined search on tau0 with the closed-form sigma2 per candidate.
struct OuFit {
    double sigma2 = 0.0;
    double tau = 0.0;  // home-range relaxation time, same unit as the lags
    double rss = 0.0;
    bool degenerate = false;  // tau pinned at the search-grid boundary
};

inline OuFit fit_ou(std::span<const VariogramBin> semivariances) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& b : semivariances) {
        if (b.pairs == 0) continue;
        if (!std::isfinite(b.lag) || !std::isfinite(b.semivariance))
            throw std::invalid_argument("fit_ou: non-finite input");
        pts.emplace_back(b.lag, b.semivariance);
    }
    if (pts.size() < 3) throw std::invalid_argument("fit_ou: need >= 3 lag points");

    auto eval = [&](double tau0, double& sigma2_out) {
        double num = 0.0, den = 0.0;
        for (auto [tau, gamma] : pts) {
            double b = 1.0 - std::exp(-tau / tau0);
            num += gamma * b;
            den += b * b;
        }
        double sigma2 = den > 0.0 ? num / den : 0.0;
        if (sigma2 < 0.0) sigma2 = 0.0;
        double rss = 0.0;
        for (auto [tau, gamma] : pts) {
            double r = gamma - sigma2 * (1.0 - std::exp(-tau / tau0));
            rss += r * r;
        }
        sigma2_out = sigma2;
        return rss;
    };

    double tau_min = pts.front().first;
    for (auto [tau, g] : pts) tau_min = std::min(tau_min, tau);
    double lo = tau_min / 64.0, hi = pts.back().first * 64.0;
    double best_tau = lo, best_sigma2 = 0.0, best_rss = std::numeric_limits<double>::infinity();
    const std::size_t grid = 96;
    for (int round = 0; round < 24 && hi / lo > 1.0 + 1e-11; ++round) {
        double log_lo = std::log(lo), step = (std::log(hi) - log_lo) / (grid - 1);
        std::size_t round_best = 0;
        double round_rss = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < grid; ++i) {
            double tau0 = std::exp(log_lo + step * static_cast<double>(i));
            double s2;
            double rss = eval(tau0, s2);
            if (rss < round_rss) {
                round_rss = rss;
                round_best = i;
            }
            if (rss < best_rss) {
                best_rss = rss;
                best_tau = tau0;
                best_sigma2 = s2;
            }
        }
        // narrow to the neighbors of this round's best point
        lo = std::exp(log_lo + step * (round_best > 0 ? round_best - 1.0 : 0.0));
        hi = std::exp(log_lo + step * (round_best + 1 < grid ? round_best + 1.0
                                                             : static_cast<double>(grid - 1)));
    }
    OuFit fit{best_sigma2, best_tau, best_rss, false};
    if (best_tau <= tau_min / 60.0 || best_tau >= pts.back().first * 60.0) fit.degenerate = true;
    return fit;
}

}  // namespace wavecast
