#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavecast/common.hpp"
#include "wavecast/grid.hpp"
#include "wavecast/tensor.hpp"

namespace wavecast {

/// Orthonormal two-channel filter bank. The high-pass g is always derived
/// from the low-pass h by the quadrature-mirror rule g[k] = (-1)^k h[L-1-k],
/// so the pair can never drift out of sync.
struct FilterBank {
    std::string name;
    std::vector<double> h;  // low-pass (scaling) coefficients, sum = sqrt(2)
    std::vector<double> g;  // high-pass, derived
    int vanishing_moments = 0;

    FilterBank() = default;
    FilterBank(std::string bank_name, std::vector<double> lowpass, int moments)
        : name(std::move(bank_name)), h(std::move(lowpass)), vanishing_moments(moments) {
        const std::size_t L = h.size();
        g.resize(L);
        for (std::size_t k = 0; k < L; ++k)
            g[k] = (k % 2 == 0 ? 1.0 : -1.0) * h[L - 1 - k];
        validate();
    }

    /// Checks Sum(h) = sqrt(2) and Sum_k h[k] h[k+2m] = delta(m) to 1e-12.
    void validate() const {
        const std::size_t L = h.size();
        if (L < 2 || L % 2 != 0)
            throw std::invalid_argument("FilterBank " + name + ": filter length must be even >= 2");
        double s = 0.0;
        for (double c : h) s += c;
        if (std::abs(s - std::sqrt(2.0)) > 1e-12)
            throw std::invalid_argument("FilterBank " + name + ": sum(h) != sqrt(2)");
        for (std::size_t m = 0; 2 * m < L; ++m) {
            double acc = 0.0;
            for (std::size_t k = 0; k + 2 * m < L; ++k) acc += h[k] * h[k + 2 * m];
            double expect = m == 0 ? 1.0 : 0.0;
            if (std::abs(acc - expect) > 1e-12)
                throw std::invalid_argument("FilterBank " + name + ": h not orthonormal");
        }
    }
};

/// Haar, Daubechies extremal-phase (4 vanishing moments) and Daubechies
/// least-asymmetric / symlet (8 vanishing moments). Coefficients are fixed
/// constants obtained from a high-precision spectral factorization and are
/// revalidated against the FilterBank invariants on construction.
inline const std::vector<FilterBank>& builtin_banks() {
    static const std::vector<FilterBank> banks = [] {
        std::vector<FilterBank> b;
        b.emplace_back("haar",
                       std::vector<double>{0.70710678118654752440, 0.70710678118654752440}, 1);
        b.emplace_back("db4", std::vector<double>{
                                  0.23037781330889650086, 0.71484657055291564709,
                                  0.63088076792985890788, -0.02798376941685985421,
                                  -0.18703481171909308408, 0.03084138183556076363,
                                  0.03288301166688519974, -0.01059740178506903210},
                       4);
        b.emplace_back("sym8", std::vector<double>{
                                   0.00188995033276768918, -0.00030292051472413308,
                                   -0.01495225833706219912, 0.00380875201389448946,
                                   0.04913717967373028679, -0.02721902991710348632,
                                   -0.05194583810788180074, 0.36444189483617893676,
                                   0.77718575169962802862, 0.48135965125905339159,
                                   -0.06127335906781107784, -0.14329423835127266284,
                                   0.00760748732497660819, 0.03169508781152599143,
                                   -0.00054213233180001069, -0.00338241595100500260},
                       8);
        return b;
    }();
    return banks;
}

inline const FilterBank& bank_by_name(const std::string& name) {
    for (const auto& b : builtin_banks())
        if (b.name == name) return b;
    throw std::invalid_argument("unknown filter bank: " + name);
}

// --- 1D transform ---

struct Dwt1dResult {
    std::vector<double> approx;
    std::vector<std::vector<double>> details;  // details[0] = finest (level 1)
};

namespace detail {

/// One periodic analysis step: x (even length m) -> approx, detail (m/2 each).
inline void analysis_step(const double* x, std::size_t m, const FilterBank& bank, double* approx,
                          double* det) {
    const std::size_t mask = m - 1;  // m is a power of two
    const std::size_t L = bank.h.size();
    for (std::size_t k = 0; k < m / 2; ++k) {
        double a = 0.0, d = 0.0;
        for (std::size_t t = 0; t < L; ++t) {
            double v = x[(2 * k + t) & mask];
            a += bank.h[t] * v;
            d += bank.g[t] * v;
        }
        approx[k] = a;
        det[k] = d;
    }
}

/// Adjoint of analysis_step; exact inverse for orthonormal banks.
inline void synthesis_step(const double* approx, const double* det, std::size_t m,
                           const FilterBank& bank, double* x) {
    const std::size_t mask = m - 1;
    const std::size_t L = bank.h.size();
    for (std::size_t i = 0; i < m; ++i) x[i] = 0.0;
    for (std::size_t k = 0; k < m / 2; ++k) {
        const double a = approx[k];
        const double d = det[k];
        for (std::size_t t = 0; t < L; ++t)
            x[(2 * k + t) & mask] += a * bank.h[t] + d * bank.g[t];
    }
}

inline void check_depth(std::size_t length, std::size_t levels) {
    if (levels < 1) throw std::invalid_argument("dwt: levels must be >= 1");
    if (!is_power_of_two(length))
        throw std::invalid_argument("dwt: length must be a power of two");
    if (length < (std::size_t{1} << levels))
        throw std::invalid_argument("dwt: level depth too large for signal length");
}

}  // namespace detail

/// Multi-level periodic DWT of a power-of-two signal. Orthonormal: energy is
/// preserved exactly and idwt1d inverts it.
inline Dwt1dResult dwt1d(std::vector<double> signal, const FilterBank& bank, std::size_t levels) {
    detail::check_depth(signal.size(), levels);
    Dwt1dResult out;
    std::vector<double> cur = std::move(signal);
    for (std::size_t j = 0; j < levels; ++j) {
        std::size_t m = cur.size();
        std::vector<double> approx(m / 2), det(m / 2);
        detail::analysis_step(cur.data(), m, bank, approx.data(), det.data());
        out.details.push_back(std::move(det));
        cur = std::move(approx);
    }
    out.approx = std::move(cur);
    return out;
}

inline std::vector<double> idwt1d(const Dwt1dResult& coeffs, const FilterBank& bank) {
    std::vector<double> cur = coeffs.approx;
    for (std::size_t j = coeffs.details.size(); j-- > 0;) {
        const auto& det = coeffs.details[j];
        if (det.size() != cur.size())
            throw std::invalid_argument("idwt1d: detail/approx shape mismatch");
        std::vector<double> next(2 * cur.size());
        detail::synthesis_step(cur.data(), det.data(), next.size(), bank, next.data());
        cur = std::move(next);
    }
    return cur;
}

// --- 3D transform ---

/// The seven detail subbands of one pyramid level, labeled by which axes
/// were high-passed, in (lon, lat, time) order.
struct LevelSubbands {
    Tensor3 hll, lhl, llh, hhl, hlh, lhh, hhh;

    Tensor3& by_index(std::size_t i) {
        Tensor3* all[7] = {&hll, &lhl, &llh, &hhl, &hlh, &lhh, &hhh};
        return *all[i];
    }
    const Tensor3& by_index(std::size_t i) const {
        const Tensor3* all[7] = {&hll, &lhl, &llh, &hhl, &hlh, &lhh, &hhh};
        return *all[i];
    }
};

inline constexpr std::array<const char*, 7> kSubbandNames = {"HLL", "LHL", "LLH", "HHL",
                                                             "HLH", "LHH", "HHH"};

/// Mallat pyramid of a cubic tensor: levels[0] is the finest level (j = 1),
/// lll is the coarsest approximation block. Total coefficient count is n^3.
struct CoeffPyramid {
    GridSpec spec;  // provenance only
    std::string bank_name;
    std::vector<LevelSubbands> levels;
    Tensor3 lll;

    std::size_t depth() const { return levels.size(); }

    std::size_t total_coeffs() const {
        std::size_t total = lll.size();
        for (const auto& lvl : levels)
            for (std::size_t s = 0; s < 7; ++s) total += lvl.by_index(s).size();
        return total;
    }

    double energy() const {
        KahanSum s;
        for (double x : lll.raw()) s.add(x * x);
        for (const auto& lvl : levels)
            for (std::size_t sb = 0; sb < 7; ++sb)
                for (double x : lvl.by_index(sb).raw()) s.add(x * x);
        return s.value();
    }
};

namespace detail {

/// Apply the 1D analysis step along one axis of a cubic block, in place:
/// each fiber becomes [approx | detail]. Fibers are independent, so the
/// loop is parallelized over them.
inline void analyze_axis(Tensor3& t, std::size_t m, int axis, const FilterBank& bank) {
    const std::size_t fibers = m * m;
    parallel_for(fibers, [&](std::size_t f) {
        std::size_t a = f / m, b = f % m;
        std::vector<double> fiber(m), approx(m / 2), det(m / 2);
        for (std::size_t i = 0; i < m; ++i) {
            fiber[i] = axis == 0 ? t(i, a, b) : axis == 1 ? t(a, i, b) : t(a, b, i);
        }
        analysis_step(fiber.data(), m, bank, approx.data(), det.data());
        for (std::size_t i = 0; i < m / 2; ++i) {
            double lo = approx[i], hi = det[i];
            if (axis == 0) {
                t(i, a, b) = lo;
                t(i + m / 2, a, b) = hi;
            } else if (axis == 1) {
                t(a, i, b) = lo;
                t(a, i + m / 2, b) = hi;
            } else {
                t(a, b, i) = lo;
                t(a, b, i + m / 2) = hi;
            }
        }
    });
}

inline void synthesize_axis(Tensor3& t, std::size_t m, int axis, const FilterBank& bank) {
    const std::size_t fibers = m * m;
    parallel_for(fibers, [&](std::size_t f) {
        std::size_t a = f / m, b = f % m;
        std::vector<double> approx(m / 2), det(m / 2), fiber(m);
        for (std::size_t i = 0; i < m / 2; ++i) {
            if (axis == 0) {
                approx[i] = t(i, a, b);
                det[i] = t(i + m / 2, a, b);
            } else if (axis == 1) {
                approx[i] = t(a, i, b);
                det[i] = t(a, i + m / 2, b);
            } else {
                approx[i] = t(a, b, i);
                det[i] = t(a, b, i + m / 2);
            }
        }
        synthesis_step(approx.data(), det.data(), m, bank, fiber.data());
        for (std::size_t i = 0; i < m; ++i) {
            if (axis == 0)
                t(i, a, b) = fiber[i];
            else if (axis == 1)
                t(a, i, b) = fiber[i];
            else
                t(a, b, i) = fiber[i];
        }
    });
}

/// Copy the (ox, oy, oz) octant (each 0 = low half, 1 = high half) of an
/// m^3 block into a fresh (m/2)^3 tensor.
inline Tensor3 extract_octant(const Tensor3& t, std::size_t m, int ox, int oy, int oz) {
    std::size_t h = m / 2;
    Tensor3 out(h, h, h);
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < h; ++j)
            for (std::size_t k = 0; k < h; ++k)
                out(i, j, k) = t(i + ox * h, j + oy * h, k + oz * h);
    return out;
}

inline void insert_octant(Tensor3& t, std::size_t m, int ox, int oy, int oz, const Tensor3& sub) {
    std::size_t h = m / 2;
    for (std::size_t i = 0; i < h; ++i)
        for (std::size_t j = 0; j < h; ++j)
            for (std::size_t k = 0; k < h; ++k)
                t(i + ox * h, j + oy * h, k + oz * h) = sub(i, j, k);
}

// Octant selector per subband name letter: H on an axis means the high half.
inline constexpr int kOctants[7][3] = {
    {1, 0, 0},  // HLL
    {0, 1, 0},  // LHL
    {0, 0, 1},  // LLH
    {1, 1, 0},  // HHL
    {1, 0, 1},  // HLH
    {0, 1, 1},  // LHH
    {1, 1, 1},  // HHH
};

}  // namespace detail

/// Separable 3D DWT: per level, the 1D analysis step runs along lon, lat,
/// then time fibers of the current approximation; recursion continues on
/// the LLL octant only.
inline CoeffPyramid dwt3d(const Tensor3& tensor, const FilterBank& bank, std::size_t levels) {
    if (tensor.nx() != tensor.ny() || tensor.ny() != tensor.nz())
        throw std::invalid_argument("dwt3d: tensor must be cubic");
    detail::check_depth(tensor.nx(), levels);
    CoeffPyramid pyr;
    pyr.bank_name = bank.name;
    Tensor3 cur = tensor;
    for (std::size_t j = 0; j < levels; ++j) {
        std::size_t m = cur.nx();
        detail::analyze_axis(cur, m, 0, bank);
        detail::analyze_axis(cur, m, 1, bank);
        detail::analyze_axis(cur, m, 2, bank);
        LevelSubbands lvl;
        for (std::size_t s = 0; s < 7; ++s)
            lvl.by_index(s) = detail::extract_octant(cur, m, detail::kOctants[s][0],
                                                     detail::kOctants[s][1],
                                                     detail::kOctants[s][2]);
        pyr.levels.push_back(std::move(lvl));
        cur = detail::extract_octant(cur, m, 0, 0, 0);
    }
    pyr.lll = std::move(cur);
    return pyr;
}

inline CoeffPyramid dwt3d(const DemandTensor& tensor, const FilterBank& bank,
                          std::size_t levels) {
    CoeffPyramid pyr = dwt3d(tensor.counts, bank, levels);
    pyr.spec = tensor.spec;
    return pyr;
}

/// Exact inverse of dwt3d.
inline Tensor3 idwt3d_counts(const CoeffPyramid& pyr, const FilterBank& bank) {
    Tensor3 cur = pyr.lll;
    for (std::size_t j = pyr.depth(); j-- > 0;) {
        std::size_t h = cur.nx();
        const auto& lvl = pyr.levels[j];
        for (std::size_t s = 0; s < 7; ++s)
            if (lvl.by_index(s).nx() != h)
                throw std::invalid_argument("idwt3d: subband shape mismatch at level " +
                                            std::to_string(j + 1));
        std::size_t m = 2 * h;
        Tensor3 block(m, m, m);
        detail::insert_octant(block, m, 0, 0, 0, cur);
        for (std::size_t s = 0; s < 7; ++s)
            detail::insert_octant(block, m, detail::kOctants[s][0], detail::kOctants[s][1],
                                  detail::kOctants[s][2], lvl.by_index(s));
        detail::synthesize_axis(block, m, 2, bank);
        detail::synthesize_axis(block, m, 1, bank);
        detail::synthesize_axis(block, m, 0, bank);
        cur = std::move(block);
    }
    return cur;
}

inline DemandTensor idwt3d(const CoeffPyramid& pyr, const FilterBank& bank) {
    return DemandTensor(pyr.spec, idwt3d_counts(pyr, bank));
}

// --- pyramid serialization: magic "WPY1", bank name, depth, blocks ---
// Block order: LLL first, then per level coarsest -> finest:
// HLL, LHL, LLH, HHL, HLH, LHH, HHH, each as a WDT1 tensor block.

inline void write_pyramid(std::ostream& out, const CoeffPyramid& pyr) {
    out.write("WPY1", 4);
    std::uint64_t name_len = pyr.bank_name.size();
    out.write(reinterpret_cast<const char*>(&name_len), sizeof(name_len));
    out.write(pyr.bank_name.data(), static_cast<std::streamsize>(name_len));
    std::uint64_t depth = pyr.depth();
    out.write(reinterpret_cast<const char*>(&depth), sizeof(depth));
    write_tensor_block(out, pyr.lll);
    for (std::size_t j = pyr.depth(); j-- > 0;)
        for (std::size_t s = 0; s < 7; ++s) write_tensor_block(out, pyr.levels[j].by_index(s));
    if (!out) throw std::runtime_error("pyramid write failed");
}

inline CoeffPyramid read_pyramid(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WPY1", 4) != 0)
        throw std::runtime_error("bad pyramid file: missing WPY1 magic");
    std::uint64_t name_len = 0;
    in.read(reinterpret_cast<char*>(&name_len), sizeof(name_len));
    if (!in || name_len > 256) throw std::runtime_error("bad pyramid file: bank name");
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    std::uint64_t depth = 0;
    in.read(reinterpret_cast<char*>(&depth), sizeof(depth));
    if (!in || depth == 0 || depth > 62) throw std::runtime_error("bad pyramid file: depth");
    CoeffPyramid pyr;
    pyr.bank_name = name;
    pyr.lll = read_tensor_block(in);
    pyr.levels.resize(depth);
    for (std::size_t j = depth; j-- > 0;)
        for (std::size_t s = 0; s < 7; ++s) pyr.levels[j].by_index(s) = read_tensor_block(in);
    return pyr;
}

inline void save_pyramid(const std::string& path, const CoeffPyramid& pyr) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_pyramid(out, pyr);
}

inline CoeffPyramid load_pyramid(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open pyramid file: " + path);
    return read_pyramid(in);
}

}  // namespace wavecast
