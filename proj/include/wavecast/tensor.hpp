#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wavecast/common.hpp"

namespace wavecast {

/// Dense 3D array of doubles, row-major in (x, y, z) = (lon, lat, time).
class Tensor3 {
public:
    Tensor3() = default;
    Tensor3(std::size_t nx, std::size_t ny, std::size_t nz, double fill = 0.0)
        : nx_(nx), ny_(ny), nz_(nz), v_(nx * ny * nz, fill) {}

    std::size_t nx() const { return nx_; }
    std::size_t ny() const { return ny_; }
    std::size_t nz() const { return nz_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }

    double& operator()(std::size_t i, std::size_t j, std::size_t k) {
        return v_[(i * ny_ + j) * nz_ + k];
    }
    double operator()(std::size_t i, std::size_t j, std::size_t k) const {
        return v_[(i * ny_ + j) * nz_ + k];
    }

    double* data() { return v_.data(); }
    const double* data() const { return v_.data(); }
    std::vector<double>& raw() { return v_; }
    const std::vector<double>& raw() const { return v_; }

    bool same_shape(const Tensor3& o) const {
        return nx_ == o.nx_ && ny_ == o.ny_ && nz_ == o.nz_;
    }

    double sum() const {
        KahanSum s;
        for (double x : v_) s.add(x);
        return s.value();
    }

    double energy() const {
        KahanSum s;
        for (double x : v_) s.add(x * x);
        return s.value();
    }

private:
    std::size_t nx_ = 0, ny_ = 0, nz_ = 0;
    std::vector<double> v_;
};

// --- dense binary block format: magic "WDT1", u64le dims, f64le payload ---

inline void write_tensor_block(std::ostream& out, const Tensor3& t) {
    out.write("WDT1", 4);
    std::uint64_t dims[3] = {t.nx(), t.ny(), t.nz()};
    out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!out) throw std::runtime_error("tensor write failed");
}

inline Tensor3 read_tensor_block(std::istream& in) {
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, "WDT1", 4) != 0)
        throw std::runtime_error("bad tensor block: missing WDT1 magic");
    std::uint64_t dims[3];
    in.read(reinterpret_cast<char*>(dims), sizeof(dims));
    if (!in) throw std::runtime_error("bad tensor block: truncated dims");
    Tensor3 t(dims[0], dims[1], dims[2]);
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw std::runtime_error("bad tensor block: truncated payload");
    return t;
}

inline void save_tensor(const std::string& path, const Tensor3& t) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    write_tensor_block(out, t);
}

inline Tensor3 load_tensor(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open tensor file: " + path);
    return read_tensor_block(in);
}

}  // namespace wavecast
