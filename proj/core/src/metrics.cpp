#include "kteach/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace kteach {

namespace {

PsnrResult psnr_from_mse(double mse, double max_signal) {
    if (!(max_signal > 0.0)) throw std::invalid_argument("psnr: max_signal must be positive");
    if (mse == 0.0) return PsnrResult{0.0, true};
    return PsnrResult{10.0 * std::log10(max_signal * max_signal / mse), false};
}

unsigned char quantize_byte(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return static_cast<unsigned char>(std::floor(c * 255.0 + 0.5));
}

void write_pnm(const std::string& path, const char* magic, std::size_t w, std::size_t h,
               const std::vector<unsigned char>& payload) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_snapshot: cannot open " + path);
    out << magic << "\n" << w << " " << h << "\n255\n";
    out.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!out) throw std::runtime_error("write_snapshot: write failed for " + path);
}

}  // namespace

std::string PsnrResult::to_string() const {
    if (saturated) return "inf";
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", value);
    return buf;
}

PsnrResult psnr(const VectorValuedFunction& f, const VectorValuedFunction& g,
                double max_signal) {
    require_matching_layout(f, g, "psnr");
    double sq = 0.0;
    for (std::size_t i = 0; i < f.d(); ++i) {
        sq += component_sq_residual(f.component(i), g.component(i));
    }
    return psnr_from_mse(sq / static_cast<double>(f.total_points()), max_signal);
}

PsnrResult psnr(const SampledFunction& f, const SampledFunction& g, double max_signal) {
    if (!same_grid(f.grid(), g.grid())) throw std::invalid_argument("psnr: grids differ");
    const double sq = component_sq_residual(f, g);
    return psnr_from_mse(sq / static_cast<double>(f.size()), max_signal);
}

void write_snapshot(const SampledFunction& f, const std::string& path) {
    const Grid& grid = *f.grid();
    if (grid.dim() != 2) throw std::invalid_argument("write_snapshot: needs a 2-D grid");
    std::vector<unsigned char> bytes(f.size());
    for (std::size_t i = 0; i < f.size(); ++i) bytes[i] = quantize_byte(f.value(i));
    write_pnm(path, "P5", grid.width(), grid.height(), bytes);
}

void write_snapshot(const VectorValuedFunction& f, const std::string& path) {
    if (f.d() == 1) {
        write_snapshot(f.component(0), path);
        return;
    }
    if (f.d() != 3 || !f.shares_grid()) {
        throw std::invalid_argument("write_snapshot: needs 1 or 3 components on one grid");
    }
    const Grid& grid = *f.component(0).grid();
    if (grid.dim() != 2) throw std::invalid_argument("write_snapshot: needs a 2-D grid");
    std::vector<unsigned char> bytes(3 * grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        for (std::size_t c = 0; c < 3; ++c) {
            bytes[3 * i + c] = quantize_byte(f.component(c).value(i));
        }
    }
    write_pnm(path, "P6", grid.width(), grid.height(), bytes);
}

}  // namespace kteach
