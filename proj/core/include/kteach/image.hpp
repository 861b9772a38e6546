#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "kteach/function.hpp"

namespace kteach {

/// A decoded raster: values normalized to [0,1], channel-interleaved,
/// row-major. The grid is the pixel lattice scaled to [0,1]^2.
struct ImageFunction {
    std::size_t width = 0;
    std::size_t height = 0;
    std::size_t channels = 1;  // 1 or 3
    std::vector<double> values;  // size = width * height * channels

    double at(std::size_t row, std::size_t col, std::size_t channel) const {
        return values[(row * width + col) * channels + channel];
    }

    /// One component per channel, all sharing the pixel-lattice grid.
    VectorValuedFunction to_function() const;
};

/// Binary PGM (P5) / PPM (P6), maxval in [1, 65535]. Parse failures report
/// the byte offset.
ImageFunction load_image(const std::string& path, std::size_t expect_channels = 0);
ImageFunction decode_pnm(const std::vector<unsigned char>& bytes, const std::string& origin,
                         std::size_t expect_channels = 0);

/// Splits a 2-D sampled function into rows x cols blocks (row-major block
/// order). Every block gets the same local grid scaled to [0,1]^2, so block
/// components can communicate.
VectorValuedFunction partition(const SampledFunction& f, std::size_t rows, std::size_t cols);

/// Inverse of partition: reassembles the full grid.
SampledFunction stitch(const VectorValuedFunction& vf, std::size_t rows, std::size_t cols);

}  // namespace kteach
