#pragma once

#include <string>

#include "kteach/function.hpp"

namespace kteach {

struct PsnrResult {
    double value = 0.0;  // dB
    bool saturated = false;  // zero MSE

    std::string to_string() const;
};

/// 10 log10(max_signal^2 / MSE), MSE pooled over all grid points and components.
PsnrResult psnr(const VectorValuedFunction& f, const VectorValuedFunction& g,
                double max_signal = 1.0);
PsnrResult psnr(const SampledFunction& f, const SampledFunction& g, double max_signal = 1.0);

/// Clamp to [0,1], quantize to maxval 255 with round-half-up, and write
/// P5 (one component) or P6 (three components on one grid).
void write_snapshot(const SampledFunction& f, const std::string& path);
void write_snapshot(const VectorValuedFunction& f, const std::string& path);

}  // namespace kteach
