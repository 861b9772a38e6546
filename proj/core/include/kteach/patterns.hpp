#pragma once

#include "kteach/image.hpp"

namespace kteach {

/// Deterministic smooth demo rasters, used when no input image is supplied
/// and by the test suites. Values are already quantized to 8 bits so that a
/// written PNM reloads bit-exactly.
ImageFunction demo_gray_image(std::size_t width, std::size_t height);
ImageFunction demo_rgb_image(std::size_t width, std::size_t height);

}  // namespace kteach
