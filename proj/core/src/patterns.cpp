#include "kteach/patterns.hpp"

#include <algorithm>
#include <cmath>

namespace kteach {

namespace {

double bump(double x, double y, double cx, double cy, double spread) {
    const double dx = x - cx;
    const double dy = y - cy;
    return std::exp(-(dx * dx + dy * dy) / spread);
}

double quantize(double v) {
    const double c = std::clamp(v, 0.0, 1.0);
    return std::floor(c * 255.0 + 0.5) / 255.0;
}

}  // namespace

ImageFunction demo_gray_image(std::size_t width, std::size_t height) {
    ImageFunction img;
    img.width = width;
    img.height = height;
    img.channels = 1;
    img.values.resize(width * height);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double x = (width == 1) ? 0.0 : static_cast<double>(c) / (width - 1);
            const double y = (height == 1) ? 0.0 : static_cast<double>(r) / (height - 1);
            const double v = 0.15 + 0.2 * x + 0.7 * bump(x, y, 0.35, 0.4, 0.08) +
                             0.4 * bump(x, y, 0.75, 0.7, 0.03) -
                             0.25 * bump(x, y, 0.2, 0.85, 0.05);
            img.values[r * width + c] = quantize(v);
        }
    }
    return img;
}

ImageFunction demo_rgb_image(std::size_t width, std::size_t height) {
    const ImageFunction gray = demo_gray_image(width, height);
    ImageFunction img;
    img.width = width;
    img.height = height;
    img.channels = 3;
    img.values.resize(width * height * 3);
    for (std::size_t r = 0; r < height; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            const double x = (width == 1) ? 0.0 : static_cast<double>(c) / (width - 1);
            const double y = (height == 1) ? 0.0 : static_cast<double>(r) / (height - 1);
            const double g = gray.values[r * width + c];
            const double red = g;
            const double green = 0.55 * g + 0.35 * y + 0.1 * bump(x, y, 0.6, 0.25, 0.06);
            const double blue = 0.4 * g + 0.3 * (1.0 - x) + 0.3 * bump(x, y, 0.25, 0.6, 0.1);
            const std::size_t base = (r * width + c) * 3;
            img.values[base + 0] = quantize(red);
            img.values[base + 1] = quantize(green);
            img.values[base + 2] = quantize(blue);
        }
    }
    return img;
}

}  // namespace kteach
