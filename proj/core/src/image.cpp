#include "kteach/image.hpp"

#include <fstream>
#include <stdexcept>

namespace kteach {

namespace {

[[noreturn]] void parse_fail(const std::string& origin, std::size_t offset, const std::string& what) {
    throw std::runtime_error("load_image: " + origin + ": " + what + " at byte " +
                             std::to_string(offset));
}

struct Cursor {
    const std::vector<unsigned char>& bytes;
    std::size_t pos = 0;
    const std::string& origin;

    bool eof() const { return pos >= bytes.size(); }
    unsigned char peek() const { return bytes[pos]; }

    void skip_space_and_comments() {
        while (!eof()) {
            const unsigned char c = peek();
            if (c == '#') {
                while (!eof() && peek() != '\n') ++pos;
            } else if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
                ++pos;
            } else {
                break;
            }
        }
    }

    std::size_t read_uint(const char* what) {
        skip_space_and_comments();
        if (eof() || peek() < '0' || peek() > '9') {
            parse_fail(origin, pos, std::string("expected ") + what);
        }
        std::size_t v = 0;
        while (!eof() && peek() >= '0' && peek() <= '9') {
            v = v * 10 + (peek() - '0');
            if (v > 1000000000) parse_fail(origin, pos, std::string(what) + " out of range");
            ++pos;
        }
        return v;
    }
};

}  // namespace

VectorValuedFunction ImageFunction::to_function() const {
    const GridPtr grid = Grid::pixel_lattice(width, height);
    std::vector<SampledFunction> comps;
    comps.reserve(channels);
    for (std::size_t c = 0; c < channels; ++c) {
        std::vector<double> v(width * height);
        for (std::size_t i = 0; i < width * height; ++i) v[i] = values[i * channels + c];
        comps.emplace_back(grid, std::move(v));
    }
    return VectorValuedFunction(std::move(comps));
}

ImageFunction decode_pnm(const std::vector<unsigned char>& bytes, const std::string& origin,
                         std::size_t expect_channels) {
    Cursor cur{bytes, 0, origin};
    if (bytes.size() < 2) parse_fail(origin, 0, "truncated magic");
    std::size_t channels = 0;
    if (bytes[0] == 'P' && bytes[1] == '5') {
        channels = 1;
    } else if (bytes[0] == 'P' && bytes[1] == '6') {
        channels = 3;
    } else {
        parse_fail(origin, 0, "bad magic (want P5 or P6)");
    }
    cur.pos = 2;
    const std::size_t width = cur.read_uint("width");
    const std::size_t height = cur.read_uint("height");
    const std::size_t maxval = cur.read_uint("maxval");
    if (width == 0 || height == 0) parse_fail(origin, cur.pos, "zero image dimension");
    if (maxval == 0 || maxval > 65535) parse_fail(origin, cur.pos, "maxval out of [1,65535]");
    // Exactly one whitespace byte separates the header from the payload.
    if (cur.eof()) parse_fail(origin, cur.pos, "missing payload");
    const unsigned char sep = cur.peek();
    if (sep != '\n' && sep != ' ' && sep != '\t' && sep != '\r') {
        parse_fail(origin, cur.pos, "expected whitespace before payload");
    }
    ++cur.pos;

    const std::size_t samples = width * height * channels;
    const std::size_t bytes_per = (maxval > 255) ? 2 : 1;
    if (bytes.size() - cur.pos < samples * bytes_per) {
        parse_fail(origin, bytes.size(), "truncated payload");
    }
    if (expect_channels != 0 && channels != expect_channels) {
        throw std::invalid_argument("load_image: " + origin + ": expected " +
                                    std::to_string(expect_channels) + " channel(s), file has " +
                                    std::to_string(channels));
    }

    ImageFunction img;
    img.width = width;
    img.height = height;
    img.channels = channels;
    img.values.resize(samples);
    for (std::size_t i = 0; i < samples; ++i) {
        std::size_t raw;
        if (bytes_per == 1) {
            raw = bytes[cur.pos + i];
        } else {
            raw = (static_cast<std::size_t>(bytes[cur.pos + 2 * i]) << 8) |
                  bytes[cur.pos + 2 * i + 1];
        }
        img.values[i] = static_cast<double>(raw) / static_cast<double>(maxval);
    }
    return img;
}

ImageFunction load_image(const std::string& path, std::size_t expect_channels) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("load_image: cannot open " + path);
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    return decode_pnm(bytes, path, expect_channels);
}

VectorValuedFunction partition(const SampledFunction& f, std::size_t rows, std::size_t cols) {
    const Grid& grid = *f.grid();
    if (grid.dim() != 2) throw std::invalid_argument("partition: needs a 2-D grid");
    if (rows == 0 || cols == 0) throw std::invalid_argument("partition: zero block count");
    const std::size_t w = grid.width();
    const std::size_t h = grid.height();
    if (h % rows != 0 || w % cols != 0) {
        throw std::invalid_argument("partition: rows/cols must divide the image dimensions");
    }
    const std::size_t bw = w / cols;
    const std::size_t bh = h / rows;
    const GridPtr block_grid = Grid::pixel_lattice(bw, bh);

    std::vector<SampledFunction> comps;
    comps.reserve(rows * cols);
    for (std::size_t br = 0; br < rows; ++br) {
        for (std::size_t bc = 0; bc < cols; ++bc) {
            std::vector<double> v(bw * bh);
            for (std::size_t j = 0; j < bh; ++j) {
                for (std::size_t i = 0; i < bw; ++i) {
                    v[j * bw + i] = f.value((br * bh + j) * w + (bc * bw + i));
                }
            }
            comps.emplace_back(block_grid, std::move(v));
        }
    }
    return VectorValuedFunction(std::move(comps));
}

SampledFunction stitch(const VectorValuedFunction& vf, std::size_t rows, std::size_t cols) {
    if (vf.d() != rows * cols) {
        throw std::invalid_argument("stitch: component count must equal rows*cols");
    }
    const Grid& block = *vf.component(0).grid();
    if (block.dim() != 2) throw std::invalid_argument("stitch: needs 2-D blocks");
    const std::size_t bw = block.width();
    const std::size_t bh = block.height();
    for (std::size_t k = 1; k < vf.d(); ++k) {
        const Grid& g = *vf.component(k).grid();
        if (g.width() != bw || g.height() != bh) {
            throw std::invalid_argument("stitch: inconsistent block shapes");
        }
    }
    const std::size_t w = bw * cols;
    const std::size_t h = bh * rows;
    std::vector<double> v(w * h);
    for (std::size_t br = 0; br < rows; ++br) {
        for (std::size_t bc = 0; bc < cols; ++bc) {
            const auto& comp = vf.component(br * cols + bc);
            for (std::size_t j = 0; j < bh; ++j) {
                for (std::size_t i = 0; i < bw; ++i) {
                    v[(br * bh + j) * w + (bc * bw + i)] = comp.value(j * bw + i);
                }
            }
        }
    }
    return SampledFunction(Grid::pixel_lattice(w, h), std::move(v));
}

}  // namespace kteach
