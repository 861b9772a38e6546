#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "kteach/image.hpp"
#include "kteach/metrics.hpp"
#include "kteach/patterns.hpp"
#include "kteach/rng.hpp"
#include "kteach/trace_io.hpp"
#include "support/test_helpers.hpp"

using namespace kteach;
using kteach::testing::random_vector_function;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / name).string();
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    return std::string((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("psnr evaluates 10 log10(max^2 / mse)") {
    const auto grid = Grid::linspace_1d(0.0, 1.0, 4);
    const VectorValuedFunction zeros({SampledFunction::zeros(grid)});
    const VectorValuedFunction half(
        {SampledFunction::sample(grid, [](const Point&) { return 0.5; })});
    const VectorValuedFunction ones(
        {SampledFunction::sample(grid, [](const Point&) { return 1.0; })});

    const auto saturated = psnr(zeros, zeros, 1.0);
    CHECK(saturated.saturated);
    CHECK(saturated.to_string() == "inf");

    const auto quarter = psnr(half, zeros, 1.0);  // MSE 0.25
    CHECK(!quarter.saturated);
    CHECK(quarter.value == doctest::Approx(6.020599913279624).epsilon(1e-12));

    CHECK(psnr(ones, zeros, 1.0).value == doctest::Approx(0.0));  // MSE = max^2

    CHECK_THROWS_AS(psnr(zeros, zeros, 0.0), std::invalid_argument);
    const auto other = Grid::linspace_1d(0.0, 1.0, 5);
    const VectorValuedFunction mismatched({SampledFunction::zeros(other)});
    CHECK_THROWS_AS(psnr(zeros, mismatched, 1.0), std::invalid_argument);
}

TEST_CASE("psnr is symmetric and monotone decreasing in mse") {
    const auto grid = Grid::linspace_1d(0.0, 1.0, 32);
    Rng rng(3);
    const auto a = random_vector_function(grid, 2, rng);
    const auto b = random_vector_function(grid, 2, rng);
    CHECK(psnr(a, b).value == psnr(b, a).value);

    double last = 1e300;
    for (double scale : {0.1, 0.2, 0.4, 0.8}) {
        std::vector<SampledFunction> comps;
        for (std::size_t i = 0; i < 2; ++i) {
            std::vector<double> v = a.component(i).values();
            for (std::size_t j = 0; j < v.size(); ++j) {
                v[j] += scale * (b.component(i).value(j) - a.component(i).value(j));
            }
            comps.emplace_back(grid, std::move(v));
        }
        const double p = psnr(a, VectorValuedFunction(std::move(comps))).value;
        CHECK(p < last);
        last = p;
    }
}

TEST_CASE("snapshots quantize with round-half-up") {
    const auto grid = Grid::pixel_lattice(2, 2);
    const std::string path = temp_path("kteach_snapshot.pgm");
    write_snapshot(SampledFunction::sample(grid, [](const Point&) { return 0.5; }), path);
    const std::string bytes = slurp(path);
    const std::string header = "P5\n2 2\n255\n";
    REQUIRE(bytes.size() == header.size() + 4);
    CHECK(bytes.substr(0, header.size()) == header);
    for (std::size_t i = 0; i < 4; ++i) {
        CHECK(static_cast<unsigned char>(bytes[header.size() + i]) == 128);
    }

    write_snapshot(SampledFunction::sample(grid, [](const Point&) { return 1.7; }), path);
    const std::string clamped = slurp(path);
    CHECK(static_cast<unsigned char>(clamped[header.size()]) == 255);
    std::remove(path.c_str());

    const auto line = Grid::linspace_1d(0.0, 1.0, 4);
    CHECK_THROWS_AS(write_snapshot(SampledFunction::zeros(line), path), std::invalid_argument);
}

TEST_CASE("rgb snapshots interleave channels per pixel") {
    const auto grid = Grid::pixel_lattice(2, 1);
    std::vector<SampledFunction> comps;
    comps.push_back(SampledFunction(grid, {1.0, 0.0}));
    comps.push_back(SampledFunction(grid, {0.0, 1.0}));
    comps.push_back(SampledFunction(grid, {0.0, 0.0}));
    const std::string path = temp_path("kteach_snapshot.ppm");
    write_snapshot(VectorValuedFunction(comps), path);
    const std::string bytes = slurp(path);
    const std::string header = "P6\n2 1\n255\n";
    REQUIRE(bytes.size() == header.size() + 6);
    const auto px = reinterpret_cast<const unsigned char*>(bytes.data() + header.size());
    CHECK(px[0] == 255);
    CHECK(px[1] == 0);
    CHECK(px[2] == 0);
    CHECK(px[3] == 0);
    CHECK(px[4] == 255);
    CHECK(px[5] == 0);
    std::remove(path.c_str());
}

TEST_CASE("snapshot then load reproduces the quantized values exactly") {
    const ImageFunction demo = demo_gray_image(9, 7);
    const auto vf = demo.to_function();
    const std::string path = temp_path("kteach_roundtrip.pgm");
    write_snapshot(vf.component(0), path);
    const ImageFunction back = load_image(path, 1);
    CHECK(back.values == demo.values);  // demo values are already 8-bit representable
    std::remove(path.c_str());

    const ImageFunction rgb = demo_rgb_image(6, 5);
    const std::string path6 = temp_path("kteach_roundtrip.ppm");
    write_snapshot(rgb.to_function(), path6);
    const ImageFunction back6 = load_image(path6, 3);
    CHECK(back6.values == rgb.values);
    std::remove(path6.c_str());
}

TEST_CASE("trace serialization is deterministic and parses back") {
    std::vector<TraceRecord> trace;
    TraceRecord a;
    a.iteration = 0;
    a.loss = 0.123456789123;
    a.disagreement = 1e-3;
    a.psnr_db = 17.25;
    a.comm_applied = true;
    a.selected = {Point::d1(-0.25), Point::d1(0.5)};
    TraceRecord b;
    b.iteration = 1;
    b.loss = 4.0 / 3.0;
    b.disagreement = 9.87654321e-7;
    b.psnr_saturated = true;
    b.selected = {Point::d2(0.125, 0.75), Point::d2(1.0, 0.0)};
    trace.push_back(a);
    trace.push_back(b);

    const std::string path = temp_path("kteach_trace.csv");
    write_trace(trace, path);
    const std::string bytes = slurp(path);
    CHECK(bytes.rfind("iteration,loss,disagreement,psnr,comm_applied,selected_xs\n", 0) == 0);
    CHECK(bytes.find("inf") != std::string::npos);

    const auto parsed = read_trace(path);
    REQUIRE(parsed.size() == 2);
    CHECK(parsed[0].selected[0] == a.selected[0]);
    CHECK(parsed[1].selected[1] == b.selected[1]);
    CHECK(parsed[1].psnr_saturated);

    // Re-serializing the parsed trace is byte-identical.
    const std::string again = temp_path("kteach_trace2.csv");
    write_trace(parsed, again);
    CHECK(slurp(again) == bytes);

    std::remove(path.c_str());
    std::remove(again.c_str());
}

TEST_CASE("empty traces serialize to a header-only file") {
    const std::string path = temp_path("kteach_trace_empty.csv");
    write_trace({}, path);
    CHECK(slurp(path) == "iteration,loss,disagreement,psnr,comm_applied,selected_xs\n");
    CHECK(read_trace(path).empty());
    std::remove(path.c_str());

    std::vector<TraceRecord> one(1);
    write_trace(one, path);
    std::istringstream lines(slurp(path));
    std::string line;
    std::size_t count = 0;
    while (std::getline(lines, line)) ++count;
    CHECK(count == 2);
    std::remove(path.c_str());
}
