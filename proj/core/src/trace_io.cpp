#include "kteach/trace_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace kteach {

namespace {

constexpr const char* kHeader = "iteration,loss,disagreement,psnr,comm_applied,selected_xs";

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.9g", v);
    return buf;
}

std::string format_points(const std::vector<Point>& pts) {
    std::string out;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (i > 0) out += ';';
        out += fmt(pts[i].x);
        if (pts[i].dim == 2) {
            out += ':';
            out += fmt(pts[i].y);
        }
    }
    return out;
}

std::vector<Point> parse_points(const std::string& s) {
    std::vector<Point> pts;
    if (s.empty()) return pts;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ';')) {
        const auto colon = item.find(':');
        if (colon == std::string::npos) {
            pts.push_back(Point::d1(std::stod(item)));
        } else {
            pts.push_back(Point::d2(std::stod(item.substr(0, colon)),
                                    std::stod(item.substr(colon + 1))));
        }
    }
    return pts;
}

}  // namespace

std::string format_trace(const std::vector<TraceRecord>& trace) {
    std::string out = kHeader;
    out += '\n';
    for (const auto& rec : trace) {
        out += std::to_string(rec.iteration);
        out += ',';
        out += fmt(rec.loss);
        out += ',';
        out += fmt(rec.disagreement);
        out += ',';
        out += rec.psnr_saturated ? "inf" : fmt(rec.psnr_db);
        out += ',';
        out += rec.comm_applied ? '1' : '0';
        out += ',';
        out += format_points(rec.selected);
        out += '\n';
    }
    return out;
}

void write_trace(const std::vector<TraceRecord>& trace, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("write_trace: cannot open " + path);
    const std::string body = format_trace(trace);
    out.write(body.data(), static_cast<std::streamsize>(body.size()));
    if (!out) throw std::runtime_error("write_trace: write failed for " + path);
}

std::vector<TraceRecord> read_trace(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_trace: cannot open " + path);
    std::string line;
    if (!std::getline(in, line) || line != kHeader) {
        throw std::runtime_error("read_trace: bad header in " + path);
    }
    std::vector<TraceRecord> trace;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string field;
        TraceRecord rec;
        std::getline(ss, field, ',');
        rec.iteration = static_cast<std::size_t>(std::stoull(field));
        std::getline(ss, field, ',');
        rec.loss = std::stod(field);
        std::getline(ss, field, ',');
        rec.disagreement = std::stod(field);
        std::getline(ss, field, ',');
        if (field == "inf") {
            rec.psnr_saturated = true;
        } else {
            rec.psnr_db = std::stod(field);
        }
        std::getline(ss, field, ',');
        rec.comm_applied = (field == "1");
        std::getline(ss, field);
        rec.selected = parse_points(field);
        trace.push_back(std::move(rec));
    }
    return trace;
}

}  // namespace kteach
