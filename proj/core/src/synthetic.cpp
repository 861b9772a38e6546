#include "kteach/synthetic.hpp"

#include <cmath>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace kteach {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kSqrt2Pi = 2.50662827463100050242;
}  // namespace

double gaussian_pdf(double x, double mean, double stddev) {
    const double z = (x - mean) / stddev;
    return std::exp(-0.5 * z * z) / (stddev * kSqrt2Pi);
}

void GaussianMixture::validate() const {
    if (weights.empty() || weights.size() != means.size() || weights.size() != stddevs.size()) {
        throw std::invalid_argument("GaussianMixture: component lists must match and be non-empty");
    }
    double sum = 0.0;
    for (double w : weights) {
        if (!(w >= 0.0)) throw std::invalid_argument("GaussianMixture: negative weight");
        sum += w;
    }
    if (std::abs(sum - 1.0) > 1e-12) {
        throw std::invalid_argument("GaussianMixture: weights must sum to 1");
    }
    for (double s : stddevs) {
        if (!(s > 0.0)) throw std::invalid_argument("GaussianMixture: stddev must be positive");
    }
}

double GaussianMixture::operator()(double x) const {
    double v = 0.0;
    for (std::size_t k = 0; k < weights.size(); ++k) {
        v += weights[k] * gaussian_pdf(x, means[k], stddevs[k]);
    }
    return v;
}

SyntheticSpec SyntheticSpec::gaussian(double mean, double stddev) {
    if (!(stddev > 0.0)) throw std::invalid_argument("SyntheticSpec: stddev must be positive");
    SyntheticSpec s;
    s.kind = Kind::GaussianPdf;
    s.mean = mean;
    s.stddev = stddev;
    return s;
}

SyntheticSpec SyntheticSpec::gaussian_mixture(GaussianMixture m) {
    m.validate();
    SyntheticSpec s;
    s.kind = Kind::Mixture;
    s.mixture = std::move(m);
    return s;
}

SyntheticSpec SyntheticSpec::analytic(AnalyticFamily family) {
    SyntheticSpec s;
    s.kind = Kind::Analytic;
    s.family = family;
    return s;
}

SyntheticSpec SyntheticSpec::cos(double k) {
    SyntheticSpec s;
    s.kind = Kind::Analytic;
    s.family = AnalyticFamily::CosK;
    s.cos_k = k;
    return s;
}

SyntheticSpec SyntheticSpec::polynomial(std::vector<double> coeffs) {
    SyntheticSpec s;
    s.kind = Kind::Analytic;
    s.family = AnalyticFamily::Polynomial;
    s.poly_coeffs = std::move(coeffs);
    return s;
}

double SyntheticSpec::operator()(double x) const {
    switch (kind) {
        case Kind::GaussianPdf:
            return gaussian_pdf(x, mean, stddev);
        case Kind::Mixture:
            return mixture(x);
        case Kind::Analytic:
            break;
    }
    switch (family) {
        case AnalyticFamily::Exp: return std::exp(x);
        case AnalyticFamily::Sin: return std::sin(x);
        case AnalyticFamily::Identity: return x;
        case AnalyticFamily::CosK: return std::sqrt(2.0) * std::cos(cos_k * kPi * x);
        case AnalyticFamily::Polynomial: {
            double v = 0.0;
            for (std::size_t k = poly_coeffs.size(); k-- > 0;) v = v * x + poly_coeffs[k];
            return v;
        }
    }
    throw std::invalid_argument("SyntheticSpec: unknown family");
}

SampledFunction synth_target(const SyntheticSpec& spec, const GridPtr& grid) {
    if (grid->dim() != 1) throw std::invalid_argument("synth_target: needs a 1-D grid");
    return SampledFunction::sample(grid, [&](const Point& p) { return spec(p.x); });
}

SyntheticSpec parse_synthetic(const std::string& text) {
    const auto colon = text.find(':');
    const std::string head = text.substr(0, colon);
    const std::string tail = (colon == std::string::npos) ? "" : text.substr(colon + 1);
    const auto numbers = [](const std::string& s, char sep) {
        std::vector<double> out;
        std::stringstream ss(s);
        std::string item;
        while (std::getline(ss, item, sep)) {
            std::size_t used = 0;
            const double v = std::stod(item, &used);
            if (used != item.size()) throw std::invalid_argument("trailing characters");
            out.push_back(v);
        }
        return out;
    };
    try {
        if (head == "gaussian") {
            const auto v = numbers(tail, ',');
            if (v.size() != 2) throw std::invalid_argument("gaussian takes MEAN,STDDEV");
            return SyntheticSpec::gaussian(v[0], v[1]);
        }
        if (head == "mixture") {
            GaussianMixture mix;
            std::stringstream ss(tail);
            std::string part;
            while (std::getline(ss, part, ';')) {
                const auto v = numbers(part, ',');
                if (v.size() != 3) throw std::invalid_argument("component takes W,MEAN,STDDEV");
                mix.weights.push_back(v[0]);
                mix.means.push_back(v[1]);
                mix.stddevs.push_back(v[2]);
            }
            return SyntheticSpec::gaussian_mixture(std::move(mix));
        }
        if (head == "exp") return SyntheticSpec::analytic(AnalyticFamily::Exp);
        if (head == "sin") return SyntheticSpec::analytic(AnalyticFamily::Sin);
        if (head == "identity") return SyntheticSpec::analytic(AnalyticFamily::Identity);
        if (head == "cos") {
            const auto v = numbers(tail, ',');
            if (v.size() != 1) throw std::invalid_argument("cos takes K");
            return SyntheticSpec::cos(v[0]);
        }
        if (head == "poly") return SyntheticSpec::polynomial(numbers(tail, ','));
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument("parse_synthetic: '" + text + "': " + e.what());
    }
    throw std::invalid_argument("parse_synthetic: unknown family '" + head +
                                "' (gaussian | mixture | exp | sin | identity | cos | poly)");
}

VectorValuedFunction gamma_target(double gamma, const GridPtr& grid) {
    if (grid->dim() != 1) throw std::invalid_argument("gamma_target: needs a 1-D grid");
    const double g = gamma;
    auto first = SampledFunction::sample(grid, [&](const Point& p) {
        return g * p.x / 2.0 + g * p.x * p.x / 2.0 + (1.0 - g) * std::cos(p.x);
    });
    auto second = SampledFunction::sample(grid, [&](const Point& p) {
        return g * p.x / 3.0 + 2.0 * g * p.x * p.x / 3.0 + (1.0 - g) * std::sin(p.x);
    });
    std::vector<SampledFunction> comps;
    comps.push_back(std::move(first));
    comps.push_back(std::move(second));
    return VectorValuedFunction(std::move(comps));
}

}  // namespace kteach
