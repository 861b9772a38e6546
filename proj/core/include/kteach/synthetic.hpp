#pragma once

#include <string>
#include <vector>

#include "kteach/function.hpp"

namespace kteach {

double gaussian_pdf(double x, double mean, double stddev);

struct GaussianMixture {
    std::vector<double> weights;  // non-negative, sum to 1
    std::vector<double> means;
    std::vector<double> stddevs;

    void validate() const;
    double operator()(double x) const;
};

enum class AnalyticFamily { Exp, Sin, Identity, CosK, Polynomial };

/// Closed-form scalar families used to build targets and initializations.
struct SyntheticSpec {
    enum class Kind { GaussianPdf, Mixture, Analytic };
    Kind kind = Kind::GaussianPdf;

    double mean = 0.0;
    double stddev = 1.0;

    GaussianMixture mixture;

    AnalyticFamily family = AnalyticFamily::Identity;
    double cos_k = 2.0;                  // cos-k: sqrt(2) cos(k pi x)
    std::vector<double> poly_coeffs;     // ascending powers

    static SyntheticSpec gaussian(double mean, double stddev);
    static SyntheticSpec gaussian_mixture(GaussianMixture m);
    static SyntheticSpec analytic(AnalyticFamily family);
    static SyntheticSpec cos(double k);
    static SyntheticSpec polynomial(std::vector<double> coeffs);

    double operator()(double x) const;
};

SampledFunction synth_target(const SyntheticSpec& spec, const GridPtr& grid);

/// Parses a one-line family description:
///   gaussian:MEAN,STDDEV
///   mixture:W,MEAN,STDDEV;W,MEAN,STDDEV;...
///   exp | sin | identity
///   cos:K
///   poly:C0,C1,...   (ascending powers)
SyntheticSpec parse_synthetic(const std::string& text);

/// Two-component interpolation target between polynomial and trigonometric parts:
///   (g x/2 + g x^2/2 + (1-g) cos x,  g x/3 + 2 g x^2/3 + (1-g) sin x)
VectorValuedFunction gamma_target(double gamma, const GridPtr& grid);

}  // namespace kteach
