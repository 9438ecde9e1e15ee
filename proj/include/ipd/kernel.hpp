#pragma once
#include <cmath>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "ipd/interval_partition.hpp"
#include "ipd/rng.hpp"

namespace ipd {

enum class FormKind { Density, Cdf, Tail, Laplace, Exponent, LevyDensity };

std::string kind_name(FormKind k);

struct ClosedForm {
    std::string name;
    std::map<std::string, double> params;
    FormKind kind = FormKind::Density;
    std::function<double(double)> f;
    double lo = 0;         // support
    double hi = INFINITY;
    double atom = 0;       // point mass at lo not carried by the density
    double operator()(double x) const { return f(x); }
};

// Throws std::invalid_argument on an unknown name or missing parameter.
ClosedForm closed_form(const std::string& name, const std::map<std::string, double>& params = {});
std::vector<std::string> closed_form_names();

// Laplace exponents.
double psi(double lambda);
double psi_inverse(double theta);
double inverse_local_time_exponent(double theta);
double phi_y(double lambda, double y);

// Law of the leftmost block mass at level y given m0 = a and survival.
double lmb_density(double b, double a, double y);
double lmb_laplace(double lambda, double a, double y);
// Tabulated inverse CDF; tables depend on a/y only and are shared.
double sample_lmb(double a, double y, Rng& rng);

// BESQ(0) started at a, time y: absorbed atom exp(-a/2y) plus a density.
double besq0_density(double b, double a, double y);
double besq0_cdf(double b, double a, double y);

struct KernelParams {
    double eps = 1e-7;  // jumps below eps are dust with expected-mass correction
};

// Expected mass per unit local time of R^y jumps below eps.
double small_jump_mass_rate(double y, double eps);

// Jumps of the subordinator with Levy measure (1/2 sqrt(pi)) x^{-3/2} e^{-x/2y} dx
// over local time [0, s]. Marks are jump local times.
IntervalPartition sample_ladder(double s, double y, Rng& rng, const KernelParams& p = {});

IntervalPartition sample_entrance_type1(double a, double y, Rng& rng, const KernelParams& p = {});
IntervalPartition sample_kernel_type1(const IntervalPartition& beta, double y, Rng& rng, const KernelParams& p = {});
IntervalPartition sample_kernel_type0(const IntervalPartition& beta, double y, Rng& rng, const KernelParams& p = {});

enum class PdipVariant { Half0, HalfHalf };
std::string variant_name(PdipVariant v);
PdipVariant parse_variant(const std::string& s);

struct PdipOptions {
    double rate = 1.0;       // rate of the exponential level
    bool normalized = true;  // false: raw subordinator partition, mass Gamma or Exp
    double eps = 1e-7;       // relative to the exponential level mean
};
IntervalPartition sample_pdip(PdipVariant v, Rng& rng, const PdipOptions& o = {});

}  // namespace ipd
