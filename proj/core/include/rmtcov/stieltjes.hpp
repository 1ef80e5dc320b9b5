#pragma once

#include <complex>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "rmtcov/population_spectrum.hpp"

namespace rmtcov {

using Complex = std::complex<double>;

// One admissible point of the self-consistent (Marchenko-Pastur-type)
// equation
//
//     z = f(m) = -1/m + (1/N) tr Sigma/(1 + m Sigma),   Im z * Im m > 0.
//
// m_frak is the transform of the N-normalized limiting spectral law rho of
// the Gram matrix Y^T Y / N (mass 1-M/N at zero when M < N). The square-root
// parameterization uses w with z = w^2 (branch cut along the negative reals)
// and m(w) = w * m_frak(w^2), the transform of the symmetrized singular
// value law.
struct StieltjesValue {
    Complex z;        // eigenvalue-scale spectral parameter
    Complex m_frak;   // m(z) solving the self-consistent equation
    Complex w;        // sqrt(z), principal branch
    Complex m;        // w * m_frak(w^2)
    double residual;  // |f(m_frak) - z| at the returned root
    double eta() const { return std::abs(w.imag()); }
};

struct SolverOptions {
    double tolerance = 1e-12;   // on |f(m) - z|
    int max_iterations = 500;
    double eta_floor = 1e-9;    // boundary extrapolation base
};

// Solves the self-consistent equation at z with Im z != 0. Damped Newton on
// g(m) = f(m) - z with a fixed-point fallback, initialized at m0 = -1/z (or
// the supplied warm start); iterates violating the Herglotz sign are
// projected back by conjugation. Throws NonConvergence with the final
// residual when the iteration budget is exhausted.
StieltjesValue solve_stieltjes(const PopulationSpectrum& spectrum, Complex z,
                               const SolverOptions& opts = {},
                               std::optional<Complex> warm_start = std::nullopt);

// Same root expressed through the square-root parameter w (Re w > 0,
// Im w != 0); returns the full StieltjesValue at z = w^2.
StieltjesValue solve_stieltjes_w(const PopulationSpectrum& spectrum, Complex w,
                                 const SolverOptions& opts = {},
                                 std::optional<Complex> warm_start = std::nullopt);

// Boundary value lim_{eta->0} m(E + i eta) for E > 0, obtained by a warm
// started descent in eta down to eta_floor followed by two-point Richardson
// extrapolation (the solution is analytic in the bulk and Holder-1/2 at the
// edges; the linear extrapolation removes the leading bulk bias).
// Guarantees Im m_frak >= 0.
StieltjesValue boundary_stieltjes(const PopulationSpectrum& spectrum, double E,
                                  const SolverOptions& opts = {});

// Density of rho at E: (1/pi) Im m(E); 0 for E <= 0 and off the support.
double density(const PopulationSpectrum& spectrum, double E,
               const SolverOptions& opts = {});

// Per-dimension density of the sample-eigenvalue law (the M-normalized ESD
// limit of the sample covariance itself): density(E) / c with c = M/N. In
// the null case this is the classical Marchenko-Pastur density; it
// integrates to 1 whenever M <= N and sigma_min > 0.
double eigenvalue_density(const PopulationSpectrum& spectrum, double E,
                          const SolverOptions& opts = {});

// f and f' of the self-consistent map evaluated on the grouped spectrum.
Complex self_consistent_f(const PopulationSpectrum& spectrum, Complex m);
Complex self_consistent_f_prime(const PopulationSpectrum& spectrum, Complex m);

// d m/d z by implicit differentiation: m'(z) = 1 / f'(m(z)).
Complex m_frak_derivative(const PopulationSpectrum& spectrum, Complex m_frak);

// Diagonal of Gamma(w) = -(w + m Sigma)^{-1} in the population eigenbasis.
// Throws SingularPencil if |w + m sigma_i| < 1e-12 for some i.
Eigen::VectorXcd gamma_of_w(const PopulationSpectrum& spectrum, Complex w, Complex m);

// Normalized traces of Gamma against I and Sigma, tr(.)/N. Cheap exact
// forms used throughout the kernel algebra:
//   <Gamma Sigma> = -w - 1/m  (from the self-consistent equation).
Complex gamma_trace(const PopulationSpectrum& spectrum, Complex w, Complex m);
Complex gamma_sigma_trace(Complex w, Complex m);

// Warm-started sweep over a caller-ordered list of z values.
std::vector<StieltjesValue> solve_grid(const PopulationSpectrum& spectrum,
                                       const std::vector<Complex>& zs,
                                       const SolverOptions& opts = {});

}  // namespace rmtcov
