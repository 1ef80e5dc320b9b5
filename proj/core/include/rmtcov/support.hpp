#pragma once

#include <complex>
#include <cstddef>
#include <utility>
#include <vector>

#include "rmtcov/population_spectrum.hpp"
#include "rmtcov/stieltjes.hpp"

namespace rmtcov {

// Support of the limiting spectral law rho together with the classical
// structure built on it: bulk edges a_1 >= ... >= a_{2K} (eigenvalue scale),
// the classical eigenvalue counts N_k per bulk, and the classical locations
// gamma_1 >= ... >= gamma_{M^N} on the singular value scale
// ((i-1/2)/N = rho([gamma_i^2, inf))).
struct SupportStructure {
    std::vector<double> edges;                 // descending, size 2K
    std::vector<int> bulk_counts;              // N_k, bulk 1 = rightmost
    std::vector<double> bulk_masses;           // rho-mass per bulk (N_k/N)
    std::vector<double> classical_locations;   // gamma_i, descending

    int num_bulks() const { return static_cast<int>(edges.size() / 2); }
    double bulk_hi(int k) const { return edges[2 * (k - 1)]; }      // k is 1-based
    double bulk_lo(int k) const { return edges[2 * (k - 1) + 1]; }

    // Global 1-based rank -> (bulk k, index i within bulk), both 1-based.
    std::pair<int, int> relabel(int i) const;

    // Edge-distance factor n_{k,i} = i ^ (N_k + 1 - i) for global rank i.
    double n_factor(int i) const;

    // 0 when E is outside every bulk, else the 1-based bulk index.
    int bulk_of_energy(double E) const;

    // dist(z, {edges}) on the eigenvalue scale.
    double dist_to_edges(std::complex<double> z) const;

    // Edge set of rho on the singular value scale is {±sqrt(a_k)}; distance
    // of w to the positive-side edges.
    double dist_to_edges_w(std::complex<double> w) const;

    double min_edge_gap() const;

    // Default two-point regularization range: half the minimal gap of the
    // singular-value-scale edge list.
    double tau_prime_default() const;
};

struct SupportOptions {
    int scan_points = 2048;       // initial grid per pole-free interval
    double bisect_tol = 1e-12;    // relative, on the critical point in m
    double mass_tol = 1e-11;      // quadrature tolerance for rho-masses
    double quantile_tol = 1e-10;  // |rho([gamma^2,inf)) - (i-1/2)/N|
    bool with_classical_locations = true;
    bool with_bulk_counts = true;  // skip for hard-edge (M = N) spectra
    SolverOptions solver{};
};

// Locates the edges as critical values f(x_k), f'(x_k) = 0, by scanning f'
// on every maximal pole-free real interval (poles of f at m = -1/sigma for
// the distinct nonzero sigma, and at m = 0) and refining sign changes by
// bisection. Bulk masses come from adaptive quadrature of the density with
// the x = a ± t^2 edge substitution absorbing the square-root behavior.
SupportStructure find_support(const PopulationSpectrum& spectrum,
                              const SupportOptions& opts = {});

// Quantile inversion (i-1/2)/N = rho([gamma_i^2, inf)), i = 1..M^N; needs
// edges/masses already computed.
std::vector<double> classical_locations(const PopulationSpectrum& spectrum,
                                        const SupportStructure& support,
                                        const SupportOptions& opts = {});

// rho-mass of [E, inf): integral of the density above E (E anywhere).
double upper_tail_mass(const PopulationSpectrum& spectrum,
                       const SupportStructure& support, double E,
                       const SupportOptions& opts = {});

// Integral of the density over [lo, hi] intersected with the support.
double density_mass(const PopulationSpectrum& spectrum,
                    const SupportStructure& support, double lo, double hi,
                    const SupportOptions& opts = {});

}  // namespace rmtcov
