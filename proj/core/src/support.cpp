#include "rmtcov/support.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "rmtcov/errors.hpp"
#include "rmtcov/quadrature.hpp"

namespace rmtcov {

std::pair<int, int> SupportStructure::relabel(int i) const {
    int rest = i;
    for (int k = 0; k < static_cast<int>(bulk_counts.size()); ++k) {
        if (rest <= bulk_counts[k]) return {k + 1, rest};
        rest -= bulk_counts[k];
    }
    throw std::out_of_range("rank beyond the classical eigenvalue count");
}

double SupportStructure::n_factor(int i) const {
    auto [k, j] = relabel(i);
    int nk = bulk_counts[k - 1];
    return static_cast<double>(std::min(j, nk + 1 - j));
}

int SupportStructure::bulk_of_energy(double E) const {
    for (int k = 1; k <= num_bulks(); ++k)
        if (E >= bulk_lo(k) && E <= bulk_hi(k)) return k;
    return 0;
}

double SupportStructure::dist_to_edges(std::complex<double> z) const {
    double d = std::numeric_limits<double>::infinity();
    for (double a : edges) d = std::min(d, std::abs(z - a));
    return d;
}

double SupportStructure::dist_to_edges_w(std::complex<double> w) const {
    double d = std::numeric_limits<double>::infinity();
    for (double a : edges) d = std::min(d, std::abs(w - std::sqrt(a)));
    return d;
}

double SupportStructure::min_edge_gap() const {
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        g = std::min(g, edges[i] - edges[i + 1]);
    return g;
}

double SupportStructure::tau_prime_default() const {
    if (edges.size() < 2) return 0.5;
    double g = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i + 1 < edges.size(); ++i)
        g = std::min(g, std::sqrt(edges[i]) - std::sqrt(edges[i + 1]));
    return 0.5 * g;
}

namespace {

double f_real(const PopulationSpectrum& s, double m) {
    return self_consistent_f(s, Complex(m, 0.0)).real();
}

double f_prime_real(const PopulationSpectrum& s, double m) {
    return self_consistent_f_prime(s, Complex(m, 0.0)).real();
}

// Bisection for f'(m) = 0 inside [lo, hi] where the sign changes.
double refine_critical(const PopulationSpectrum& s, double lo, double hi, double tol) {
    double flo = f_prime_real(s, lo);
    for (int it = 0; it < 200; ++it) {
        double mid = 0.5 * (lo + hi);
        if (hi - lo <= tol * (1.0 + std::abs(mid))) return mid;
        double fm = f_prime_real(s, mid);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

// Scans f' over a pole-free interval of m parameterized by a monotone map
// from (0,1); appends every refined critical VALUE f(m*) found.
void scan_interval(const PopulationSpectrum& s,
                   const std::function<double(double)>& param, int points,
                   double tol, std::vector<double>& critical_values) {
    double prev_m = param(0.5 / points);
    double prev_fp = f_prime_real(s, prev_m);
    for (int j = 1; j < points; ++j) {
        double t = (j + 0.5) / points;
        double m = param(t);
        double fp = f_prime_real(s, m);
        if (std::isfinite(prev_fp) && std::isfinite(fp) && (prev_fp < 0.0) != (fp < 0.0)) {
            double lo = std::min(prev_m, m), hi = std::max(prev_m, m);
            double mstar = refine_critical(s, lo, hi, tol);
            critical_values.push_back(f_real(s, mstar));
        }
        prev_m = m;
        prev_fp = fp;
    }
}

// Density integral over [a, b] within the bulk [lo, hi]. The halves are
// substituted around their edges, x = lo + t^2 resp. x = hi - t^2, so the
// d^{1/2} edge behavior of the density integrates as a smooth function.
double bulk_range_integral(const PopulationSpectrum& s, double lo, double hi,
                           double a, double b, double tol,
                           const SolverOptions& solver) {
    a = std::max(a, lo);
    b = std::min(b, hi);
    if (b <= a) return 0.0;
    auto dens = [&](double x) { return density(s, x, solver); };
    const double mid = 0.5 * (lo + hi);
    double total = 0.0;
    if (a < mid) {
        double upper = std::min(b, mid);
        total += adaptive_gk([&](double t) { return 2.0 * t * dens(lo + t * t); },
                             std::sqrt(a - lo), std::sqrt(upper - lo), tol, tol);
    }
    if (b > mid) {
        double lower = std::max(a, mid);
        total += adaptive_gk([&](double t) { return 2.0 * t * dens(hi - t * t); },
                             std::sqrt(hi - b), std::sqrt(hi - lower), tol, tol);
    }
    return total;
}

}  // namespace

SupportStructure find_support(const PopulationSpectrum& spectrum,
                              const SupportOptions& opts) {
    // poles of f sit at m = -1/sigma for distinct nonzero sigma, plus m = 0
    std::vector<double> poles;
    for (double v : spectrum.group_values())
        if (v > 0.0) poles.push_back(-1.0 / v);
    std::sort(poles.begin(), poles.end());
    poles.push_back(0.0);

    std::vector<double> critical;
    const double span = 1.0 + std::abs(poles.front());
    // (-inf, first pole): m = p - span*t/(1-t)
    scan_interval(
        spectrum,
        [&](double t) { return poles.front() - span * t / (1.0 - t); },
        opts.scan_points, opts.bisect_tol, critical);
    // bounded intervals between consecutive poles
    for (std::size_t j = 0; j + 1 < poles.size(); ++j) {
        double a = poles[j], b = poles[j + 1];
        scan_interval(
            spectrum, [&](double t) { return a + (b - a) * t; },
            opts.scan_points, opts.bisect_tol, critical);
    }
    // (0, +inf)
    scan_interval(
        spectrum, [&](double t) { return span * t / (1.0 - t); },
        opts.scan_points, opts.bisect_tol, critical);

    // keep the nonnegative critical values; they are the edges of rho
    std::vector<double> edges;
    for (double e : critical)
        if (e > -1e-10) edges.push_back(std::max(e, 0.0));
    std::sort(edges.begin(), edges.end(), std::greater<double>());
    // hard edge: when the nonzero part of the spectrum has exactly rank N,
    // the leftmost edge sits at 0 and its critical point escapes to infinity
    std::size_t rank = 0;
    for (std::size_t g = 0; g < spectrum.group_values().size(); ++g)
        if (spectrum.group_values()[g] > 0.0) rank += spectrum.group_counts()[g];
    if (edges.size() % 2 == 1 && rank == spectrum.sample_size()) edges.push_back(0.0);
    if (edges.empty() || edges.size() % 2 != 0)
        throw EdgeDetectionFailure("found " + std::to_string(edges.size()) +
                                   " spectral edges; expected a positive even count");

    SupportStructure out;
    out.edges = edges;

    // sanity: density positive inside each bulk, vanishing in the gaps
    for (int k = 1; k <= out.num_bulks(); ++k) {
        double mid = 0.5 * (out.bulk_lo(k) + out.bulk_hi(k));
        if (density(spectrum, mid, opts.solver) <= 1e-10)
            throw EdgeDetectionFailure("no spectral mass inside a detected bulk");
        if (k < out.num_bulks()) {
            double gap_mid = 0.5 * (out.bulk_lo(k) + out.bulk_hi(k + 1));
            if (density(spectrum, gap_mid, opts.solver) > 1e-6)
                throw EdgeDetectionFailure("spectral mass inside a detected gap");
        }
    }

    if (!opts.with_bulk_counts) return out;

    // classical eigenvalue counts N_k = N * rho-mass of bulk k
    const double N = static_cast<double>(spectrum.sample_size());
    for (int k = 1; k <= out.num_bulks(); ++k) {
        double lo = out.bulk_lo(k), hi = out.bulk_hi(k);
        double mass = bulk_range_integral(spectrum, lo, hi, lo, hi,
                                          opts.mass_tol, opts.solver);
        double scaled = N * mass;
        double rounded = std::round(scaled);
        if (std::abs(scaled - rounded) > 1e-6)
            throw QuadratureFailure("bulk count N_k = " + std::to_string(scaled) +
                                    " is not an integer within tolerance");
        out.bulk_masses.push_back(mass);
        out.bulk_counts.push_back(static_cast<int>(rounded));
    }

    if (opts.with_classical_locations)
        out.classical_locations = classical_locations(spectrum, out, opts);
    return out;
}

double density_mass(const PopulationSpectrum& spectrum,
                    const SupportStructure& support, double lo, double hi,
                    const SupportOptions& opts) {
    double total = 0.0;
    for (int k = 1; k <= support.num_bulks(); ++k)
        total += bulk_range_integral(spectrum, support.bulk_lo(k), support.bulk_hi(k),
                                     lo, hi, opts.mass_tol, opts.solver);
    return total;
}

double upper_tail_mass(const PopulationSpectrum& spectrum,
                       const SupportStructure& support, double E,
                       const SupportOptions& opts) {
    return density_mass(spectrum, support, E, support.edges.front(), opts);
}

std::vector<double> classical_locations(const PopulationSpectrum& spectrum,
                                        const SupportStructure& support,
                                        const SupportOptions& opts) {
    const std::size_t count = std::min(spectrum.dimension(), spectrum.sample_size());
    const double N = static_cast<double>(spectrum.sample_size());

    // cumulative rho-mass above each bulk (bulk 1 is rightmost)
    std::vector<double> cum{0.0};
    for (double m : support.bulk_masses) cum.push_back(cum.back() + m);

    const double tail_tol = std::min(opts.mass_tol, 0.05 * opts.quantile_tol);
    std::vector<double> gammas;
    gammas.reserve(count);
    for (std::size_t i = 1; i <= count; ++i) {
        const double q = (static_cast<double>(i) - 0.5) / N;
        int k = support.num_bulks();
        for (int kk = 1; kk <= support.num_bulks(); ++kk) {
            if (q < cum[kk]) {
                k = kk;
                break;
            }
        }
        const double target = q - cum[k - 1];  // tail mass within bulk k
        if (target <= 0.0 || target >= support.bulk_masses[k - 1] + 1e-9)
            throw QuadratureFailure("classical location quantile fell outside its bulk");

        const double lo = support.bulk_lo(k), hi = support.bulk_hi(k);
        auto tail = [&](double E) {
            return bulk_range_integral(spectrum, lo, hi, E, hi, tail_tol, opts.solver);
        };
        double a = lo, b = hi;
        double E = 0.5 * (a + b);
        double h = tail(E) - target;
        // bisection to a narrow bracket, then Newton with h'(E) = -density(E)
        for (int it = 0; it < 24 && std::abs(h) > opts.quantile_tol; ++it) {
            if (h > 0.0)
                a = E;
            else
                b = E;
            E = 0.5 * (a + b);
            h = tail(E) - target;
        }
        for (int it = 0; it < 24 && std::abs(h) > opts.quantile_tol; ++it) {
            double dens = density(spectrum, E, opts.solver);
            double step = (dens > 0.0) ? h / dens : 0.0;
            double cand = E + step;
            if (step == 0.0 || cand <= a || cand >= b) cand = 0.5 * (a + b);
            double hc = tail(cand) - target;
            if (hc > 0.0)
                a = cand;
            else
                b = cand;
            E = cand;
            h = hc;
        }
        if (std::abs(h) > 10.0 * opts.quantile_tol)
            throw QuadratureFailure("classical location inversion stalled at rank " +
                                    std::to_string(i));
        gammas.push_back(std::sqrt(E));
    }
    return gammas;
}

}  // namespace rmtcov
