#include "rmtcov/stieltjes.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "rmtcov/errors.hpp"

namespace rmtcov {

Complex self_consistent_f(const PopulationSpectrum& spectrum, Complex m) {
    const auto& vals = spectrum.group_values();
    const auto& cnts = spectrum.group_counts();
    Complex sum = 0.0;
    for (std::size_t g = 0; g < vals.size(); ++g) {
        if (vals[g] == 0.0) continue;
        sum += static_cast<double>(cnts[g]) * vals[g] / (1.0 + m * vals[g]);
    }
    return -1.0 / m + sum / static_cast<double>(spectrum.sample_size());
}

Complex self_consistent_f_prime(const PopulationSpectrum& spectrum, Complex m) {
    const auto& vals = spectrum.group_values();
    const auto& cnts = spectrum.group_counts();
    Complex sum = 0.0;
    for (std::size_t g = 0; g < vals.size(); ++g) {
        if (vals[g] == 0.0) continue;
        Complex d = 1.0 + m * vals[g];
        sum += static_cast<double>(cnts[g]) * vals[g] * vals[g] / (d * d);
    }
    return 1.0 / (m * m) - sum / static_cast<double>(spectrum.sample_size());
}

Complex m_frak_derivative(const PopulationSpectrum& spectrum, Complex m_frak) {
    return 1.0 / self_consistent_f_prime(spectrum, m_frak);
}

namespace {

// Upper-half-plane solve; callers handle the lower half by conjugation.
StieltjesValue solve_upper(const PopulationSpectrum& spectrum, Complex z,
                           const SolverOptions& opts, std::optional<Complex> warm) {
    Complex m = warm.value_or(-1.0 / z);
    if (m.imag() <= 0.0) m = std::conj(m);
    if (m.imag() == 0.0) m += Complex(0.0, 1e-12);

    int guard_trips = 0;
    double res = std::abs(self_consistent_f(spectrum, m) - z);
    for (int it = 0; it < opts.max_iterations; ++it) {
        if (res <= opts.tolerance) {
            StieltjesValue out;
            out.z = z;
            out.m_frak = m;
            out.w = std::sqrt(z);
            out.m = out.w * m;
            out.residual = res;
            return out;
        }
        Complex g = self_consistent_f(spectrum, m) - z;
        Complex gp = self_consistent_f_prime(spectrum, m);
        bool stepped = false;
        if (std::abs(gp) > 1e-300) {
            Complex step = g / gp;
            double damp = 1.0;
            for (int k = 0; k < 40; ++k) {
                Complex cand = m - damp * step;
                if (cand.imag() <= 0.0) {
                    cand = std::conj(cand);  // Herglotz projection
                    ++guard_trips;
                }
                if (cand.imag() <= 0.0 || cand == 0.0) {
                    damp *= 0.5;
                    continue;
                }
                double cand_res = std::abs(self_consistent_f(spectrum, cand) - z);
                if (cand_res < res) {
                    m = cand;
                    res = cand_res;
                    stepped = true;
                    break;
                }
                damp *= 0.5;
            }
        }
        if (!stepped) {
            // fixed-point fallback m <- 1/(-z + (1/N) tr Sigma/(1+m Sigma))
            Complex denom = self_consistent_f(spectrum, m) + 1.0 / m - z;
            Complex cand = 1.0 / denom;
            if (cand.imag() <= 0.0) {
                cand = std::conj(cand);
                ++guard_trips;
            }
            double cand_res = std::abs(self_consistent_f(spectrum, cand) - z);
            if (!std::isfinite(cand_res)) {
                throw NonConvergence("self-consistent solve diverged at z=(" +
                                         std::to_string(z.real()) + "," +
                                         std::to_string(z.imag()) + ")",
                                     res, guard_trips);
            }
            m = cand;
            res = cand_res;
        }
    }
    throw NonConvergence("self-consistent solve exhausted its iteration budget (sign guard fired " +
                             std::to_string(guard_trips) + "x)",
                         res, guard_trips);
}

}  // namespace

namespace {

// Cold starts at small Im z can land the Newton iterate in the basin of a
// spurious near-real solution close to a pole of f. The init m0 = -1/z is
// only safe for |Im z| comparable to |z|, so a cold solve descends an eta
// homotopy from that regime, warm-starting each rung.
StieltjesValue solve_upper_homotopy(const PopulationSpectrum& spectrum, Complex z,
                                    const SolverOptions& opts,
                                    std::optional<Complex> warm_start) {
    const double eta_safe = std::max(1.0, std::abs(z));
    if (warm_start || z.imag() >= 0.5 * eta_safe)
        return solve_upper(spectrum, z, opts, warm_start);
    std::optional<Complex> warm;
    double eta = eta_safe;
    while (eta > z.imag()) {
        StieltjesValue v = solve_upper(spectrum, Complex(z.real(), eta), opts, warm);
        warm = v.m_frak;
        eta *= 0.3;
    }
    return solve_upper(spectrum, z, opts, warm);
}

}  // namespace

StieltjesValue solve_stieltjes(const PopulationSpectrum& spectrum, Complex z,
                               const SolverOptions& opts,
                               std::optional<Complex> warm_start) {
    if (z.imag() == 0.0)
        throw std::invalid_argument("solve_stieltjes needs Im z != 0; use boundary_stieltjes");
    if (z.imag() > 0.0) return solve_upper_homotopy(spectrum, z, opts, warm_start);
    std::optional<Complex> warm;
    if (warm_start) warm = std::conj(*warm_start);
    StieltjesValue up = solve_upper_homotopy(spectrum, std::conj(z), opts, warm);
    StieltjesValue out;
    out.z = z;
    out.m_frak = std::conj(up.m_frak);  // m(conj z) = conj m(z)
    out.w = std::sqrt(z);
    out.m = out.w * out.m_frak;
    out.residual = up.residual;
    return out;
}

StieltjesValue solve_stieltjes_w(const PopulationSpectrum& spectrum, Complex w,
                                 const SolverOptions& opts,
                                 std::optional<Complex> warm_start) {
    if (w.real() <= 0.0)
        throw std::invalid_argument("square-root parameter must have Re w > 0");
    StieltjesValue v = solve_stieltjes(spectrum, w * w, opts, warm_start);
    v.w = w;  // keep the caller's w (sqrt(w^2) agrees for Re w > 0)
    v.m = w * v.m_frak;
    return v;
}

StieltjesValue boundary_stieltjes(const PopulationSpectrum& spectrum, double E,
                                  const SolverOptions& opts) {
    if (E <= 0.0) throw std::invalid_argument("boundary value needs E > 0");
    // descend in eta along a geometric ladder, warm-starting each solve;
    // start where the -1/z init is safely inside the Herglotz basin
    double eta = std::max(std::max(1.0, E), 1e3 * opts.eta_floor);
    std::optional<Complex> warm;
    StieltjesValue at_floor{}, at_twice{};
    bool have_twice = false;
    while (true) {
        double target = std::max(eta, opts.eta_floor);
        StieltjesValue v = solve_stieltjes(spectrum, Complex(E, target), opts, warm);
        warm = v.m_frak;
        if (target == 2.0 * opts.eta_floor) {
            at_twice = v;
            have_twice = true;
        }
        if (target <= opts.eta_floor) {
            at_floor = v;
            break;
        }
        double next = eta * 0.1;
        // make sure the ladder passes exactly through 2*eta_floor
        if (next < 2.0 * opts.eta_floor && !have_twice) next = 2.0 * opts.eta_floor;
        eta = next;
    }
    if (!have_twice)
        at_twice = solve_stieltjes(spectrum, Complex(E, 2.0 * opts.eta_floor), opts, warm);

    StieltjesValue out;
    out.z = Complex(E, 0.0);
    out.m_frak = 2.0 * at_floor.m_frak - at_twice.m_frak;  // Richardson in eta
    if (out.m_frak.imag() < 0.0) out.m_frak = Complex(out.m_frak.real(), 0.0);
    out.w = Complex(std::sqrt(E), 0.0);
    out.m = out.w * out.m_frak;
    out.residual = at_floor.residual;
    return out;
}

double density(const PopulationSpectrum& spectrum, double E, const SolverOptions& opts) {
    if (E <= 0.0) return 0.0;
    double d = boundary_stieltjes(spectrum, E, opts).m_frak.imag() / M_PI;
    return d > 0.0 ? d : 0.0;
}

double eigenvalue_density(const PopulationSpectrum& spectrum, double E,
                          const SolverOptions& opts) {
    return density(spectrum, E, opts) / spectrum.ratio();
}

Eigen::VectorXcd gamma_of_w(const PopulationSpectrum& spectrum, Complex w, Complex m) {
    const auto& sig = spectrum.eigenvalues();
    Eigen::VectorXcd g(static_cast<Eigen::Index>(sig.size()));
    for (std::size_t i = 0; i < sig.size(); ++i) {
        Complex pencil = w + m * sig[i];
        if (std::abs(pencil) < 1e-12)
            throw SingularPencil("pencil w + m*sigma_i nearly singular at sigma=" +
                                 std::to_string(sig[i]));
        g[static_cast<Eigen::Index>(i)] = -1.0 / pencil;
    }
    return g;
}

Complex gamma_trace(const PopulationSpectrum& spectrum, Complex w, Complex m) {
    const auto& vals = spectrum.group_values();
    const auto& cnts = spectrum.group_counts();
    Complex sum = 0.0;
    for (std::size_t g = 0; g < vals.size(); ++g)
        sum += -static_cast<double>(cnts[g]) / (w + m * vals[g]);
    return sum / static_cast<double>(spectrum.sample_size());
}

Complex gamma_sigma_trace(Complex w, Complex m) { return -w - 1.0 / m; }

std::vector<StieltjesValue> solve_grid(const PopulationSpectrum& spectrum,
                                       const std::vector<Complex>& zs,
                                       const SolverOptions& opts) {
    std::vector<StieltjesValue> out;
    out.reserve(zs.size());
    std::optional<Complex> warm;
    for (Complex z : zs) {
        StieltjesValue v = solve_stieltjes(spectrum, z, opts, warm);
        warm = v.m_frak;
        out.push_back(v);
    }
    return out;
}

}  // namespace rmtcov
