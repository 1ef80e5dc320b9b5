#include "rmtcov/overlaps.hpp"

#include <cmath>
#include <stdexcept>

namespace rmtcov {

namespace {

// Im Gamma(gamma) diagonal and Im m at a real boundary point.
struct BoundaryGamma {
    Eigen::VectorXd im_gamma;  // M entries
    double im_m;
    double m_re;
};

BoundaryGamma boundary_gamma(const PopulationSpectrum& spectrum, double gamma,
                             const SolverOptions& opts) {
    StieltjesValue v = boundary_stieltjes(spectrum, gamma * gamma, opts);
    if (v.m.imag() <= 0.0)
        throw std::invalid_argument("classical location must lie inside the support");
    BoundaryGamma out;
    out.im_m = v.m.imag();
    out.m_re = v.m.real();
    Eigen::VectorXcd g = gamma_of_w(spectrum, Complex(gamma, 0.0), v.m);
    out.im_gamma = g.imag();
    return out;
}

}  // namespace

double predicted_overlap_uu(const PopulationSpectrum& spectrum, double gamma,
                            const Eigen::MatrixXd& D1, const SolverOptions& opts) {
    if (D1.rows() != static_cast<Eigen::Index>(spectrum.dimension()) ||
        D1.cols() != D1.rows())
        throw std::invalid_argument("observable must be M x M");
    BoundaryGamma b = boundary_gamma(spectrum, gamma, opts);
    double tr = b.im_gamma.dot(D1.diagonal());
    return tr / static_cast<double>(spectrum.sample_size()) / b.im_m;
}

double predicted_overlap_uu_diag(const PopulationSpectrum& spectrum, double gamma,
                                 const Eigen::VectorXd& d1_diag,
                                 const SolverOptions& opts) {
    if (d1_diag.size() != static_cast<Eigen::Index>(spectrum.dimension()))
        throw std::invalid_argument("observable diagonal must have length M");
    BoundaryGamma b = boundary_gamma(spectrum, gamma, opts);
    double tr = b.im_gamma.dot(d1_diag);
    return tr / static_cast<double>(spectrum.sample_size()) / b.im_m;
}

double predicted_overlap_vv(const Eigen::MatrixXd& D2, std::size_t N) {
    if (D2.rows() != D2.cols() || D2.rows() != static_cast<Eigen::Index>(N))
        throw std::invalid_argument("observable must be N x N");
    return D2.trace() / static_cast<double>(N);
}

double predicted_overlap_xi(const PopulationSpectrum& spectrum, double gamma,
                            const Eigen::MatrixXd& D, const SolverOptions& opts) {
    const Eigen::Index M = static_cast<Eigen::Index>(spectrum.dimension());
    const Eigen::Index N = static_cast<Eigen::Index>(spectrum.sample_size());
    if (D.rows() != M + N || D.cols() != M + N)
        throw std::invalid_argument("observable must be (M+N) x (M+N)");
    BoundaryGamma b = boundary_gamma(spectrum, gamma, opts);
    // <Im Pi D> = (1/N) [ sum_i ImGamma_i D_ii + Im m * tr D_N ]
    double tr = b.im_gamma.dot(D.diagonal().head(M));
    tr += b.im_m * D.diagonal().tail(N).sum();
    return tr / static_cast<double>(N) / (2.0 * b.im_m);
}

double overlap_error_envelope(std::size_t N, const std::vector<int>& bulk_counts,
                              int k, int i, int l, int j) {
    auto nfac = [&](int kk, int ii) {
        if (kk < 1 || kk > static_cast<int>(bulk_counts.size()))
            throw std::out_of_range("bulk index");
        int nk = bulk_counts[kk - 1];
        if (ii < 1 || ii > nk) throw std::out_of_range("in-bulk index");
        return static_cast<double>(std::min(ii, nk + 1 - ii));
    };
    double prod = static_cast<double>(N) * nfac(k, i) * nfac(l, j);
    return std::pow(prod, -1.0 / 6.0);
}

}  // namespace rmtcov
