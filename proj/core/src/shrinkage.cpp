#include "rmtcov/shrinkage.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/Dense>

#include "rmtcov/errors.hpp"

namespace rmtcov {

namespace {

void finalize_diagnostics(ShrinkageResult& r) {
    for (Eigen::Index i = 0; i + 1 < r.shrunk_eigenvalues.size(); ++i)
        if (r.shrunk_eigenvalues[i] < r.shrunk_eigenvalues[i + 1]) ++r.order_inversions;
    for (Eigen::Index i = 0; i < r.shrunk_eigenvalues.size(); ++i)
        if (r.shrunk_eigenvalues[i] <= 0.0) ++r.nonpositive_count;
    if (r.order_inversions > 0)
        r.warnings.push_back(std::to_string(r.order_inversions) +
                             " order inversions vs the sample eigenvalues (not reordered)");
    if (r.nonpositive_count > 0)
        r.warnings.push_back(std::to_string(r.nonpositive_count) +
                             " nonpositive shrunk eigenvalues (not clamped)");
}

void require_shrinkage_shape(const SampleDecomposition& decomp) {
    if (decomp.dim() >= decomp.sample_size())
        throw std::invalid_argument(
            "shrinkage path requires M < N (dimension below the sample size)");
    const Eigen::VectorXd& l = decomp.eigenvalues();
    if (l[l.size() - 1] <= 1e-12 * l[0])
        throw DegenerateSpectrum("smallest sample eigenvalue is degenerate");
}

}  // namespace

Complex empirical_stieltjes(const Eigen::VectorXd& lambdas, std::size_t M,
                            std::size_t N, Complex z) {
    if (std::abs(z) < 1e-14) throw PoleHit("spectral parameter at the zero pole");
    Complex sum = 0.0;
    for (Eigen::Index j = 0; j < lambdas.size(); ++j) {
        Complex d = lambdas[j] - z;
        if (std::abs(d) < 1e-14)
            throw PoleHit("spectral parameter on sample eigenvalue " + std::to_string(j));
        sum += 1.0 / d;
    }
    const double Nd = static_cast<double>(N);
    return sum / Nd - (1.0 - static_cast<double>(M) / Nd) / z;
}

double default_eta(std::size_t N) { return 1.0 / std::sqrt(static_cast<double>(N)); }

void check_eta_range(double eta, std::size_t N, std::vector<std::string>& warnings) {
    const double n = static_cast<double>(N);
    const double lo = std::pow(n, -2.0 / 3.0 + 0.01);
    const double hi = std::pow(n, -0.01);
    if (eta < lo || eta > hi)
        warnings.push_back("eta outside the supported range [N^{-2/3+0.01}, N^{-0.01}]");
}

ShrinkageResult shrink_frobenius(const SampleDecomposition& decomp, double eta) {
    if (eta <= 0.0 || eta >= 1.0) throw std::invalid_argument("eta must lie in (0,1)");
    require_shrinkage_shape(decomp);
    const Eigen::VectorXd& l = decomp.eigenvalues();
    const std::size_t M = decomp.dim(), N = decomp.sample_size();

    ShrinkageResult r;
    r.loss_kind = LossKind::Frobenius;
    r.mode = ShrinkageMode::Algorithmic;
    r.eta = eta;
    check_eta_range(eta, N, r.warnings);
    r.shrunk_eigenvalues.resize(l.size());
    r.per_eigenvalue_z.resize(static_cast<std::size_t>(l.size()));
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        Complex zi = l[i] * Complex(1.0, eta);  // eta_i = lambda_i * eta
        Complex g = empirical_stieltjes(l, M, N, zi);
        r.per_eigenvalue_z[static_cast<std::size_t>(i)] = zi;
        r.shrunk_eigenvalues[i] = 1.0 / (l[i] * std::norm(g));
    }
    finalize_diagnostics(r);
    return r;
}

ShrinkageResult shrink_inverse_frobenius(const SampleDecomposition& decomp, double eta) {
    if (eta <= 0.0 || eta >= 1.0) throw std::invalid_argument("eta must lie in (0,1)");
    require_shrinkage_shape(decomp);
    const Eigen::VectorXd& l = decomp.eigenvalues();
    const std::size_t M = decomp.dim(), N = decomp.sample_size();
    const double ratio = static_cast<double>(M) / static_cast<double>(N);

    ShrinkageResult r;
    r.loss_kind = LossKind::InverseFrobenius;
    r.mode = ShrinkageMode::Algorithmic;
    r.eta = eta;
    check_eta_range(eta, N, r.warnings);
    r.shrunk_eigenvalues.resize(l.size());
    r.per_eigenvalue_z.resize(static_cast<std::size_t>(l.size()));
    for (Eigen::Index i = 0; i < l.size(); ++i) {
        Complex zi = l[i] * Complex(1.0, eta);
        Complex g = empirical_stieltjes(l, M, N, zi);
        double denom = 1.0 - ratio + 2.0 * l[i] * g.real();
        if (std::abs(denom) < 1e-10)
            throw DenominatorNearZero("inverse-Frobenius denominator vanished at index " +
                                      std::to_string(i));
        r.per_eigenvalue_z[static_cast<std::size_t>(i)] = zi;
        r.shrunk_eigenvalues[i] = -l[i] / denom;
    }
    finalize_diagnostics(r);
    return r;
}

ShrinkageResult oracle_shrinkage(const SampleDecomposition& decomp,
                                 const Eigen::MatrixXd& population_in_sample_frame,
                                 LossKind loss) {
    const Eigen::MatrixXd& U = decomp.eigenvectors();
    if (population_in_sample_frame.rows() != U.rows() ||
        population_in_sample_frame.cols() != U.rows())
        throw std::invalid_argument("population matrix shape mismatch");

    ShrinkageResult r;
    r.loss_kind = loss;
    r.mode = ShrinkageMode::Oracle;
    if (loss == LossKind::Frobenius) {
        Eigen::MatrixXd X =
            population_in_sample_frame.selfadjointView<Eigen::Lower>() * U;
        r.shrunk_eigenvalues = U.cwiseProduct(X).colwise().sum().transpose();
    } else {
        Eigen::LLT<Eigen::MatrixXd> llt(population_in_sample_frame);
        if (llt.info() != Eigen::Success)
            throw NonSPD("population matrix must be positive definite for inverse loss");
        Eigen::MatrixXd X = llt.solve(U);  // Sigma^{-1} U
        Eigen::VectorXd quad = U.cwiseProduct(X).colwise().sum().transpose();
        r.shrunk_eigenvalues = quad.cwiseInverse();
    }
    finalize_diagnostics(r);
    return r;
}

ShrinkageResult oracle_shrinkage_diag(const SampleDecomposition& decomp,
                                      const Eigen::VectorXd& population_eigenvalues,
                                      LossKind loss) {
    const Eigen::MatrixXd& U = decomp.eigenvectors();
    if (population_eigenvalues.size() != U.rows())
        throw std::invalid_argument("population eigenvalue count mismatch");

    ShrinkageResult r;
    r.loss_kind = loss;
    r.mode = ShrinkageMode::Oracle;
    Eigen::MatrixXd Usq = U.cwiseProduct(U);
    if (loss == LossKind::Frobenius) {
        r.shrunk_eigenvalues = Usq.transpose() * population_eigenvalues;
    } else {
        if (population_eigenvalues.minCoeff() <= 0.0)
            throw NonSPD("population eigenvalues must be positive for inverse loss");
        Eigen::VectorXd quad = Usq.transpose() * population_eigenvalues.cwiseInverse();
        r.shrunk_eigenvalues = quad.cwiseInverse();
    }
    finalize_diagnostics(r);
    return r;
}

ShrinkageResult transitional_shrinkage(const Eigen::VectorXd& lambdas,
                                       const PopulationSpectrum& spectrum,
                                       LossKind loss, const SolverOptions& opts) {
    const double ratio = spectrum.ratio();
    ShrinkageResult r;
    r.loss_kind = loss;
    r.mode = ShrinkageMode::Transitional;
    r.shrunk_eigenvalues.resize(lambdas.size());
    for (Eigen::Index i = 0; i < lambdas.size(); ++i) {
        StieltjesValue v = boundary_stieltjes(spectrum, lambdas[i], opts);
        if (loss == LossKind::Frobenius) {
            r.shrunk_eigenvalues[i] = 1.0 / (lambdas[i] * std::norm(v.m_frak));
        } else {
            double denom = 1.0 - ratio + 2.0 * lambdas[i] * v.m_frak.real();
            if (std::abs(denom) < 1e-10)
                throw DenominatorNearZero("transitional inverse-Frobenius denominator vanished");
            r.shrunk_eigenvalues[i] = -lambdas[i] / denom;
        }
    }
    finalize_diagnostics(r);
    return r;
}

double loss(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B, LossKind kind) {
    if (A.rows() != B.rows() || A.cols() != B.cols() || A.rows() != A.cols())
        throw std::invalid_argument("loss needs square matrices of one shape");
    const double M = static_cast<double>(A.rows());
    if (kind == LossKind::Frobenius) return (A - B).squaredNorm() / M;
    Eigen::FullPivLU<Eigen::MatrixXd> la(A), lb(B);
    if (!la.isInvertible() || !lb.isInvertible())
        throw NonInvertible("inverse-Frobenius loss needs invertible matrices");
    return (la.inverse() - lb.inverse()).squaredNorm() / M;
}

double loss_codiagonal(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
    if (a.size() != b.size()) throw std::invalid_argument("length mismatch");
    return (a - b).squaredNorm() / static_cast<double>(a.size());
}

Eigen::MatrixXd assemble_estimator(const SampleDecomposition& decomp,
                                   const ShrinkageResult& result) {
    const Eigen::MatrixXd& U = decomp.eigenvectors();
    if (result.shrunk_eigenvalues.size() != U.cols())
        throw std::invalid_argument("shrunk eigenvalue count mismatch");
    Eigen::MatrixXd est =
        U * result.shrunk_eigenvalues.asDiagonal() * U.transpose();
    return 0.5 * (est + est.transpose());  // kill roundoff asymmetry
}

}  // namespace rmtcov
