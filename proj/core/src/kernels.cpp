#include "rmtcov/kernels.hpp"

#include <cmath>
#include <stdexcept>

#include "rmtcov/errors.hpp"

namespace rmtcov {

namespace {

Complex maybe_conj(Complex v, bool c) { return c ? std::conj(v) : v; }

// (1/N) tr(Gamma_1 A_M Gamma_2 Sigma): with Gamma_1, Gamma_2, Sigma all
// diagonal only the diagonal of A_M survives the trace.
Complex gamma_sandwich_trace(const Eigen::VectorXcd& g1, const Eigen::MatrixXcd& A_M,
                             const Eigen::VectorXcd& g2, const Eigen::VectorXd& sigma,
                             double N) {
    Complex s = (g1.array() * A_M.diagonal().array() * g2.array() *
                 sigma.array().cast<Complex>())
                    .sum();
    return s / N;
}

}  // namespace

KernelContext::KernelContext(PopulationSpectrum spectrum, SupportStructure support,
                             std::vector<StieltjesValue> params)
    : spectrum_(std::move(spectrum)),
      support_(std::move(support)),
      params_(std::move(params)) {
    if (params_.size() < 2 || params_.size() > 3)
        throw std::invalid_argument("kernel context takes two or three parameters");
    for (const auto& p : params_)
        gammas_.push_back(gamma_of_w(spectrum_, p.w, p.m));
    tau_prime_ = support_.tau_prime_default();
}

KernelContext KernelContext::make(const PopulationSpectrum& spectrum,
                                  const SupportStructure& support,
                                  const std::vector<Complex>& ws,
                                  const SolverOptions& opts) {
    std::vector<StieltjesValue> params;
    params.reserve(ws.size());
    for (Complex w : ws) params.push_back(solve_stieltjes_w(spectrum, w, opts));
    return KernelContext(spectrum, support, std::move(params));
}

Eigen::Index KernelContext::m_dim() const {
    return static_cast<Eigen::Index>(spectrum_.dimension());
}
Eigen::Index KernelContext::n_dim() const {
    return static_cast<Eigen::Index>(spectrum_.sample_size());
}

Complex KernelContext::w(int k, bool conj) const { return maybe_conj(value(k).w, conj); }
Complex KernelContext::z(int k, bool conj) const { return maybe_conj(value(k).z, conj); }
Complex KernelContext::m(int k, bool conj) const { return maybe_conj(value(k).m, conj); }
Complex KernelContext::m_frak(int k, bool conj) const {
    return maybe_conj(value(k).m_frak, conj);
}

Eigen::VectorXcd KernelContext::gamma_diag(int k, bool conj) const {
    const Eigen::VectorXcd& g = gammas_.at(k - 1);
    return conj ? g.conjugate() : g;
}

Eigen::VectorXcd KernelContext::pi_diag(int k, bool conj) const {
    Eigen::VectorXcd d(m_dim() + n_dim());
    d.head(m_dim()) = gamma_diag(k, conj);
    d.tail(n_dim()).setConstant(m(k, conj));
    return d;
}

BlockObservable KernelContext::pi_dense(int k, bool conj) const {
    return BlockObservable::diagonal(pi_diag(k, conj), m_dim(), n_dim());
}

BlockObservable KernelContext::pi_inverse_dense(int k, bool conj) const {
    return BlockObservable::diagonal(pi_diag(k, conj).cwiseInverse(), m_dim(), n_dim());
}

Complex KernelContext::t_pair(int j, int k, bool cj, bool ck) const {
    const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
        spectrum_.eigenvalues().data(), m_dim());
    Eigen::VectorXcd gj = gamma_diag(j, cj);
    Eigen::VectorXcd gk = gamma_diag(k, ck);
    Complex s = (gj.array() * gk.array() * sigma.array().square().cast<Complex>()).sum();
    return s / static_cast<double>(n_dim()) + t_fault_;
}

Complex KernelContext::b_pair(int j, int k, bool cj, bool ck) const {
    return m(j, cj) * m(k, ck);
}

double KernelContext::beta(int j, int k, bool cj, bool ck) const {
    return std::abs(1.0 - t_pair(j, k, cj, ck) * b_pair(j, k, cj, ck));
}

Complex KernelContext::divided_difference(int j, int k, bool cj, bool ck) const {
    Complex zj = z(j, cj), zk = z(k, ck);
    Complex mj = m_frak(j, cj), mk = m_frak(k, ck);
    if (zj == zk) {
        if (mj == mk) return m_frak_derivative(spectrum_, mj);
        // conjugate pair at a real point cannot occur on the admissible domain
        throw std::invalid_argument("inconsistent divided-difference arguments");
    }
    return (mj - mk) / (zj - zk);
}

double KernelContext::dist(int k) const { return support_.dist_to_edges(z(k)); }

double KernelContext::eta() const {
    double e = std::numeric_limits<double>::infinity();
    for (const auto& p : params_) e = std::min(e, std::abs(p.w.imag()));
    return e;
}

BlockObservable s_diag(const BlockObservable& A, const PopulationSpectrum& spectrum) {
    const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
        spectrum.eigenvalues().data(), A.m());
    Complex a_in = A.ntrace_block_n();            // <A I_N>
    Complex a_sigma = A.ntrace_m_weighted(sigma); // <A Sigma_M>
    BlockObservable out = BlockObservable::zero(A.m(), A.n());
    out.block_m().diagonal() = a_in * sigma.cast<Complex>();
    out.block_n().diagonal().setConstant(a_sigma);
    return out;
}

BlockObservable s_offdiag(const BlockObservable& A, const PopulationSpectrum& spectrum) {
    const Eigen::Index M = A.m(), N = A.n();
    const Eigen::VectorXd sigma =
        Eigen::Map<const Eigen::VectorXd>(spectrum.eigenvalues().data(), M);
    BlockObservable out = BlockObservable::zero(M, N);
    // Sigma_M A' I_N contributes Sigma (A_{NM})' on the top-right block,
    // I_N A' Sigma_M contributes (A_{MN})' Sigma on the bottom-left block.
    Eigen::MatrixXcd top = sigma.cast<Complex>().asDiagonal() *
                           A.mat().bottomLeftCorner(N, M).transpose();
    Eigen::MatrixXcd bottom = A.mat().topRightCorner(M, N).transpose() *
                              sigma.cast<Complex>().asDiagonal();
    const double invN = 1.0 / static_cast<double>(N);
    out.mat().topRightCorner(M, N) = invN * top;
    out.mat().bottomLeftCorner(N, M) = invN * bottom;
    return out;
}

BlockObservable apply_B12(const KernelContext& ctx, const BlockObservable& A,
                          int j, int k, bool cj, bool ck) {
    Eigen::VectorXcd pj = ctx.pi_diag(j, cj);
    Eigen::VectorXcd pk = ctx.pi_diag(k, ck);
    BlockObservable sd = s_diag(A, ctx.spectrum());
    Eigen::MatrixXcd corr = pj.asDiagonal() * sd.mat() * pk.asDiagonal();
    return {A.mat() - corr, A.m(), A.n()};
}

BlockObservable apply_X12(const KernelContext& ctx, const BlockObservable& A,
                          int j, int k, bool cj, bool ck) {
    const double beta = ctx.beta(j, k, cj, ck);
    if (beta < 1e-14)
        throw NearSingularStability("beta(w_j, w_k) below threshold: " +
                                    std::to_string(beta));
    const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
        ctx.spectrum().eigenvalues().data(), ctx.m_dim());
    const double N = static_cast<double>(ctx.n_dim());
    Complex a_n = A.ntrace_block_n();
    Complex sandwich = gamma_sandwich_trace(ctx.gamma_diag(j, cj), A.block_m(),
                                            ctx.gamma_diag(k, ck), sigma, N);
    Complex tb = 1.0 - ctx.t_pair(j, k, cj, ck) * ctx.b_pair(j, k, cj, ck);
    Complex coeff = (sandwich + a_n) / tb;
    Complex b = ctx.b_pair(j, k, cj, ck);

    BlockObservable out = A;
    out.block_n().diagonal().array() -= a_n;
    out.block_m().diagonal() += coeff * b * sigma.cast<Complex>();
    out.block_n().diagonal().array() += coeff;
    return out;
}

BlockObservable pi_12(const KernelContext& ctx, const BlockObservable& A1,
                      int j, int k, bool cj, bool ck) {
    BlockObservable V = apply_X12(ctx, A1, j, k, cj, ck);
    Eigen::VectorXcd pj = ctx.pi_diag(j, cj);
    Eigen::VectorXcd pk = ctx.pi_diag(k, ck);
    return {pj.asDiagonal() * V.mat() * pk.asDiagonal(), A1.m(), A1.n()};
}

BlockObservable pi_123(const KernelContext& ctx, const BlockObservable& A1,
                       const BlockObservable& A2) {
    if (ctx.num_params() != 3)
        throw std::invalid_argument("pi_123 needs a three-parameter context");
    BlockObservable V1 = apply_X12(ctx, A1, 1, 2);
    BlockObservable V2 = apply_X12(ctx, A2, 2, 3);
    Eigen::VectorXcd p2 = ctx.pi_diag(2);
    BlockObservable inner{V1.mat() * p2.asDiagonal() * V2.mat(), A1.m(), A1.n()};
    return pi_12(ctx, inner, 1, 3);
}

Complex divided_difference(const PopulationSpectrum& spectrum, Complex z1, Complex z2,
                           const SolverOptions& opts) {
    if (z1 == z2) {
        StieltjesValue v = solve_stieltjes(spectrum, z1, opts);
        return m_frak_derivative(spectrum, v.m_frak);
    }
    StieltjesValue v1 = solve_stieltjes(spectrum, z1, opts);
    StieltjesValue v2 = solve_stieltjes(spectrum, z2, opts);
    return (v1.m_frak - v2.m_frak) / (z1 - z2);
}

Complex m_frak_derivative_fd(const PopulationSpectrum& spectrum, Complex z,
                             const SolverOptions& opts) {
    const double h = 1e-6 * std::abs(z);
    StieltjesValue plus = solve_stieltjes(spectrum, z + h, opts);
    StieltjesValue minus = solve_stieltjes(spectrum, z - h, opts);
    return (plus.m_frak - minus.m_frak) / (2.0 * h);
}

RegularityReport is_regular(const KernelContext& ctx, const BlockObservable& A,
                            double multiplier, int j, int k) {
    const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
        ctx.spectrum().eigenvalues().data(), ctx.m_dim());
    const double N = static_cast<double>(ctx.n_dim());

    RegularityReport rep;
    rep.norm = A.op_norm();
    rep.trace_n = std::abs(A.ntrace_block_n());
    const std::array<std::pair<bool, bool>, 4> patterns{
        {{false, false}, {true, false}, {false, true}, {true, true}}};
    for (std::size_t p = 0; p < patterns.size(); ++p) {
        auto [cj, ck] = patterns[p];
        Complex sandwich = gamma_sandwich_trace(ctx.gamma_diag(j, cj), A.block_m(),
                                                ctx.gamma_diag(k, ck), sigma, N);
        double beta = ctx.beta(j, k, cj, ck);
        rep.pattern_betas[p] = beta;
        rep.pattern_ratios[p] = std::abs(sandwich) / beta;
        rep.worst_ratio = std::max(rep.worst_ratio, rep.pattern_ratios[p]);
    }
    rep.regular = rep.norm <= multiplier && rep.trace_n <= 1e-10 &&
                  rep.worst_ratio <= multiplier;
    return rep;
}

OnePointRegularization one_point_regularize(const KernelContext& ctx, int which,
                                            const BlockObservable& D) {
    const double N = static_cast<double>(ctx.n_dim());
    Eigen::VectorXd im_gamma = ctx.gamma_diag(which).imag();
    Complex d_m_weighted =
        (im_gamma.array().cast<Complex>() * D.block_m().diagonal().array()).sum() / N;
    double weight = im_gamma.sum() / N;  // <Im Gamma>
    Complex center_m = d_m_weighted / weight;
    Complex d_n = D.ntrace_block_n();

    OnePointRegularization out{D, 0.5 * (center_m + d_n), 0.5 * (center_m - d_n)};
    out.regularized.block_m().diagonal().array() -= center_m;
    out.regularized.block_n().diagonal().array() -= d_n;
    return out;
}

PreRegularization one_point_pre_regularize(const KernelContext& ctx, int which,
                                           const BlockObservable& D) {
    const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
        ctx.spectrum().eigenvalues().data(), ctx.m_dim());
    const double N = static_cast<double>(ctx.n_dim());
    Eigen::VectorXd weights = ctx.gamma_diag(which).imag().cwiseProduct(sigma);
    Complex d_m_weighted =
        (weights.array().cast<Complex>() * D.block_m().diagonal().array()).sum() / N;
    double weight = weights.sum() / N;  // <Im Gamma Sigma>
    Complex center_m = d_m_weighted / weight;
    Complex d_n = D.ntrace_block_n();

    PreRegularization out{D, 0.5 * (center_m + d_n), 0.5 * (center_m - d_n)};
    out.regularized.block_m().diagonal().array() -= center_m;
    out.regularized.block_n().diagonal().array() -= d_n;
    return out;
}

TwoPointRegularization two_point_regularize_sigma(const KernelContext& ctx) {
    Complex vartheta = 0.0;
    if (std::abs(ctx.w(1) - ctx.w(2)) <= ctx.tau_prime()) {
        Complex ratio = ctx.w(2) / ctx.w(1);
        if (ctx.half_plane_sign(1) == ctx.half_plane_sign(2)) {
            if (ctx.dist(1) >= ctx.dist(2))
                vartheta = ratio / ctx.b_pair(1, 2, true, false);   // b(w1*, w2)
            else
                vartheta = ratio / ctx.b_pair(1, 2, false, true);   // b(w1, w2*)
        } else {
            vartheta = ratio * ctx.t_pair(1, 2);
        }
    }
    TwoPointRegularization out{BlockObservable::embed_sigma(ctx.spectrum()), vartheta};
    out.regularized.block_m().diagonal().array() -= vartheta;
    return out;
}

std::pair<BlockObservable, BlockObservable> xi_matrices(const KernelContext& ctx) {
    const Eigen::Index M = ctx.m_dim(), N = ctx.n_dim();
    const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
        ctx.spectrum().eigenvalues().data(), M);
    Complex w1 = ctx.w(1), w2 = ctx.w(2);
    Complex m1 = ctx.m(1), m2 = ctx.m(2);

    BlockObservable plus = BlockObservable::zero(M, N);
    plus.block_m().diagonal() =
        (-w2 - (m1 + m2) * sigma.array().cast<Complex>()).matrix();
    plus.block_n().diagonal().setConstant(w1 + 1.0 / m1 + 1.0 / m2);

    BlockObservable minus = BlockObservable::zero(M, N);
    minus.block_m().diagonal() =
        (-w2 + (m1 - m2) * sigma.array().cast<Complex>()).matrix();
    minus.block_n().diagonal().setConstant(w1 + 1.0 / m1 - 1.0 / m2);
    return {plus, minus};
}

std::pair<BlockObservable, BlockObservable> xi_matrices_defining(const KernelContext& ctx) {
    const Eigen::Index M = ctx.m_dim(), N = ctx.n_dim();
    auto make = [&](int sign) {
        BlockObservable ipm = sign > 0 ? BlockObservable::identity_plus(M, N)
                                       : BlockObservable::identity_minus(M, N);
        BlockObservable pi1_ipm{
            ctx.pi_diag(1).asDiagonal() * ipm.mat(), M, N};
        BlockObservable first{
            ctx.pi_diag(2).cwiseInverse().asDiagonal() * ipm.mat(), M, N};
        return first - s_diag(pi1_ipm, ctx.spectrum());
    };
    return {make(+1), make(-1)};
}

double mde_residual(const PopulationSpectrum& spectrum, Complex w, Complex m) {
    const Eigen::Index M = static_cast<Eigen::Index>(spectrum.dimension());
    const Eigen::Index N = static_cast<Eigen::Index>(spectrum.sample_size());
    Eigen::VectorXcd gamma = gamma_of_w(spectrum, w, m);
    const Eigen::VectorXd sigma =
        Eigen::Map<const Eigen::VectorXd>(spectrum.eigenvalues().data(), M);
    // <Pi I_N> = m, <Pi Sigma_M> = (1/N) sum gamma_i sigma_i
    Complex gs = (gamma.array() * sigma.array().cast<Complex>()).sum() /
                 static_cast<double>(N);
    double res = 0.0;
    for (Eigen::Index i = 0; i < M; ++i) {
        Complex r = 1.0 + w * gamma[i] + m * sigma[i] * gamma[i];
        res = std::max(res, std::abs(r));
    }
    Complex rn = 1.0 + w * m + gs * m;
    return std::max(res, std::abs(rn));
}

double scalar_consistency_residual(const PopulationSpectrum& spectrum, Complex w,
                                   Complex m) {
    const auto& vals = spectrum.group_values();
    const auto& cnts = spectrum.group_counts();
    Complex sum = 0.0;
    for (std::size_t g = 0; g < vals.size(); ++g)
        sum += static_cast<double>(cnts[g]) * vals[g] / (w + m * vals[g]);
    sum /= static_cast<double>(spectrum.sample_size());
    return std::abs(w + 1.0 / m - sum);
}

}  // namespace rmtcov
