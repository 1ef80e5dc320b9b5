#include <doctest.h>

#include <cmath>
#include <complex>

#include <Eigen/Dense>

#include "oracles.hpp"
#include "rmtcov/block_matrix.hpp"
#include "rmtcov/errors.hpp"
#include "rmtcov/kernel_verify.hpp"
#include "rmtcov/kernels.hpp"
#include "rmtcov/rng.hpp"
#include "rmtcov/simulation.hpp"
#include "rmtcov/support.hpp"

using namespace rmtcov;

namespace {

PopulationSpectrum mixed_spectrum(std::size_t M, std::size_t N, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<double> sigma(M);
    for (auto& s : sigma) s = 0.5 + 2.0 * rng.next_double();
    return PopulationSpectrum(sigma, N);
}

BlockObservable random_observable(Rng& rng, Eigen::Index M, Eigen::Index N) {
    Eigen::MatrixXcd A(M + N, M + N);
    for (Eigen::Index i = 0; i < M + N; ++i)
        for (Eigen::Index j = 0; j < M + N; ++j)
            A(i, j) = Complex(rng.next_gaussian(), rng.next_gaussian());
    BlockObservable out{A, M, N};
    return (1.0 / out.op_norm()) * out;
}

double max_abs(const BlockObservable& A) { return A.mat().cwiseAbs().maxCoeff(); }

struct Ctx2 {
    PopulationSpectrum spectrum;
    SupportStructure support;
    KernelContext ctx;
};

Ctx2 make_ctx(std::size_t M, std::size_t N, const std::vector<Complex>& ws,
              std::uint64_t seed = 1) {
    PopulationSpectrum spec = mixed_spectrum(M, N, seed);
    SupportOptions opts;
    opts.with_classical_locations = false;
    opts.with_bulk_counts = false;
    SupportStructure sup = find_support(spec, opts);
    KernelContext ctx = KernelContext::make(spec, sup, ws);
    return {std::move(spec), std::move(sup), std::move(ctx)};
}

}  // namespace

TEST_CASE("S = S_d + S_o against the rank-two sum definition") {
    // S[A] = (1/N) sum_{i,mu} Delta^{i mu} A Delta^{i mu} with
    // Delta^{i mu} = Sigma^{1/2}(e_i e_mu' + e_mu e_i')Sigma^{1/2}
    const Eigen::Index M = 5, N = 7;
    PopulationSpectrum spec = mixed_spectrum(M, N, 3);
    Rng rng(4);
    BlockObservable A = random_observable(rng, M, N);

    Eigen::VectorXd sqrt_emb(M + N);
    for (Eigen::Index i = 0; i < M; ++i)
        sqrt_emb[i] = std::sqrt(spec.eigenvalues()[static_cast<std::size_t>(i)]);
    sqrt_emb.tail(N).setOnes();

    Eigen::MatrixXcd S = Eigen::MatrixXcd::Zero(M + N, M + N);
    for (Eigen::Index i = 0; i < M; ++i) {
        for (Eigen::Index mu = 0; mu < N; ++mu) {
            Eigen::MatrixXd delta = Eigen::MatrixXd::Zero(M + N, M + N);
            delta(i, M + mu) = sqrt_emb[i] * sqrt_emb[M + mu];
            delta(M + mu, i) = sqrt_emb[i] * sqrt_emb[M + mu];
            S += delta * A.mat() * delta;
        }
    }
    S /= static_cast<double>(N);
    BlockObservable expected{S, M, N};
    BlockObservable got = s_diag(A, spec) + s_offdiag(A, spec);
    CHECK(max_abs(got - expected) < 1e-12);
}

TEST_CASE("s_diag special cases and linearity") {
    const Eigen::Index M = 6, N = 9;
    PopulationSpectrum spec = mixed_spectrum(M, N, 5);
    // A = I_N: <I_N I_N> = 1, so the image is Sigma_M
    BlockObservable in = BlockObservable::embed_in(M, N);
    CHECK(max_abs(s_diag(in, spec) - BlockObservable::embed_sigma(spec)) < 1e-14);
    // A = Sigma_M: blocks are disjoint, the image is <Sigma^2> I_N
    BlockObservable sm = BlockObservable::embed_sigma(spec);
    Complex tr2 = spec.trace_sq() / static_cast<double>(N);
    BlockObservable expected = tr2 * BlockObservable::embed_in(M, N);
    CHECK(max_abs(s_diag(sm, spec) - expected) < 1e-14);
    // linearity
    Rng rng(6);
    BlockObservable A = random_observable(rng, M, N);
    BlockObservable B = random_observable(rng, M, N);
    BlockObservable lhs = s_diag(A + Complex(0.0, 2.0) * B, spec);
    BlockObservable rhs = s_diag(A, spec) + Complex(0.0, 2.0) * s_diag(B, spec);
    CHECK(max_abs(lhs - rhs) < 1e-12);
}

TEST_CASE("s_offdiag: block structure, Pi in its kernel, norm bound") {
    const Eigen::Index M = 6, N = 9;
    PopulationSpectrum spec = mixed_spectrum(M, N, 8);
    Rng rng(9);
    BlockObservable A = random_observable(rng, M, N);
    BlockObservable img = s_offdiag(A, spec);
    CHECK(img.block_m().cwiseAbs().maxCoeff() == 0.0);
    CHECK(img.block_n().cwiseAbs().maxCoeff() == 0.0);
    // S_o vanishes on block-diagonal matrices (the transpose keeps the
    // off-diagonal blocks off-diagonal)
    SupportOptions opts;
    opts.with_classical_locations = false;
    opts.with_bulk_counts = false;
    SupportStructure sup = find_support(spec, opts);
    KernelContext ctx = KernelContext::make(spec, sup, {Complex(1.5, 0.3), Complex(1.2, -0.4)});
    CHECK(max_abs(s_offdiag(ctx.pi_dense(1), spec)) < 1e-14);
    // ||S_o[A]|| <= 2 ||Sigma|| ||A|| / N
    CHECK(img.op_norm() <=
          2.0 * spec.max_eigenvalue() * A.op_norm() / static_cast<double>(N) + 1e-12);
}

TEST_CASE("stability operator and its inverse") {
    auto [spec, sup, ctx] = make_ctx(24, 36, {Complex(1.3, 0.35), Complex(1.0, 0.22)});
    const Eigen::Index M = 24, N = 36;
    Rng rng(12);

    SUBCASE("B12 is the identity on S_d-null observables") {
        BlockObservable A = random_observable(rng, M, N);
        // remove the two block traces S_d sees
        Complex a_n = A.ntrace_block_n();
        A.block_n().diagonal().array() -= a_n;
        const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
            spec.eigenvalues().data(), M);
        Complex a_s = A.ntrace_m_weighted(sigma);
        double tr2 = spec.trace_sq() / static_cast<double>(N);
        A.block_m().diagonal() -=
            (a_s / tr2) * sigma.cast<Complex>();  // kills <A Sigma_M>
        CHECK(std::abs(A.ntrace_m_weighted(sigma)) < 1e-13);
        CHECK(max_abs(apply_B12(ctx, A) - A) < 1e-12);
    }

    SUBCASE("B12[Pi1 V Pi2] = Pi1 A Pi2 for V = X12[A]") {
        BlockObservable A = random_observable(rng, M, N);
        BlockObservable V = apply_X12(ctx, A);
        BlockObservable piVpi{
            ctx.pi_diag(1).asDiagonal() * V.mat() * ctx.pi_diag(2).asDiagonal(), M, N};
        BlockObservable lhs = apply_B12(ctx, piVpi);
        BlockObservable rhs{
            ctx.pi_diag(1).asDiagonal() * A.mat() * ctx.pi_diag(2).asDiagonal(), M, N};
        CHECK(max_abs(lhs - rhs) < 1e-12);
    }

    SUBCASE("duality over 50 random pairs") {
        for (int t = 0; t < 50; ++t) {
            BlockObservable A1 = random_observable(rng, M, N);
            BlockObservable A2 = random_observable(rng, M, N);
            Complex lhs = (apply_B12(ctx, A1, 1, 2) * apply_X12(ctx, A2, 2, 1)).ntrace();
            Complex rhs = (A1 * A2).ntrace();
            CHECK(std::abs(lhs - rhs) < 1e-10);
        }
    }

    SUBCASE("X12 fixes observables with vanishing correction traces") {
        BlockObservable A = random_observable(rng, M, N);
        Complex a_n = A.ntrace_block_n();
        A.block_n().diagonal().array() -= a_n;
        // zero the Gamma-weighted M trace by shifting the diagonal
        const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
            spec.eigenvalues().data(), M);
        Eigen::VectorXcd g1 = ctx.gamma_diag(1), g2 = ctx.gamma_diag(2);
        Complex sandwich = (g1.array() * A.block_m().diagonal().array() * g2.array() *
                            sigma.array().cast<Complex>())
                               .sum() /
                           static_cast<double>(N);
        Complex basis = (g1.array() * g2.array() * sigma.array().cast<Complex>()).sum() /
                        static_cast<double>(N);
        A.block_m().diagonal().array() -= sandwich / basis;
        CHECK(max_abs(apply_X12(ctx, A) - A) < 1e-12);
    }

    SUBCASE("near-singular stability guard") {
        KernelContext faulty = ctx;
        // force 1 - t*b = 0 exactly via the fault hook
        Complex t = faulty.t_pair(1, 2), b = faulty.b_pair(1, 2);
        faulty.inject_t_fault(1.0 / b - t);
        REQUIRE(faulty.beta(1, 2) < 1e-14);
        Rng r2(1);
        BlockObservable A = random_observable(r2, M, N);
        CHECK_THROWS_AS((void)apply_X12(faulty, A), NearSingularStability);
    }
}

TEST_CASE("divided difference") {
    PopulationSpectrum spec = mixed_spectrum(40, 120, 14);
    SupportOptions opts;
    opts.with_classical_locations = false;
    SupportStructure sup = find_support(spec, opts);

    SUBCASE("equal-argument case matches the secant limit") {
        Complex z(2.0, 0.4);
        Complex deriv = divided_difference(spec, z, z);
        Complex secant = divided_difference(spec, z, z + 1e-7);
        CHECK(std::abs(deriv - secant) < 1e-4 * std::abs(deriv));
        // independent finite-difference route
        Complex fd = m_frak_derivative_fd(spec, z);
        CHECK(std::abs(deriv - fd) < 1e-7 * std::abs(deriv));
    }

    SUBCASE("integral representation over the spectral law") {
        // m[z1,z2] = int rho(dx)/((x-z1)(x-z2)), including the atom at zero
        Complex z1(1.5, 0.5), z2(2.5, 0.8);
        Complex dd = divided_difference(spec, z1, z2);
        const double c = spec.ratio();
        auto integrand_re = [&](double x) {
            Complex v = 1.0 / ((x - z1) * (x - z2));
            return v.real() * density(spec, x);
        };
        auto integrand_im = [&](double x) {
            Complex v = 1.0 / ((x - z1) * (x - z2));
            return v.imag() * density(spec, x);
        };
        double lo = sup.edges.back(), hi = sup.edges.front();
        double re = oracles::simpson(integrand_re, lo, hi, 1e-9);
        double im = oracles::simpson(integrand_im, lo, hi, 1e-9);
        Complex atom = (1.0 - c) / (z1 * z2);  // mass of rho({0}) for M < N
        Complex integral = Complex(re, im) + atom;
        CHECK(std::abs(dd - integral) < 1e-6);
    }

    SUBCASE("uniform lower bound on same-half-plane pairs") {
        Rng rng(15);
        for (int t = 0; t < 60; ++t) {
            double lo = std::sqrt(sup.edges.back()), hi = std::sqrt(sup.edges.front());
            Complex w1(lo + (hi - lo) * rng.next_double(), 0.05 + 0.5 * rng.next_double());
            Complex w2(lo + (hi - lo) * rng.next_double(), 0.05 + 0.5 * rng.next_double());
            Complex dd = divided_difference(spec, w1 * w1, w2 * w2);
            CHECK(std::abs(dd) >= 0.01);
        }
    }
}

TEST_CASE("Xi matrices and the two-point regularization") {
    auto [spec, sup, ctx] = make_ctx(30, 45, {Complex(1.4, 0.3), Complex(1.1, 0.18)});
    const Eigen::Index M = 30, N = 45;

    SUBCASE("explicit and defining forms agree") {
        auto [xp, xm] = xi_matrices(ctx);
        auto [dp, dm] = xi_matrices_defining(ctx);
        CHECK(max_abs(xp - dp) < 1e-10);
        CHECK(max_abs(xm - dm) < 1e-10);
    }

    SUBCASE("equal parameters collapse Xi^-") {
        KernelContext same = KernelContext::make(
            spec, sup, {Complex(1.4, 0.3), Complex(1.4, 0.3)});
        auto [xp, xm] = xi_matrices(same);
        (void)xp;
        // Xi^- = diag(-w, w): the Sigma and 1/m contributions cancel
        Complex w = same.w(1);
        BlockObservable expected = BlockObservable::zero(M, N);
        expected.block_m().diagonal().setConstant(-w);
        expected.block_n().diagonal().setConstant(w);
        CHECK(max_abs(xm - expected) < 1e-10);
    }

    SUBCASE("(Xi_pm)^o = (pm m1 - m2)(Sigma_M)^o") {
        TwoPointRegularization two = two_point_regularize_sigma(ctx);
        Complex m1 = ctx.m(1), m2 = ctx.m(2);
        auto [xp, xm] = xi_matrices(ctx);
        (void)xp;
        (void)xm;
        BlockObservable xi_plus_reg = (m1 - m2) * two.regularized;
        BlockObservable xi_minus_reg = (-m1 - m2) * two.regularized;
        // regularity carries over: scalar multiples of a regular observable
        RegularityReport rp = is_regular(ctx, xi_plus_reg, 10.0 * std::abs(m1 - m2) + 10.0);
        RegularityReport rm = is_regular(ctx, xi_minus_reg, 10.0 * std::abs(m1 + m2) + 10.0);
        CHECK(rp.regular);
        CHECK(rm.regular);
    }

    SUBCASE("indicator gates the coefficient") {
        KernelContext far = KernelContext::make(
            spec, sup, {Complex(1.4, 0.3), Complex(1.1, 0.18)});
        far.set_tau_prime(1e-6);  // |w1 - w2| now exceeds tau'
        TwoPointRegularization two = two_point_regularize_sigma(far);
        CHECK(two.vartheta == Complex(0.0, 0.0));
        CHECK(max_abs(two.regularized - BlockObservable::embed_sigma(spec)) == 0.0);
    }
}

TEST_CASE("regularity machinery") {
    auto [spec, sup, ctx] = make_ctx(28, 42, {Complex(1.35, 0.3), Complex(1.05, -0.25)});
    const Eigen::Index M = 28, N = 42;
    Rng rng(16);

    SUBCASE("one-point regularization output is regular; I+ is not") {
        BlockObservable D = random_observable(rng, M, N);
        OnePointRegularization one = one_point_regularize(ctx, 1, D);
        RegularityReport rep = is_regular(ctx, one.regularized, 10.0);
        CHECK(rep.regular);
        // defining property: the Im Gamma weighted M trace vanishes
        Eigen::VectorXd img = ctx.gamma_diag(1).imag();
        Complex weighted = (img.array().cast<Complex>() *
                            one.regularized.block_m().diagonal().array())
                               .sum() /
                           static_cast<double>(N);
        CHECK(std::abs(weighted) < 1e-12);
        RegularityReport bad = is_regular(ctx, BlockObservable::identity_plus(M, N), 10.0);
        CHECK(!bad.regular);  // <I_N> = 1 != 0
        CHECK(bad.trace_n > 0.9);
    }

    SUBCASE("(I_M)^o and (I_M)^<> vanish") {
        BlockObservable im = BlockObservable::embed_im(M, N);
        CHECK(max_abs(one_point_regularize(ctx, 1, im).regularized) < 1e-13);
        CHECK(max_abs(one_point_pre_regularize(ctx, 1, im).regularized) < 1e-13);
    }

    SUBCASE("pre-regularization: Sigma-weighted centering and products") {
        BlockObservable D = random_observable(rng, M, N);
        PreRegularization pre = one_point_pre_regularize(ctx, 1, D);
        const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
            spec.eigenvalues().data(), M);
        Eigen::VectorXd weights = ctx.gamma_diag(1).imag().cwiseProduct(sigma);
        Complex weighted = (weights.array().cast<Complex>() *
                            pre.regularized.block_m().diagonal().array())
                               .sum() /
                           static_cast<double>(N);
        CHECK(std::abs(weighted) < 1e-12);
        for (int sign : {+1, -1}) {
            BlockObservable prod =
                pre.regularized * BlockObservable::sigma_pm(spec, sign);
            CHECK(is_regular(ctx, prod, 10.0).regular);
        }
    }

    SUBCASE("regularity survives the conjugation patterns and symmetries") {
        BlockObservable D = random_observable(rng, M, N);
        BlockObservable A = one_point_regularize(ctx, 1, D).regularized;
        REQUIRE(is_regular(ctx, A, 10.0).regular);
        CHECK(is_regular(ctx, A.transposed(), 10.0).regular);
        CHECK(is_regular(ctx, A.conjugated(), 10.0).regular);
        CHECK(is_regular(ctx, A.adjointed(), 10.0).regular);
        CHECK(is_regular(ctx, A * BlockObservable::identity_minus(M, N), 10.0).regular);
    }

    SUBCASE("same-sign conditions dominated by the mixed-sign ones") {
        // on regularized observables the worst same-sign ratio stays within
        // a constant of the worst mixed-sign ratio
        KernelContext same_ctx = KernelContext::make(
            spec, sup, {Complex(1.35, 0.3), Complex(1.05, 0.25)});
        int checked = 0;
        for (int t = 0; t < 100; ++t) {
            BlockObservable D = random_observable(rng, M, N);
            BlockObservable A = one_point_regularize(same_ctx, 1, D).regularized;
            RegularityReport rep = is_regular(same_ctx, A, 10.0);
            // patterns: [0]=(w1,w2) same-sign, [1]=(w1*,w2) mixed,
            // [2]=(w1,w2*) mixed, [3]=(w1*,w2*) same-sign
            double same = std::max(rep.pattern_ratios[0], rep.pattern_ratios[3]);
            double mixed = std::max(rep.pattern_ratios[1], rep.pattern_ratios[2]);
            CHECK(same <= 10.0 * std::max(mixed, 1e-3));
            ++checked;
        }
        CHECK(checked == 100);
    }

    SUBCASE("bounded inverse on regular observables") {
        for (int t = 0; t < 25; ++t) {
            BlockObservable D = random_observable(rng, M, N);
            BlockObservable A = one_point_regularize(ctx, 1, D).regularized;
            for (bool cj : {false, true})
                for (bool ck : {false, true})
                    CHECK(apply_X12(ctx, A, 1, 2, cj, ck).op_norm() <= 20.0);
            CHECK(pi_12(ctx, A).op_norm() <= 20.0);
        }
    }
}

TEST_CASE("three-parameter chain bound") {
    auto made = make_ctx(20, 30, {Complex(1.3, 0.28), Complex(1.15, 0.2), Complex(0.95, 0.33)});
    KernelContext& ctx = made.ctx;
    Rng rng(19);
    const Eigen::Index M = 20, N = 30;
    double eta = ctx.eta();
    for (int t = 0; t < 10; ++t) {
        BlockObservable A1 = one_point_regularize(
                                 ctx, 1, random_observable(rng, M, N))
                                 .regularized;
        BlockObservable A2 = one_point_regularize(
                                 ctx, 2, random_observable(rng, M, N))
                                 .regularized;
        CHECK(pi_123(ctx, A1, A2).op_norm() <= 20.0 / eta);
    }
}

TEST_CASE("three-chain collapse on Xi observables") {
    // Pi_123(Xi^a, A2) = Pi_13(I^a V2) with V2 = X_23[A2]
    auto made = make_ctx(18, 27, {Complex(1.25, 0.3), Complex(1.1, 0.24), Complex(0.9, 0.35)});
    KernelContext& ctx = made.ctx;
    const Eigen::Index M = 18, N = 27;
    Rng rng(29);
    BlockObservable A2 = random_observable(rng, M, N);
    BlockObservable V2 = apply_X12(ctx, A2, 2, 3);
    auto [xp, xm] = xi_matrices(ctx);
    BlockObservable ip = BlockObservable::identity_plus(M, N);
    BlockObservable im = BlockObservable::identity_minus(M, N);
    CHECK(max_abs(pi_123(ctx, xp, A2) - pi_12(ctx, ip * V2, 1, 3)) < 1e-10);
    CHECK(max_abs(pi_123(ctx, xm, A2) - pi_12(ctx, im * V2, 1, 3)) < 1e-10);
}

TEST_CASE("MDE residual behavior") {
    PopulationSpectrum spec = mixed_spectrum(32, 50, 21);
    Complex w(1.5, 0.4);
    StieltjesValue v = solve_stieltjes_w(spec, w);
    CHECK(mde_residual(spec, w, v.m) <= 1e-10);
    CHECK(scalar_consistency_residual(spec, w, v.m) <= 1e-10);
    // uniqueness: a perturbed candidate violates the equation grossly
    CHECK(mde_residual(spec, w, v.m + 0.1) >= 1e-3);
}

TEST_CASE("full verification suite passes and the fault hook trips it") {
    KernelVerifyParams params;
    params.n = 30;
    params.trials = 10;
    auto rows = run_kernel_verification(params);
    CHECK(all_pass(rows));
    params.t_fault = 1e-3;
    auto faulty = run_kernel_verification(params);
    CHECK(!all_pass(faulty));
}

TEST_CASE("Monte Carlo local law spot checks at N = 400") {
    const std::size_t N = 400, M = 200;
    PopulationSpectrum spec = PopulationSpectrum::from_weights(
        {{1.0, 0.2}, {3.0, 0.4}, {10.0, 0.4}}, M, N);
    SupportOptions opts;
    opts.with_classical_locations = false;
    SupportStructure sup = find_support(spec, opts);
    const double eta = 0.5;
    const Eigen::Index Mi = static_cast<Eigen::Index>(M), Ni = static_cast<Eigen::Index>(N);

    const double mid = 0.5 * (std::sqrt(sup.edges.front()) + std::sqrt(sup.edges.back()));
    std::vector<Complex> ws{Complex(mid, eta), Complex(0.8 * mid, eta)};
    KernelContext ctx = KernelContext::make(spec, sup, ws);

    int pass_ave = 0, pass_iso = 0;
    const int draws = 12;
    Rng obs_rng(23);
    for (int d = 0; d < draws; ++d) {
        Eigen::MatrixXd Y = generate_sample(spec, N, EntryDistribution::Gaussian,
                                            mix_seed(202, 0, static_cast<std::uint64_t>(d)));
        // dense eigendecomposition of the dilation once, resolvents from it
        Eigen::MatrixXd H = Eigen::MatrixXd::Zero(Mi + Ni, Mi + Ni);
        H.topRightCorner(Mi, Ni) = Y / std::sqrt(static_cast<double>(N));
        H.bottomLeftCorner(Ni, Mi) = H.topRightCorner(Mi, Ni).transpose();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H);
        auto resolvent = [&](Complex w) {
            Eigen::VectorXcd scale =
                (es.eigenvalues().cast<Complex>().array() - w).inverse();
            return Eigen::MatrixXcd(es.eigenvectors().cast<Complex>() *
                                    scale.asDiagonal() *
                                    es.eigenvectors().transpose().cast<Complex>());
        };
        Eigen::MatrixXcd G1 = resolvent(ws[0]);
        Eigen::MatrixXcd G2 = resolvent(ws[1]);

        BlockObservable D = random_observable(obs_rng, Mi, Ni);
        BlockObservable A = one_point_regularize(ctx, 1, D).regularized;

        // averaged law with one regular matrix
        Complex ave = (G1 * A.mat()).trace() / static_cast<double>(N) -
                      (ctx.pi_diag(1).array() * A.mat().diagonal().array()).sum() /
                          static_cast<double>(N);
        if (std::abs(ave) <= 10.0 / (static_cast<double>(N) * std::sqrt(eta)))
            ++pass_ave;

        // isotropic law with one regular matrix
        Eigen::VectorXd u(Mi + Ni), v(Mi + Ni);
        for (Eigen::Index i = 0; i < Mi + Ni; ++i) {
            u[i] = obs_rng.next_gaussian();
            v[i] = obs_rng.next_gaussian();
        }
        u.normalize();
        v.normalize();
        Complex iso = u.cast<Complex>().dot(G1 * A.mat() * G2 * v.cast<Complex>());
        BlockObservable chain = pi_12(ctx, A);
        Complex iso_pred = u.cast<Complex>().dot(chain.mat() * v.cast<Complex>());
        double iso_err = std::abs(iso - iso_pred);
        if (iso_err <= 10.0 / std::sqrt(static_cast<double>(N) * eta * eta)) ++pass_iso;
        CHECK(iso_err <= 0.2);  // (N eta^2)^{-1/2} envelope with slack
    }
    CHECK(pass_ave >= 10);  // >= 90% of draws within the averaged envelope
    CHECK(pass_iso >= 11);
}
