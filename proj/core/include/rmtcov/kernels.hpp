#pragma once

#include <array>
#include <map>
#include <utility>
#include <vector>

#include "rmtcov/block_matrix.hpp"
#include "rmtcov/population_spectrum.hpp"
#include "rmtcov/stieltjes.hpp"
#include "rmtcov/support.hpp"

namespace rmtcov {

// Two or three admissible spectral parameters with everything the Section
// 4-5 operator algebra needs cached on top: Gamma diagonals, the pair
// scalars t_jk = <Gamma_j Sigma Gamma_k Sigma> and b_jk = m_j m_k, divided
// differences m[z_j, z_k] for all conjugation patterns, and the stability
// control beta = |1 - t b|.
class KernelContext {
  public:
    KernelContext(PopulationSpectrum spectrum, SupportStructure support,
                  std::vector<StieltjesValue> params);

    static KernelContext make(const PopulationSpectrum& spectrum,
                              const SupportStructure& support,
                              const std::vector<Complex>& ws,
                              const SolverOptions& opts = {});

    int num_params() const { return static_cast<int>(params_.size()); }
    Eigen::Index m_dim() const;
    Eigen::Index n_dim() const;
    const PopulationSpectrum& spectrum() const { return spectrum_; }
    const SupportStructure& support() const { return support_; }

    // k is 1-based; conj selects the reflected parameter w_k^*.
    const StieltjesValue& value(int k) const { return params_.at(k - 1); }
    Complex w(int k, bool conj = false) const;
    Complex z(int k, bool conj = false) const;
    Complex m(int k, bool conj = false) const;       // m(w_k)
    Complex m_frak(int k, bool conj = false) const;  // m(z_k)

    Eigen::VectorXcd gamma_diag(int k, bool conj = false) const;
    Eigen::VectorXcd pi_diag(int k, bool conj = false) const;  // [Gamma; m 1_N]
    BlockObservable pi_dense(int k, bool conj = false) const;
    BlockObservable pi_inverse_dense(int k, bool conj = false) const;

    Complex t_pair(int j, int k, bool cj = false, bool ck = false) const;
    Complex b_pair(int j, int k, bool cj = false, bool ck = false) const;
    double beta(int j, int k, bool cj = false, bool ck = false) const;
    Complex divided_difference(int j, int k, bool cj = false, bool ck = false) const;

    double dist(int k) const;     // d_k = dist(z_k, {edges})
    int half_plane_sign(int k) const { return value(k).w.imag() >= 0.0 ? 1 : -1; }
    double eta() const;           // min_k |Im w_k|

    double tau_prime() const { return tau_prime_; }
    void set_tau_prime(double tp) { tau_prime_ = tp; }

    // Test hook: additively perturbs every t_jk (used by the CLI fault
    // injection path to prove the verification suite can fail).
    void inject_t_fault(Complex eps) { t_fault_ = eps; }

  private:
    PopulationSpectrum spectrum_;
    SupportStructure support_;
    std::vector<StieltjesValue> params_;
    std::vector<Eigen::VectorXcd> gammas_;  // Gamma(w_k) diagonals
    double tau_prime_;
    Complex t_fault_ = 0.0;
};

// S_d[A] = <A I_N> Sigma_M + <A Sigma_M> I_N (block-diagonal part of the
// covariance self-energy map).
BlockObservable s_diag(const BlockObservable& A, const PopulationSpectrum& spectrum);

// S_o[A] = (1/N)(Sigma_M A' I_N + I_N A' Sigma_M) (block-off-diagonal part).
BlockObservable s_offdiag(const BlockObservable& A, const PopulationSpectrum& spectrum);

// Two-body stability operator B_jk[A] = A - Pi_j S_d[A] Pi_k.
BlockObservable apply_B12(const KernelContext& ctx, const BlockObservable& A,
                          int j = 1, int k = 2, bool cj = false, bool ck = false);

// Inverse map X_jk: the unique V with V - S_d[Pi_j V Pi_k] = A, via the
// explicit rank-two correction formula. Throws NearSingularStability when
// beta = |1 - t b| falls below 1e-14.
BlockObservable apply_X12(const KernelContext& ctx, const BlockObservable& A,
                          int j = 1, int k = 2, bool cj = false, bool ck = false);

// Deterministic two-chain approximation Pi_jk(A) = Pi_j X_jk[A] Pi_k.
BlockObservable pi_12(const KernelContext& ctx, const BlockObservable& A1,
                      int j = 1, int k = 2, bool cj = false, bool ck = false);

// Three-chain approximation Pi_123(A1, A2) = Pi_13(X_12[A1] Pi_2 X_23[A2]).
BlockObservable pi_123(const KernelContext& ctx, const BlockObservable& A1,
                       const BlockObservable& A2);

// m[z1, z2]; the equal-argument case returns the implicit-function
// derivative m'(z) = 1/f'(m(z)).
Complex divided_difference(const PopulationSpectrum& spectrum, Complex z1, Complex z2,
                           const SolverOptions& opts = {});

// Centered finite-difference derivative at relative step 1e-6 (independent
// route kept for cross-validation).
Complex m_frak_derivative_fd(const PopulationSpectrum& spectrum, Complex z,
                             const SolverOptions& opts = {});

struct RegularityReport {
    bool regular = false;
    double norm = 0.0;              // ||A||
    double trace_n = 0.0;           // |<A_N>|
    double worst_ratio = 0.0;       // max over patterns of |<G A G S>| / beta
    std::array<double, 4> pattern_ratios{};  // (w1,w2),(w1*,w2),(w1,w2*),(w1*,w2*)
    std::array<double, 4> pattern_betas{};
};

// Regularity test with the implicit constant made explicit: ||A|| <= mult,
// <A_N> = 0 to 1e-10, |<Gamma(w1#) A_M Gamma(w2#) Sigma>| <= mult *
// beta(w1#, w2#) for all four conjugation patterns.
RegularityReport is_regular(const KernelContext& ctx, const BlockObservable& A,
                            double multiplier = 10.0, int j = 1, int k = 2);

// One-point regularization (D)^o_w and its coefficients theta^{+-}:
//   (D)^o = D - (<Im Gamma(w) D_M>/<Im Gamma(w)>) I_M - <D_N> I_N,
//   D = (D)^o + theta^+ I^+ + theta^- I^-.
struct OnePointRegularization {
    BlockObservable regularized;
    Complex theta_plus;
    Complex theta_minus;
};
OnePointRegularization one_point_regularize(const KernelContext& ctx, int which,
                                            const BlockObservable& D);

// One-point pre-regularization (D)^<> with Sigma-weighted M-block centering
// and coefficients varsigma^{+-}; (D)^<> Sigma^{+-} is then regular.
struct PreRegularization {
    BlockObservable regularized;
    Complex varsigma_plus;
    Complex varsigma_minus;
};
PreRegularization one_point_pre_regularize(const KernelContext& ctx, int which,
                                           const BlockObservable& D);

// Two-point regularization of Sigma_M: (Sigma_M)^o = Sigma_M - theta I_M
// with the three-case coefficient (same-sign cases use 1/b at a reflected
// pair, the mixed-sign case uses t_12), gated by |w1-w2| <= tau'.
struct TwoPointRegularization {
    BlockObservable regularized;
    Complex vartheta;
};
TwoPointRegularization two_point_regularize_sigma(const KernelContext& ctx);

// Xi^{+-}(w1,w2) = Pi_2^{-1} I^{+-} - S_d[Pi_1 I^{+-}], explicit diagonal
// form; the defining form is available for cross-checks.
std::pair<BlockObservable, BlockObservable> xi_matrices(const KernelContext& ctx);
std::pair<BlockObservable, BlockObservable> xi_matrices_defining(const KernelContext& ctx);

// Max-norm residual of the matrix Dyson equation I + w Pi + S_d[Pi] Pi = 0
// for the candidate Pi built from (w, m).
double mde_residual(const PopulationSpectrum& spectrum, Complex w, Complex m);

// Scalar-form residual |w + 1/m - (1/N) tr Sigma/(w + m Sigma)|.
double scalar_consistency_residual(const PopulationSpectrum& spectrum, Complex w,
                                   Complex m);

}  // namespace rmtcov
