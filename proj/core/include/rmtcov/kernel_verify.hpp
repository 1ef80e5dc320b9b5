#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rmtcov/kernels.hpp"

namespace rmtcov {

struct KernelCheckRow {
    std::string name;
    double value = 0.0;      // worst residual/ratio across trials
    double threshold = 0.0;
    bool pass = false;
};

struct KernelVerifyParams {
    int n = 50;               // M = N = n
    int trials = 100;
    std::uint64_t seed = 7;
    double multiplier = 10.0;  // regularity constant
    double identity_tol = 1e-10;
    double t_fault = 0.0;      // test hook: perturbs t_12 when nonzero
};

// Machine-checks the deterministic operator identities (duality of the
// stability operator and its inverse, divided-difference forms of the
// two- and three-chain approximations, Xi identities, MDE residual) plus
// the regularization constructions, on random admissible parameters.
std::vector<KernelCheckRow> run_kernel_verification(const KernelVerifyParams& params);

bool all_pass(const std::vector<KernelCheckRow>& rows);

}  // namespace rmtcov
