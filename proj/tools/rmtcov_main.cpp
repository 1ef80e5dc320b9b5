// rmtcov: nonlinear shrinkage and random-matrix spectral toolkit.
//
// Subcommands: solve-mp, support, estimate, predict-overlap, verify-kernels,
// simulate. Exit codes: 0 success, 1 input error, 2 numerical failure,
// 3 verification failure.

#include <complex>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rmtcov/errors.hpp"
#include "rmtcov/io.hpp"
#include "rmtcov/kernel_verify.hpp"
#include "rmtcov/overlaps.hpp"
#include "rmtcov/sample.hpp"
#include "rmtcov/shrinkage.hpp"
#include "rmtcov/simulation.hpp"
#include "rmtcov/stieltjes.hpp"
#include "rmtcov/support.hpp"

namespace fs = std::filesystem;
using namespace rmtcov;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 1;
constexpr int kExitNumerical = 2;
constexpr int kExitVerification = 3;

struct SpectrumArgs {
    std::string path;
    std::size_t n = 0;
    std::size_t m = 0;  // only needed for two-column spectra
};

void add_spectrum_options(CLI::App* cmd, SpectrumArgs& args) {
    cmd->add_option("--spectrum", args.path, "population spectrum CSV")->required();
    cmd->add_option("--n", args.n, "sample size N")->required();
    cmd->add_option("--m", args.m, "dimension M (two-column spectra only)");
}

Complex parse_complex(const std::string& s) {
    auto comma = s.find(',');
    if (comma == std::string::npos) return {std::stod(s), 0.0};
    return {std::stod(s.substr(0, comma)), std::stod(s.substr(comma + 1))};
}

int run_solve_mp(const SpectrumArgs& sargs, const std::vector<std::string>& z_args,
                 const std::string& grid, double grid_eta, const std::string& out,
                 int max_iter, bool verbose) {
    PopulationSpectrum spectrum = load_spectrum_csv(sargs.path, sargs.n, sargs.m);
    SolverOptions opts;
    if (max_iter > 0) opts.max_iterations = max_iter;

    std::vector<Complex> zs;
    for (const auto& s : z_args) zs.push_back(parse_complex(s));
    if (!grid.empty()) {
        auto c1 = grid.find(':'), c2 = grid.rfind(':');
        if (c1 == std::string::npos || c2 == c1)
            throw IoError("grid spec must be E0:E1:count");
        double e0 = std::stod(grid.substr(0, c1));
        double e1 = std::stod(grid.substr(c1 + 1, c2 - c1 - 1));
        int count = std::stoi(grid.substr(c2 + 1));
        for (int i = 0; i < count; ++i) {
            double e = e0 + (e1 - e0) * (count == 1 ? 0.0 : static_cast<double>(i) /
                                                            (count - 1));
            zs.emplace_back(e, grid_eta);
        }
    }
    if (zs.empty()) throw IoError("no spectral parameters: pass --z or --grid");

    std::vector<std::string> lines;
    lines.push_back("z_re,z_im,m_frak_re,m_frak_im,m_re,m_im,density");
    std::optional<Complex> warm;
    for (Complex z : zs) {
        StieltjesValue v;
        try {
            if (z.imag() == 0.0) {
                v = boundary_stieltjes(spectrum, z.real(), opts);
            } else {
                v = solve_stieltjes(spectrum, z, opts, warm);
            }
        } catch (const NonConvergence& e) {
            std::cerr << "solver failed at z = (" << z.real() << ", " << z.imag()
                      << "): " << e.what() << "\n";
            return kExitNumerical;
        }
        warm = v.m_frak;
        double dens = std::max(v.m_frak.imag(), 0.0) / M_PI;
        lines.push_back(format_double(z.real()) + "," + format_double(z.imag()) + "," +
                        format_double(v.m_frak.real()) + "," +
                        format_double(v.m_frak.imag()) + "," + format_double(v.m.real()) +
                        "," + format_double(v.m.imag()) + "," + format_double(dens));
    }
    if (out.empty()) {
        for (const auto& l : lines) std::cout << l << "\n";
    } else {
        write_text_file(out, lines);
        if (verbose) std::cerr << "wrote " << out << "\n";
    }
    return kExitOk;
}

int run_support(const SpectrumArgs& sargs, const std::string& out, bool verbose) {
    PopulationSpectrum spectrum = load_spectrum_csv(sargs.path, sargs.n, sargs.m);
    SupportStructure support = find_support(spectrum);
    std::cout << "bulks: " << support.num_bulks() << "\n";
    for (int k = 1; k <= support.num_bulks(); ++k)
        std::cout << "bulk " << k << ": [" << format_double(support.bulk_lo(k)) << ", "
                  << format_double(support.bulk_hi(k))
                  << "]  N_k = " << support.bulk_counts[static_cast<std::size_t>(k - 1)]
                  << "\n";
    if (!out.empty()) {
        save_support_csv(out, support);
        if (verbose) std::cerr << "wrote " << out << "\n";
    }
    return kExitOk;
}

int run_estimate(const std::string& data_path, const std::string& loss_name,
                 const std::string& eta_arg, const std::string& out_dir, bool verbose) {
    Eigen::MatrixXd Y = is_blob_file(data_path) ? load_matrix_blob(data_path)
                                                : load_matrix_csv(data_path);
    if (Y.rows() >= Y.cols()) {
        std::cerr << "input has M = " << Y.rows() << " >= N = " << Y.cols()
                  << "; the shrinkage path requires M < N\n";
        return kExitInput;
    }
    SampleDecomposition decomp = SampleDecomposition::from_data(Y);
    double eta = (eta_arg == "auto") ? default_eta(decomp.sample_size())
                                     : std::stod(eta_arg);
    LossKind kind = (loss_name == "finv") ? LossKind::InverseFrobenius
                                          : LossKind::Frobenius;
    ShrinkageResult result = (kind == LossKind::Frobenius)
                                 ? shrink_frobenius(decomp, eta)
                                 : shrink_inverse_frobenius(decomp, eta);
    for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";

    fs::create_directories(out_dir);
    std::vector<std::string> lines;
    lines.push_back("i,lambda,shrunk_lambda,mode,loss_kind");
    for (Eigen::Index i = 0; i < result.shrunk_eigenvalues.size(); ++i)
        lines.push_back(std::to_string(i + 1) + "," +
                        format_double(decomp.eigenvalues()[i]) + "," +
                        format_double(result.shrunk_eigenvalues[i]) + ",algorithmic," +
                        (kind == LossKind::Frobenius ? "f" : "finv"));
    std::string csv = (fs::path(out_dir) / "shrinkage.csv").string();
    write_text_file(csv, lines);
    std::string blob = (fs::path(out_dir) / "estimator.blob").string();
    save_matrix_blob(blob, assemble_estimator(decomp, result));
    if (verbose) std::cerr << "wrote " << csv << " and " << blob << "\n";
    return kExitOk;
}

int run_predict_overlap(const SpectrumArgs& sargs, const std::string& data_path,
                        const std::string& out, bool verbose) {
    PopulationSpectrum spectrum = load_spectrum_csv(sargs.path, sargs.n, sargs.m);
    SupportStructure support = find_support(spectrum);
    const Eigen::Index M = static_cast<Eigen::Index>(spectrum.dimension());
    const Eigen::VectorXd sigma =
        Eigen::Map<const Eigen::VectorXd>(spectrum.eigenvalues().data(), M);

    std::optional<SampleDecomposition> decomp;
    if (!data_path.empty()) {
        Eigen::MatrixXd Y = is_blob_file(data_path) ? load_matrix_blob(data_path)
                                                    : load_matrix_csv(data_path);
        decomp = SampleDecomposition::from_data(Y);
    }

    std::vector<std::string> lines;
    lines.push_back("k,i,family,gamma,empirical,predicted,envelope,normalized_error");
    const std::size_t count = support.classical_locations.size();
    const double N = static_cast<double>(spectrum.sample_size());
    const std::vector<std::pair<std::string, Eigen::VectorXd>> families{
        {"I", Eigen::VectorXd::Ones(M)},
        {"Sigma", sigma},
        {"SigmaInv", sigma.cwiseInverse()}};
    for (std::size_t idx = 0; idx < count; ++idx) {
        double gamma = support.classical_locations[idx];
        auto [k, i] = support.relabel(static_cast<int>(idx) + 1);
        double nf = support.n_factor(static_cast<int>(idx) + 1);
        double envelope = std::pow(N * nf * nf, -1.0 / 6.0);
        for (const auto& [family, diag] : families) {
            double pred = predicted_overlap_uu_diag(spectrum, gamma, diag);
            double emp = std::numeric_limits<double>::quiet_NaN();
            double nerr = std::numeric_limits<double>::quiet_NaN();
            if (decomp && idx < static_cast<std::size_t>(decomp->dim())) {
                const Eigen::MatrixXd& U = decomp->eigenvectors();
                Eigen::VectorXd u = U.col(static_cast<Eigen::Index>(idx));
                emp = u.cwiseProduct(diag).dot(u);
                nerr = std::abs(emp - pred) / envelope;
            }
            lines.push_back(std::to_string(k) + "," + std::to_string(i) + ",uu:" +
                            family + "," + format_double(gamma) + "," +
                            format_double(emp) + "," + format_double(pred) + "," +
                            format_double(envelope) + "," + format_double(nerr));
        }
    }
    if (out.empty()) {
        for (const auto& l : lines) std::cout << l << "\n";
    } else {
        write_text_file(out, lines);
        if (verbose) std::cerr << "wrote " << out << "\n";
    }
    return kExitOk;
}

int run_verify_kernels(int n, int trials, std::uint64_t seed, double multiplier,
                       bool inject_fault, const std::string& out) {
    KernelVerifyParams params;
    params.n = n;
    params.trials = trials;
    params.seed = seed;
    params.multiplier = multiplier;
    if (inject_fault) params.t_fault = 1e-3;
    std::vector<KernelCheckRow> rows = run_kernel_verification(params);

    std::vector<std::string> lines;
    lines.push_back("identity,max_residual,threshold,pass");
    for (const auto& r : rows)
        lines.push_back("\"" + r.name + "\"," + format_double(r.value) + "," +
                        format_double(r.threshold) + "," + (r.pass ? "1" : "0"));
    if (out.empty()) {
        for (const auto& l : lines) std::cout << l << "\n";
    } else {
        write_text_file(out, lines);
    }
    return all_pass(rows) ? kExitOk : kExitVerification;
}

int run_simulate(const std::string& config_path, const std::string& out_override,
                 std::uint64_t seed_override, bool has_seed, const std::string& study,
                 bool verbose) {
    SimulationConfig config = SimulationConfig::load(config_path);
    if (!out_override.empty()) config.out_dir = out_override;
    if (has_seed) config.seed = seed_override;
    if (config.out_dir.empty()) {
        std::cerr << "config has no out_dir and no --out was given\n";
        return kExitInput;
    }
    fs::path out(config.out_dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (!fs::is_directory(out)) {
        std::cerr << "cannot create output directory " << config.out_dir << "\n";
        return kExitInput;
    }
    // probe writability up front (create_directories succeeds on existing dirs)
    {
        std::ofstream probe(out / ".write_probe");
        if (!probe) {
            std::cerr << "output directory not writable: " << config.out_dir << "\n";
            return kExitInput;
        }
        probe.close();
        fs::remove(out / ".write_probe", ec);
    }

    std::string kind = study;
    if (kind == "auto") kind = config.n_grid.size() > 1 ? "rate" : "entrywise";
    if (kind == "entrywise") {
        EntrywiseStudy s = run_entrywise_study(config);
        if (verbose)
            for (const auto& f : s.written) std::cerr << "wrote " << f << "\n";
    } else if (kind == "rate") {
        RateFit fit = run_rate_study(config);
        std::cout << "loss slope: " << format_double(fit.slope_loss) << " (se "
                  << format_double(fit.slope_loss_se) << ")\n";
        std::cout << "opnorm slope: " << format_double(fit.slope_opnorm) << " (se "
                  << format_double(fit.slope_opnorm_se) << ")\n";
        if (fit.eta_outside_supported_range)
            std::cout << "note: eta outside the supported range; the 1/(N eta) term "
                         "dominates the bound\n";
    } else if (kind == "overlap") {
        PopulationSpectrum spec = config.make_spectrum(config.n_grid.back());
        OverlapObservables obs = OverlapObservables::defaults(spec, config.seed);
        OverlapStudyResult res = run_overlap_study(config, obs);
        if (verbose)
            for (const auto& f : res.written) std::cerr << "wrote " << f << "\n";
    } else {
        std::cerr << "unknown study kind: " << kind << "\n";
        return kExitInput;
    }
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"nonlinear covariance shrinkage and spectral toolkit"};
    app.require_subcommand(1);
    bool verbose = false;
    app.add_flag("--verbose", verbose, "chatty stderr");

    // solve-mp
    auto* solve = app.add_subcommand("solve-mp", "solve the self-consistent equation");
    SpectrumArgs solve_spec;
    add_spectrum_options(solve, solve_spec);
    std::vector<std::string> z_args;
    std::string grid, solve_out;
    double grid_eta = 1e-6;
    int max_iter = 0;
    solve->add_option("--z", z_args, "spectral parameter re,im (repeatable)");
    solve->add_option("--grid", grid, "real grid E0:E1:count");
    solve->add_option("--eta", grid_eta, "imaginary part for --grid points");
    solve->add_option("--out", solve_out, "output CSV (stdout when omitted)");
    solve->add_option("--max-iter", max_iter, "solver iteration budget override");

    // support
    auto* support = app.add_subcommand("support", "spectral edges and quantiles");
    SpectrumArgs support_spec;
    add_spectrum_options(support, support_spec);
    std::string support_out;
    support->add_option("--out", support_out, "classical locations CSV");

    // estimate
    auto* estimate = app.add_subcommand("estimate", "nonlinear shrinkage estimator");
    std::string data_path, loss_name = "f", eta_arg = "auto", est_out = "out";
    estimate->add_option("--data", data_path, "data matrix CSV or blob")->required();
    estimate->add_option("--loss", loss_name, "loss kind: f | finv")
        ->check(CLI::IsMember({"f", "finv"}));
    estimate->add_option("--eta", eta_arg, "scale parameter (or 'auto' = N^-1/2)");
    estimate->add_option("--out", est_out, "output directory");

    // predict-overlap
    auto* predict = app.add_subcommand("predict-overlap", "deterministic overlaps");
    SpectrumArgs predict_spec;
    add_spectrum_options(predict, predict_spec);
    std::string predict_data, predict_out;
    predict->add_option("--data", predict_data, "optional data matrix for empirical side");
    predict->add_option("--out", predict_out, "output CSV (stdout when omitted)");

    // verify-kernels
    auto* verify = app.add_subcommand("verify-kernels", "kernel identity suite");
    int vk_n = 50, vk_trials = 100;
    std::uint64_t vk_seed = 7;
    double vk_multiplier = 10.0;
    bool vk_fault = false;
    std::string vk_out;
    verify->add_option("--n", vk_n, "matrix dimension M = N");
    verify->add_option("--trials", vk_trials, "random parameter draws");
    verify->add_option("--seed", vk_seed, "rng seed");
    verify->add_option("--multiplier", vk_multiplier, "regularity constant");
    verify->add_option("--out", vk_out, "table CSV (stdout when omitted)");
    verify->add_flag("--inject-fault", vk_fault)->group("");  // hidden test hook

    // simulate
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo studies");
    std::string config_path, sim_out, study_kind = "auto";
    std::uint64_t sim_seed = 0;
    simulate->add_option("--config", config_path, "study configuration")->required();
    simulate->add_option("--out", sim_out, "output directory override");
    auto* seed_opt = simulate->add_option("--seed", sim_seed, "seed override");
    simulate->add_option("--study", study_kind, "entrywise | rate | overlap | auto")
        ->check(CLI::IsMember({"entrywise", "rate", "overlap", "auto"}));

    CLI11_PARSE(app, argc, argv);

    try {
        if (solve->parsed())
            return run_solve_mp(solve_spec, z_args, grid, grid_eta, solve_out, max_iter,
                                verbose);
        if (support->parsed()) return run_support(support_spec, support_out, verbose);
        if (estimate->parsed())
            return run_estimate(data_path, loss_name, eta_arg, est_out, verbose);
        if (predict->parsed())
            return run_predict_overlap(predict_spec, predict_data, predict_out, verbose);
        if (verify->parsed())
            return run_verify_kernels(vk_n, vk_trials, vk_seed, vk_multiplier, vk_fault,
                                      vk_out);
        if (simulate->parsed())
            return run_simulate(config_path, sim_out, sim_seed, seed_opt->count() > 0,
                                study_kind, verbose);
    } catch (const IoError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::invalid_argument& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const NonConvergence& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    } catch (const Error& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitOk;
}
