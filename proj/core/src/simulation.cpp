#include "rmtcov/simulation.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "rmtcov/errors.hpp"
#include "rmtcov/io.hpp"
#include "rmtcov/rng.hpp"

namespace rmtcov {

double Rng::next_gaussian() {
    if (has_cached_) {
        has_cached_ = false;
        return cached_;
    }
    // Box-Muller on (0,1] uniforms
    double u1 = 1.0 - next_double();
    double u2 = next_double();
    double r = std::sqrt(-2.0 * std::log(u1));
    double a = 2.0 * M_PI * u2;
    cached_ = r * std::sin(a);
    has_cached_ = true;
    return r * std::cos(a);
}

double EtaRule::eta_for(std::size_t N) const {
    switch (kind) {
        case Kind::Fixed: return value;
        case Kind::InvSqrtN: return 1.0 / std::sqrt(static_cast<double>(N));
        case Kind::Power: return std::pow(static_cast<double>(N), exponent);
    }
    return 0.0;
}

std::string EtaRule::describe() const {
    switch (kind) {
        case Kind::Fixed: return "fixed:" + format_double(value);
        case Kind::InvSqrtN: return "inv_sqrt";
        case Kind::Power: return "power:" + format_double(exponent);
    }
    return "?";
}

namespace {

std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, sep)) out.push_back(trim(tok));
    return out;
}

}  // namespace

SimulationConfig SimulationConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config: " + path);
    SimulationConfig cfg;
    std::string line;
    long lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        std::string t = trim(line);
        if (t.empty() || t[0] == '#') continue;
        std::size_t eq = t.find('=');
        if (eq == std::string::npos)
            throw IoError("expected key = value at line " + std::to_string(lineno), lineno);
        std::string key = trim(t.substr(0, eq));
        std::string val = trim(t.substr(eq + 1));
        try {
            if (key == "spectrum") {
                cfg.spectrum.clear();
                for (const auto& pair : split(val, ',')) {
                    auto kv = split(pair, ':');
                    if (kv.size() != 2) throw std::invalid_argument(pair);
                    cfg.spectrum.emplace_back(std::stod(kv[0]), std::stod(kv[1]));
                }
            } else if (key == "c") {
                cfg.ratio_c = std::stod(val);
            } else if (key == "n_grid") {
                cfg.n_grid.clear();
                for (const auto& n : split(val, ',')) cfg.n_grid.push_back(std::stoi(n));
            } else if (key == "eta_rule") {
                if (val == "inv_sqrt") {
                    cfg.eta_rule.kind = EtaRule::Kind::InvSqrtN;
                } else if (val.rfind("fixed:", 0) == 0) {
                    cfg.eta_rule.kind = EtaRule::Kind::Fixed;
                    cfg.eta_rule.value = std::stod(val.substr(6));
                } else if (val.rfind("power:", 0) == 0) {
                    cfg.eta_rule.kind = EtaRule::Kind::Power;
                    cfg.eta_rule.exponent = std::stod(val.substr(6));
                } else {
                    throw std::invalid_argument("eta_rule " + val);
                }
            } else if (key == "distribution") {
                if (val == "gaussian") cfg.distribution = EntryDistribution::Gaussian;
                else if (val == "rademacher") cfg.distribution = EntryDistribution::Rademacher;
                else if (val == "uniform") cfg.distribution = EntryDistribution::Uniform;
                else throw std::invalid_argument("distribution " + val);
            } else if (key == "replications") {
                cfg.replications = std::stoi(val);
            } else if (key == "seed") {
                cfg.seed = std::stoull(val);
            } else if (key == "out_dir") {
                cfg.out_dir = val;
            } else {
                throw std::invalid_argument("unknown key " + key);
            }
        } catch (const std::invalid_argument& e) {
            throw IoError("bad config value at line " + std::to_string(lineno) + ": " +
                              e.what(),
                          lineno);
        }
    }
    cfg.validate();
    return cfg;
}

void SimulationConfig::validate() const {
    if (spectrum.empty()) throw std::invalid_argument("config: empty spectrum");
    double total = 0.0;
    for (const auto& [v, f] : spectrum) {
        if (v < 0.0 || f < 0.0) throw std::invalid_argument("config: negative spectrum entry");
        total += f;
    }
    if (std::abs(total - 1.0) > 1e-12)
        throw std::invalid_argument("config: spectrum fractions must sum to 1");
    if (n_grid.empty()) throw std::invalid_argument("config: empty n_grid");
    for (int n : n_grid) {
        if (n <= 0) throw std::invalid_argument("config: nonpositive N");
        int m = static_cast<int>(std::llround(ratio_c * n));
        if (m <= 0 || m >= n)
            throw std::invalid_argument("config: need 0 < M = round(cN) < N for shrinkage");
    }
    if (replications <= 0) throw std::invalid_argument("config: replications must be positive");
}

PopulationSpectrum SimulationConfig::make_spectrum(int N) const {
    int m = static_cast<int>(std::llround(ratio_c * N));
    return PopulationSpectrum::from_weights(spectrum, static_cast<std::size_t>(m),
                                            static_cast<std::size_t>(N));
}

Eigen::MatrixXd generate_sample(const PopulationSpectrum& spectrum, std::size_t N,
                                EntryDistribution dist, std::uint64_t seed) {
    const Eigen::Index M = static_cast<Eigen::Index>(spectrum.dimension());
    const Eigen::Index n = static_cast<Eigen::Index>(N);
    Rng rng(seed);
    Eigen::MatrixXd Y(M, n);
    const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(N));
    const double uniform_hw = std::sqrt(3.0 / static_cast<double>(N));
    for (Eigen::Index i = 0; i < M; ++i) {
        // Y = sqrt(N) Sigma^{1/2} X  =>  row i is sqrt(sigma_i) * (sqrt(N) X_i)
        const double scale = std::sqrt(spectrum.eigenvalues()[static_cast<std::size_t>(i)]);
        for (Eigen::Index j = 0; j < n; ++j) {
            double x;
            switch (dist) {
                case EntryDistribution::Gaussian: x = rng.next_gaussian() * inv_sqrt_n; break;
                case EntryDistribution::Rademacher: x = rng.next_rademacher() * inv_sqrt_n; break;
                case EntryDistribution::Uniform: x = rng.next_uniform_sym(uniform_hw); break;
                default: throw std::invalid_argument("invalid entry distribution");
            }
            Y(i, j) = scale * std::sqrt(static_cast<double>(N)) * x;
        }
    }
    return Y;
}

std::vector<RigidityRow> rigidity_report(const Eigen::VectorXd& lambdas,
                                         const SupportStructure& support,
                                         std::size_t N) {
    const std::size_t count =
        std::min(static_cast<std::size_t>(lambdas.size()),
                 support.classical_locations.size());
    const double n23 = std::pow(static_cast<double>(N), 2.0 / 3.0);
    std::vector<RigidityRow> rows;
    rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double gamma = support.classical_locations[i];
        double s = std::sqrt(std::max(lambdas[static_cast<Eigen::Index>(i)], 0.0));
        double nfac = support.n_factor(static_cast<int>(i) + 1);
        RigidityRow r;
        r.index = static_cast<int>(i) + 1;
        r.s_deviation = std::abs(s - gamma);
        r.l_deviation = std::abs(lambdas[static_cast<Eigen::Index>(i)] - gamma * gamma);
        r.normalized_s = n23 * std::cbrt(nfac) * r.s_deviation;
        r.normalized_l = n23 * std::cbrt(nfac) * r.l_deviation;
        rows.push_back(r);
    }
    return rows;
}

void parallel_for(int count, const std::function<void(int)>& fn) {
    unsigned hw = std::thread::hardware_concurrency();
    int workers = static_cast<int>(hw == 0 ? 2 : hw);
    workers = std::min(workers, count);
    if (workers <= 1) {
        for (int i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr first_error = nullptr;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            while (true) {
                int i = next.fetch_add(1);
                if (i >= count) break;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!first_error) first_error = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (first_error) std::rethrow_exception(first_error);
}

namespace {

double median(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
}

// least-squares slope of y against x
double ls_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        num += (x[i] - mx) * (y[i] - my);
        den += (x[i] - mx) * (x[i] - mx);
    }
    return num / den;
}

std::string svg_scatter(const std::vector<ScatterRow>& rows, int N) {
    // minimal self-contained vector scatter: rank on x, shrinkage on y
    const int W = 720, H = 480, margin = 50;
    double ymin = 1e300, ymax = -1e300;
    for (const auto& r : rows) {
        for (double v : {r.oracle_f, r.algo_f}) {
            ymin = std::min(ymin, v);
            ymax = std::max(ymax, v);
        }
    }
    if (ymin >= ymax) {
        ymin -= 1.0;
        ymax += 1.0;
    }
    double xmax = static_cast<double>(rows.size());
    auto px = [&](double i) { return margin + (W - 2 * margin) * i / xmax; };
    auto py = [&](double v) {
        return H - margin - (H - 2 * margin) * (v - ymin) / (ymax - ymin);
    };
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "'>\n<rect width='100%' height='100%' fill='white'/>\n"
        << "<line x1='" << margin << "' y1='" << H - margin << "' x2='" << W - margin
        << "' y2='" << H - margin << "' stroke='black'/>\n"
        << "<line x1='" << margin << "' y1='" << margin << "' x2='" << margin << "' y2='"
        << H - margin << "' stroke='black'/>\n"
        << "<text x='" << W / 2 << "' y='" << H - 12
        << "' font-size='13' text-anchor='middle'>eigenvalue rank (N=" << N
        << ")</text>\n"
        << "<text x='16' y='" << H / 2
        << "' font-size='13' text-anchor='middle' transform='rotate(-90 16 " << H / 2
        << ")'>shrunk eigenvalue</text>\n";
    for (const auto& r : rows) {
        svg << "<circle cx='" << px(r.index - 0.5) << "' cy='" << py(r.oracle_f)
            << "' r='1.6' fill='#1f77b4'/>\n";
        svg << "<circle cx='" << px(r.index - 0.5) << "' cy='" << py(r.algo_f)
            << "' r='1.6' fill='#d62728' fill-opacity='0.6'/>\n";
    }
    svg << "<text x='" << W - margin << "' y='" << margin - 8
        << "' font-size='12' text-anchor='end'>blue: oracle, red: algorithmic"
        << "</text>\n</svg>\n";
    return svg.str();
}

}  // namespace

EntrywiseStudy run_entrywise_study(const SimulationConfig& config) {
    config.validate();
    EntrywiseStudy study;
    study.config = config;

    const int R = config.replications;
    const int total = static_cast<int>(config.n_grid.size()) * R;
    study.records.assign(static_cast<std::size_t>(total), StudyRecord{});
    study.scatters.assign(config.n_grid.size(), {});

    // bulk structure of the value-weighted shape is N-independent up to
    // rounding; compute it once at the largest N for the n-factors
    {
        PopulationSpectrum ref = config.make_spectrum(config.n_grid.back());
        SupportOptions sup_opts;
        sup_opts.with_classical_locations = false;
        study.bulk_counts = find_support(ref, sup_opts).bulk_counts;
    }

    parallel_for(total, [&](int task) {
        const int ni = task / R;
        const int rep = task % R;
        const int N = config.n_grid[static_cast<std::size_t>(ni)];
        PopulationSpectrum spec = config.make_spectrum(N);
        const double eta = config.eta_rule.eta_for(static_cast<std::size_t>(N));

        std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(N),
                                      static_cast<std::uint64_t>(rep));
        Eigen::MatrixXd Y = generate_sample(spec, static_cast<std::size_t>(N),
                                            config.distribution, seed);
        SampleDecomposition decomp = SampleDecomposition::from_data(Y);

        const Eigen::VectorXd sigma = Eigen::Map<const Eigen::VectorXd>(
            spec.eigenvalues().data(), static_cast<Eigen::Index>(spec.dimension()));
        ShrinkageResult oracle_f = oracle_shrinkage_diag(decomp, sigma, LossKind::Frobenius);
        ShrinkageResult oracle_finv =
            oracle_shrinkage_diag(decomp, sigma, LossKind::InverseFrobenius);
        ShrinkageResult algo_f = shrink_frobenius(decomp, eta);
        ShrinkageResult algo_finv = shrink_inverse_frobenius(decomp, eta);

        const Eigen::Index M = static_cast<Eigen::Index>(spec.dimension());
        // n-factor per global rank, using the reference bulk structure scaled
        // to this M (bulk counts are proportional to M by construction)
        std::vector<int> counts = study.bulk_counts;
        {
            // rescale reference counts to sum to M, preserving proportions
            long ref_total = 0;
            for (int c : counts) ref_total += c;
            long acc = 0;
            for (std::size_t k = 0; k + 1 < counts.size(); ++k) {
                counts[k] = static_cast<int>(std::llround(
                    static_cast<double>(counts[k]) * static_cast<double>(M) /
                    static_cast<double>(ref_total)));
                acc += counts[k];
            }
            counts.back() = static_cast<int>(M - acc);
        }
        auto nfac = [&](int i) {  // global rank 1-based
            int rest = i;
            for (int c : counts) {
                if (rest <= c) return static_cast<double>(std::min(rest, c + 1 - rest));
                rest -= c;
            }
            return 1.0;
        };

        StudyRecord rec;
        rec.N = N;
        rec.rep = rep;
        rec.eta = eta;
        rec.loss_f = loss_codiagonal(algo_f.shrunk_eigenvalues, oracle_f.shrunk_eigenvalues);
        rec.loss_finv =
            loss_codiagonal(algo_finv.shrunk_eigenvalues, oracle_finv.shrunk_eigenvalues);
        if (M <= 1024) {
            Eigen::MatrixXd a = assemble_estimator(decomp, algo_f);
            Eigen::MatrixXd b = assemble_estimator(decomp, oracle_f);
            rec.loss_f_matrix = loss(a, b, LossKind::Frobenius);
        }
        const double slack =
            10.0 * std::pow(static_cast<double>(N), -1.0 / 6.0 + 0.1);
        int covered_f = 0, covered_finv = 0;
        for (Eigen::Index i = 0; i < M; ++i) {
            double nf = std::cbrt(nfac(static_cast<int>(i) + 1));
            double gf = std::abs(algo_f.shrunk_eigenvalues[i] -
                                 oracle_f.shrunk_eigenvalues[i]);
            double gi = std::abs(algo_finv.shrunk_eigenvalues[i] -
                                 oracle_finv.shrunk_eigenvalues[i]);
            rec.opnorm_f = std::max(rec.opnorm_f, gf);
            rec.opnorm_finv = std::max(rec.opnorm_finv, gi);
            rec.max_norm_gap_f = std::max(rec.max_norm_gap_f, nf * gf);
            rec.max_norm_gap_finv = std::max(rec.max_norm_gap_finv, nf * gi);
            if (nf * gf <= slack) ++covered_f;
            if (nf * gi <= slack) ++covered_finv;
        }
        rec.coverage_f = static_cast<double>(covered_f) / static_cast<double>(M);
        rec.coverage_finv = static_cast<double>(covered_finv) / static_cast<double>(M);
        study.records[static_cast<std::size_t>(task)] = rec;

        if (rep == 0) {
            std::vector<ScatterRow> scatter;
            scatter.reserve(static_cast<std::size_t>(M));
            for (Eigen::Index i = 0; i < M; ++i) {
                scatter.push_back({static_cast<int>(i) + 1, decomp.eigenvalues()[i],
                                   oracle_f.shrunk_eigenvalues[i],
                                   algo_f.shrunk_eigenvalues[i],
                                   oracle_finv.shrunk_eigenvalues[i],
                                   algo_finv.shrunk_eigenvalues[i]});
            }
            study.scatters[static_cast<std::size_t>(ni)] = std::move(scatter);
        }
    });

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        // report.csv
        std::vector<std::string> lines;
        lines.push_back(
            "N,rep,eta,loss_f,loss_f_matrix,loss_finv,opnorm_f,opnorm_finv,"
            "max_norm_gap_f,max_norm_gap_finv,coverage_f,coverage_finv");
        for (const auto& r : study.records) {
            lines.push_back(std::to_string(r.N) + "," + std::to_string(r.rep) + "," +
                            format_double(r.eta) + "," + format_double(r.loss_f) + "," +
                            format_double(r.loss_f_matrix) + "," +
                            format_double(r.loss_finv) + "," + format_double(r.opnorm_f) +
                            "," + format_double(r.opnorm_finv) + "," +
                            format_double(r.max_norm_gap_f) + "," +
                            format_double(r.max_norm_gap_finv) + "," +
                            format_double(r.coverage_f) + "," +
                            format_double(r.coverage_finv));
        }
        std::string report = (fs::path(config.out_dir) / "report.csv").string();
        write_text_file(report, lines);
        study.written.push_back(report);

        for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
            int N = config.n_grid[ni];
            std::vector<std::string> sc;
            sc.push_back("i,lambda,oracle_f,algo_f,oracle_finv,algo_finv");
            for (const auto& r : study.scatters[ni]) {
                sc.push_back(std::to_string(r.index) + "," + format_double(r.lambda) +
                             "," + format_double(r.oracle_f) + "," +
                             format_double(r.algo_f) + "," + format_double(r.oracle_finv) +
                             "," + format_double(r.algo_finv));
            }
            std::string sc_path =
                (fs::path(config.out_dir) / ("scatter_N" + std::to_string(N) + ".csv"))
                    .string();
            write_text_file(sc_path, sc);
            study.written.push_back(sc_path);

            std::string svg_path =
                (fs::path(config.out_dir) / ("scatter_N" + std::to_string(N) + ".svg"))
                    .string();
            std::ofstream svg(svg_path, std::ios::binary);
            svg << svg_scatter(study.scatters[ni], N);
            svg.close();
            study.written.push_back(svg_path);
        }

        // per-N aggregates (run_rate_study rewrites this with slope fits)
        std::vector<std::string> summary;
        summary.push_back("{");
        for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
            int N = config.n_grid[ni];
            std::vector<double> ls, ops, cov;
            for (const auto& r : study.records) {
                if (r.N != N) continue;
                ls.push_back(r.loss_f);
                ops.push_back(r.opnorm_f);
                cov.push_back(r.coverage_f);
            }
            auto med = [](std::vector<double> v) {
                std::sort(v.begin(), v.end());
                std::size_t h = v.size() / 2;
                return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
            };
            summary.push_back("  \"N" + std::to_string(N) + "\": {\"median_loss_f\": " +
                              format_double(med(ls)) + ", \"median_opnorm_f\": " +
                              format_double(med(ops)) + ", \"median_coverage_f\": " +
                              format_double(med(cov)) + "}" +
                              (ni + 1 < config.n_grid.size() ? "," : ""));
        }
        summary.push_back("}");
        std::string sum_path = (fs::path(config.out_dir) / "summary.json").string();
        write_text_file(sum_path, summary);
        study.written.push_back(sum_path);
    }
    return study;
}

RateFit rate_fit_from_study(const EntrywiseStudy& study) {
    const SimulationConfig& config = study.config;
    RateFit fit;
    fit.n_values = config.n_grid;
    const int R = config.replications;

    std::vector<std::vector<double>> losses(config.n_grid.size()),
        opnorms(config.n_grid.size()), coverages(config.n_grid.size());
    for (const auto& r : study.records) {
        auto it = std::find(config.n_grid.begin(), config.n_grid.end(), r.N);
        std::size_t ni = static_cast<std::size_t>(it - config.n_grid.begin());
        losses[ni].push_back(r.loss_f);
        opnorms[ni].push_back(r.opnorm_f);
        coverages[ni].push_back(r.coverage_f);
    }
    std::vector<double> logn;
    for (int n : config.n_grid) logn.push_back(std::log(static_cast<double>(n)));
    std::vector<double> log_loss, log_op;
    for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
        fit.median_loss_f.push_back(median(losses[ni]));
        fit.median_opnorm_f.push_back(median(opnorms[ni]));
        fit.coverage_by_n.push_back(median(coverages[ni]));
        log_loss.push_back(std::log(fit.median_loss_f.back()));
        log_op.push_back(std::log(fit.median_opnorm_f.back()));
    }
    if (config.n_grid.size() >= 2) {
        fit.slope_loss = ls_slope(logn, log_loss);
        fit.slope_opnorm = ls_slope(logn, log_op);
        // bootstrap over replications
        const int B = 200;
        Rng rng(mix_seed(config.seed, 0xb001, 0));
        std::vector<double> bs_loss, bs_op;
        for (int b = 0; b < B; ++b) {
            std::vector<double> yl, yo;
            for (std::size_t ni = 0; ni < config.n_grid.size(); ++ni) {
                std::vector<double> sl, so;
                for (int r = 0; r < R; ++r) {
                    int pick = static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(R));
                    sl.push_back(losses[ni][static_cast<std::size_t>(pick)]);
                    so.push_back(opnorms[ni][static_cast<std::size_t>(pick)]);
                }
                yl.push_back(std::log(median(sl)));
                yo.push_back(std::log(median(so)));
            }
            bs_loss.push_back(ls_slope(logn, yl));
            bs_op.push_back(ls_slope(logn, yo));
        }
        auto stddev = [](const std::vector<double>& v) {
            double m = 0.0;
            for (double x : v) m += x;
            m /= static_cast<double>(v.size());
            double s = 0.0;
            for (double x : v) s += (x - m) * (x - m);
            return std::sqrt(s / static_cast<double>(v.size() - 1));
        };
        fit.slope_loss_se = stddev(bs_loss);
        fit.slope_opnorm_se = stddev(bs_op);
    }
    // flag the 1/(N eta) regime: eta outside the supported window
    for (int n : config.n_grid) {
        double eta = config.eta_rule.eta_for(static_cast<std::size_t>(n));
        double lo = std::pow(static_cast<double>(n), -2.0 / 3.0 + 0.01);
        double hi = std::pow(static_cast<double>(n), -0.01);
        if (eta < lo || eta > hi) fit.eta_outside_supported_range = true;
    }
    return fit;
}

RateFit run_rate_study(const SimulationConfig& config) {
    EntrywiseStudy study = run_entrywise_study(config);
    RateFit fit = rate_fit_from_study(study);
    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        std::vector<std::string> lines;
        lines.push_back("{");
        lines.push_back("  \"slope_loss_f\": " + format_double(fit.slope_loss) + ",");
        lines.push_back("  \"slope_loss_f_se\": " + format_double(fit.slope_loss_se) + ",");
        lines.push_back("  \"slope_opnorm_f\": " + format_double(fit.slope_opnorm) + ",");
        lines.push_back("  \"slope_opnorm_f_se\": " + format_double(fit.slope_opnorm_se) +
                        ",");
        lines.push_back(std::string("  \"eta_outside_supported_range\": ") +
                        (fit.eta_outside_supported_range ? "true" : "false") + ",");
        std::string meds = "  \"median_loss_f\": [";
        for (std::size_t i = 0; i < fit.median_loss_f.size(); ++i)
            meds += (i ? ", " : "") + format_double(fit.median_loss_f[i]);
        lines.push_back(meds + "],");
        std::string ops = "  \"median_opnorm_f\": [";
        for (std::size_t i = 0; i < fit.median_opnorm_f.size(); ++i)
            ops += (i ? ", " : "") + format_double(fit.median_opnorm_f[i]);
        lines.push_back(ops + "],");
        std::string cov = "  \"median_coverage_f\": [";
        for (std::size_t i = 0; i < fit.coverage_by_n.size(); ++i)
            cov += (i ? ", " : "") + format_double(fit.coverage_by_n[i]);
        lines.push_back(cov + "]");
        lines.push_back("}");
        std::string path = (fs::path(config.out_dir) / "summary.json").string();
        write_text_file(path, lines);
    }
    return fit;
}

OverlapObservables OverlapObservables::defaults(const PopulationSpectrum& spectrum,
                                                std::uint64_t seed) {
    const Eigen::Index M = static_cast<Eigen::Index>(spectrum.dimension());
    const Eigen::Index N = static_cast<Eigen::Index>(spectrum.sample_size());
    OverlapObservables obs;
    const Eigen::VectorXd sigma =
        Eigen::Map<const Eigen::VectorXd>(spectrum.eigenvalues().data(), M);

    obs.uu_labels = {"I", "Sigma", "SigmaInv", "random"};
    obs.uu.push_back(Eigen::MatrixXd::Identity(M, M));
    obs.uu.push_back(sigma.asDiagonal());
    obs.uu.push_back(sigma.cwiseInverse().asDiagonal());
    {
        Rng rng(mix_seed(seed, 0xD1, 0));
        Eigen::MatrixXd G(M, M);
        for (Eigen::Index i = 0; i < M; ++i)
            for (Eigen::Index j = 0; j < M; ++j) G(i, j) = rng.next_gaussian();
        Eigen::MatrixXd sym = (G + G.transpose()) / (2.0 * std::sqrt(2.0 * M));
        obs.uu.push_back(sym);  // operator norm ~ 1
    }

    obs.vv_labels = {"I", "random_diag"};
    obs.vv_diag.push_back(Eigen::VectorXd::Ones(N));
    {
        Rng rng(mix_seed(seed, 0xD2, 0));
        Eigen::VectorXd d(N);
        for (Eigen::Index i = 0; i < N; ++i) d[i] = rng.next_uniform_sym(1.0);
        obs.vv_diag.push_back(d);
    }

    obs.uv_labels = {"random"};
    {
        Rng rng(mix_seed(seed, 0xD3, 0));
        Eigen::MatrixXd G(M, N);
        for (Eigen::Index i = 0; i < M; ++i)
            for (Eigen::Index j = 0; j < N; ++j) G(i, j) = rng.next_gaussian();
        obs.uv.push_back(G / (std::sqrt(static_cast<double>(M)) +
                              std::sqrt(static_cast<double>(N))));
    }
    return obs;
}

OverlapStudyResult run_overlap_study(const SimulationConfig& config,
                                     const OverlapObservables& observables) {
    config.validate();
    const int N = config.n_grid.back();
    PopulationSpectrum spec = config.make_spectrum(N);
    const Eigen::Index M = static_cast<Eigen::Index>(spec.dimension());

    SupportStructure support = find_support(spec);
    const std::size_t count = support.classical_locations.size();

    // deterministic per-index predictions, shared across replications
    std::vector<double> im_m(count);
    std::vector<Eigen::VectorXd> im_gamma(count);
    SolverOptions sopts;
    for (std::size_t i = 0; i < count; ++i) {
        double gamma = support.classical_locations[i];
        StieltjesValue v = boundary_stieltjes(spec, gamma * gamma, sopts);
        im_m[i] = v.m.imag();
        im_gamma[i] = gamma_of_w(spec, Complex(gamma, 0.0), v.m).imag();
    }
    auto predict_uu = [&](std::size_t i, const Eigen::VectorXd& diag) {
        return im_gamma[i].dot(diag) / static_cast<double>(N) / im_m[i];
    };

    OverlapStudyResult result;
    result.N = N;
    result.replications = config.replications;
    result.per_rep_rows.assign(static_cast<std::size_t>(config.replications), {});
    result.per_rep_coverage.assign(static_cast<std::size_t>(config.replications), {});

    const double slack_mult =
        10.0 * std::pow(static_cast<double>(N), 0.1);

    parallel_for(config.replications, [&](int rep) {
        std::uint64_t seed = mix_seed(config.seed, static_cast<std::uint64_t>(N),
                                      static_cast<std::uint64_t>(rep));
        Eigen::MatrixXd Y = generate_sample(spec, static_cast<std::size_t>(N),
                                            config.distribution, seed);
        SampleDecomposition decomp = SampleDecomposition::from_data(Y, true);
        const Eigen::MatrixXd& U = decomp.eigenvectors();
        const Eigen::MatrixXd& V = *decomp.right_singular_vectors();

        std::vector<OverlapIndexRow>& rows =
            result.per_rep_rows[static_cast<std::size_t>(rep)];
        auto& coverage = result.per_rep_coverage[static_cast<std::size_t>(rep)];

        auto envelope = [&](std::size_t i) {
            double nf = support.n_factor(static_cast<int>(i) + 1);
            return std::pow(static_cast<double>(N) * nf * nf, -1.0 / 6.0);
        };

        // uu families
        for (std::size_t f = 0; f < observables.uu.size(); ++f) {
            const Eigen::MatrixXd& D = observables.uu[f];
            Eigen::MatrixXd DU = D.selfadjointView<Eigen::Lower>() * U;
            Eigen::VectorXd emp = U.cwiseProduct(DU).colwise().sum().transpose();
            const Eigen::VectorXd diag = D.diagonal();
            int within = 0;
            for (std::size_t i = 0; i < count && i < static_cast<std::size_t>(M); ++i) {
                OverlapIndexRow row;
                row.index = static_cast<int>(i) + 1;
                row.family = "uu:" + observables.uu_labels[f];
                row.empirical = emp[static_cast<Eigen::Index>(i)];
                row.predicted = predict_uu(i, diag);
                row.envelope = envelope(i);
                row.normalized_error =
                    std::abs(row.empirical - row.predicted) / row.envelope;
                if (row.normalized_error <= slack_mult) ++within;
                rows.push_back(row);
            }
            coverage.emplace_back("uu:" + observables.uu_labels[f],
                                  static_cast<double>(within) /
                                      static_cast<double>(std::min<std::size_t>(count, M)));
        }

        // vv families (diagonal observables)
        for (std::size_t f = 0; f < observables.vv_diag.size(); ++f) {
            const Eigen::VectorXd& d = observables.vv_diag[f];
            double pred = d.sum() / static_cast<double>(N);
            int within = 0;
            std::size_t limit = std::min<std::size_t>(count, static_cast<std::size_t>(V.cols()));
            for (std::size_t i = 0; i < limit; ++i) {
                Eigen::VectorXd vi = V.col(static_cast<Eigen::Index>(i));
                OverlapIndexRow row;
                row.index = static_cast<int>(i) + 1;
                row.family = "vv:" + observables.vv_labels[f];
                row.empirical = vi.cwiseProduct(d).dot(vi);
                row.predicted = pred;
                row.envelope = envelope(i);
                row.normalized_error =
                    std::abs(row.empirical - row.predicted) / row.envelope;
                if (row.normalized_error <= slack_mult) ++within;
                rows.push_back(row);
            }
            coverage.emplace_back("vv:" + observables.vv_labels[f],
                                  static_cast<double>(within) / static_cast<double>(limit));
        }

        // uv families
        for (std::size_t f = 0; f < observables.uv.size(); ++f) {
            const Eigen::MatrixXd& D3 = observables.uv[f];
            Eigen::MatrixXd D3V = D3 * V;  // M x (M^N)
            int within = 0;
            std::size_t limit = std::min<std::size_t>(count, static_cast<std::size_t>(V.cols()));
            for (std::size_t i = 0; i < limit; ++i) {
                OverlapIndexRow row;
                row.index = static_cast<int>(i) + 1;
                row.family = "uv:" + observables.uv_labels[f];
                row.empirical = U.col(static_cast<Eigen::Index>(i))
                                    .dot(D3V.col(static_cast<Eigen::Index>(i)));
                row.predicted = 0.0;
                row.envelope = envelope(i);
                row.normalized_error = std::abs(row.empirical) / row.envelope;
                if (row.normalized_error <= slack_mult) ++within;
                rows.push_back(row);
            }
            coverage.emplace_back("uv:" + observables.uv_labels[f],
                                  static_cast<double>(within) / static_cast<double>(limit));
        }
    });

    if (!config.out_dir.empty()) {
        namespace fs = std::filesystem;
        fs::create_directories(config.out_dir);
        std::vector<std::string> lines;
        lines.push_back("rep,family,i,empirical,predicted,envelope,normalized_error");
        for (int rep = 0; rep < config.replications; ++rep) {
            for (const auto& r : result.per_rep_rows[static_cast<std::size_t>(rep)]) {
                lines.push_back(std::to_string(rep) + "," + r.family + "," +
                                std::to_string(r.index) + "," + format_double(r.empirical) +
                                "," + format_double(r.predicted) + "," +
                                format_double(r.envelope) + "," +
                                format_double(r.normalized_error));
            }
        }
        std::string path = (fs::path(config.out_dir) / "overlaps.csv").string();
        write_text_file(path, lines);
        result.written.push_back(path);
    }
    return result;
}

}  // namespace rmtcov
