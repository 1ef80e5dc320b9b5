#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include <Eigen/Dense>

#include "rmtcov/errors.hpp"
#include "rmtcov/io.hpp"
#include "rmtcov/rng.hpp"
#include "rmtcov/simulation.hpp"
#include "rmtcov/support.hpp"

using namespace rmtcov;
namespace fs = std::filesystem;

namespace {

fs::path scratch() {
    fs::path p = fs::temp_directory_path() / "rmtcov_io_tests";
    fs::create_directories(p);
    return p;
}

void write_file(const fs::path& p, const std::string& content) {
    std::ofstream out(p, std::ios::binary);
    out << content;
}

std::string cli_path() {
    const char* env = std::getenv("RMTCOV_CLI");
    REQUIRE_MESSAGE(env != nullptr, "RMTCOV_CLI must point at the binary");
    return env;
}

int run_cli(const std::string& args) {
    std::string cmd = cli_path() + " " + args + " >/dev/null 2>&1";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

TEST_CASE("spectrum CSV: one-column, two-column, header, malformed") {
    fs::path dir = scratch();
    write_file(dir / "one.csv", "eigenvalue\n3.0\n1.0\n2.0\n");
    PopulationSpectrum one = load_spectrum_csv((dir / "one.csv").string(), 10);
    CHECK(one.dimension() == 3);
    CHECK(one.eigenvalues()[0] == 3.0);  // sorted descending

    write_file(dir / "two.csv", "value,weight\n1.0,0.2\n3.0,0.4\n10.0,0.4\n");
    PopulationSpectrum two = load_spectrum_csv((dir / "two.csv").string(), 40, 20);
    CHECK(two.dimension() == 20);
    CHECK(two.group_values().size() == 3);

    write_file(dir / "bad.csv", "1.0\n2.0\noops\n");
    try {
        (void)load_spectrum_csv((dir / "bad.csv").string(), 10);
        FAIL("expected IoError");
    } catch (const IoError& e) {
        CHECK(e.line == 3);  // carries the offending line number
    }
}

TEST_CASE("matrix blob round trip is lossless") {
    fs::path dir = scratch();
    Rng rng(77);
    Eigen::MatrixXd A(17, 23);
    for (int i = 0; i < 17; ++i)
        for (int j = 0; j < 23; ++j) A(i, j) = rng.next_gaussian();
    fs::path blob = dir / "m.blob";
    save_matrix_blob(blob.string(), A);
    CHECK(is_blob_file(blob.string()));
    Eigen::MatrixXd B = load_matrix_blob(blob.string());
    REQUIRE(B.rows() == 17);
    REQUIRE(B.cols() == 23);
    CHECK(std::memcmp(A.data(), B.data(), sizeof(double) * 17 * 23) == 0);

    write_file(dir / "junk.blob", "NOPE1234");
    CHECK(!is_blob_file((dir / "junk.blob").string()));
    CHECK_THROWS_AS((void)load_matrix_blob((dir / "junk.blob").string()), IoError);
}

TEST_CASE("matrix CSV loading") {
    fs::path dir = scratch();
    write_file(dir / "data.csv", "1.0,2.0,3.0\n4.0,5.0,6.0\n");
    Eigen::MatrixXd A = load_matrix_csv((dir / "data.csv").string());
    REQUIRE(A.rows() == 2);
    REQUIRE(A.cols() == 3);
    CHECK(A(1, 2) == 6.0);
    write_file(dir / "ragged.csv", "1.0,2.0\n3.0\n");
    CHECK_THROWS_AS((void)load_matrix_csv((dir / "ragged.csv").string()), IoError);
}

TEST_CASE("support CSV export carries the documented header") {
    PopulationSpectrum spec(std::vector<double>(40, 1.0), 100);
    SupportStructure sup = find_support(spec);
    fs::path out = scratch() / "support.csv";
    save_support_csv(out.string(), sup);
    std::string content = slurp(out);
    CHECK(content.rfind("index,gamma,gamma_squared,bulk_index\n", 0) == 0);
    CHECK(std::count(content.begin(), content.end(), '\n') == 41);
}

TEST_CASE("cli: solve-mp passthrough and exit codes") {
    fs::path dir = scratch();
    {
        std::ofstream out(dir / "id.csv");
        for (int i = 0; i < 100; ++i) out << "1.0\n";
    }
    std::string spec_arg = "--spectrum " + (dir / "id.csv").string() + " --n 200";

    CHECK(run_cli("solve-mp " + spec_arg + " --z 2,0.1") == 0);
    // grid over the bulk writes rows
    fs::path grid_out = dir / "grid.csv";
    CHECK(run_cli("solve-mp " + spec_arg + " --grid 0.2:2.5:40 --eta 1e-6 --out " +
                  grid_out.string()) == 0);
    std::string grid = slurp(grid_out);
    CHECK(std::count(grid.begin(), grid.end(), '\n') == 41);

    // the density column over the full bulk integrates to the spectral
    // mass M/N (trapezoid over the emitted grid)
    fs::path bulk_out = dir / "bulk.csv";
    CHECK(run_cli("solve-mp " + spec_arg +
                  " --grid 0.0857864376269049:2.9142135623730951:4001 --eta 1e-6 "
                  "--out " + bulk_out.string()) == 0);
    {
        std::ifstream in(bulk_out);
        std::string line;
        std::getline(in, line);  // header
        std::vector<double> E, dens;
        while (std::getline(in, line)) {
            std::size_t last = line.rfind(',');
            std::size_t first = line.find(',');
            E.push_back(std::stod(line.substr(0, first)));
            dens.push_back(std::stod(line.substr(last + 1)));
        }
        REQUIRE(E.size() == 4001);
        double mass = 0.0;
        for (std::size_t i = 0; i + 1 < E.size(); ++i)
            mass += 0.5 * (dens[i] + dens[i + 1]) * (E[i + 1] - E[i]);
        CHECK(std::abs(mass - 0.5) <= 1e-4);  // M/N for this spectrum
    }

    // malformed CSV -> input error (exit 1)
    write_file(dir / "broken.csv", "1.0\nbroken\n");
    CHECK(run_cli("solve-mp --spectrum " + (dir / "broken.csv").string() +
                  " --n 200 --z 2,0.1") == 1);
    // iteration starvation -> numerical failure (exit 2)
    CHECK(run_cli("solve-mp " + spec_arg + " --z 2.9,1e-9 --max-iter 1") == 2);
}

TEST_CASE("cli: estimate round trip and the M < N guard") {
    fs::path dir = scratch();
    PopulationSpectrum spec(std::vector<double>(30, 1.0), 90);
    Eigen::MatrixXd Y = generate_sample(spec, 90, EntryDistribution::Gaussian, 3);
    save_matrix_blob((dir / "y.blob").string(), Y);

    fs::path out = dir / "est";
    CHECK(run_cli("estimate --data " + (dir / "y.blob").string() + " --loss f --out " +
                  out.string()) == 0);
    CHECK(fs::exists(out / "shrinkage.csv"));
    Eigen::MatrixXd est = load_matrix_blob((out / "estimator.blob").string());
    CHECK(est.rows() == 30);
    CHECK(est.cols() == 30);
    // estimator blob round-trips through the same decomposition machinery
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(est);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
    CHECK(run_cli("estimate --data " + (dir / "y.blob").string() +
                  " --loss finv --out " + out.string()) == 0);

    // M >= N rejected with exit 1
    Eigen::MatrixXd wide = Y.topRows(30).leftCols(20);
    save_matrix_blob((dir / "wide.blob").string(), wide);
    CHECK(run_cli("estimate --data " + (dir / "wide.blob").string() + " --out " +
                  out.string()) == 1);
}

TEST_CASE("cli: verify-kernels contract") {
    CHECK(run_cli("verify-kernels --n 20 --trials 3") == 0);
    CHECK(run_cli("verify-kernels --n 20 --trials 3 --inject-fault") == 3);
    CHECK(run_cli("verify-kernels --n 20 --trials 3 --multiplier 0.001") == 3);
}

TEST_CASE("cli: simulate determinism and output guards") {
    fs::path dir = scratch();
    fs::path cfg = dir / "tiny.cfg";
    write_file(cfg, "spectrum = 1:0.2, 3:0.4, 10:0.4\n"
                    "c = 0.5\n"
                    "n_grid = 120\n"
                    "eta_rule = inv_sqrt\n"
                    "distribution = gaussian\n"
                    "replications = 2\n"
                    "seed = 4242\n");

    fs::path out_a = dir / "sim_a";
    fs::path out_b = dir / "sim_b";
    fs::remove_all(out_a);
    fs::remove_all(out_b);
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out_a.string()) == 0);
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + out_b.string()) == 0);
    for (const std::string name : {"report.csv", "scatter_N120.csv", "summary.json"}) {
        CAPTURE(name);
        CHECK(slurp(out_a / name) == slurp(out_b / name));
        CHECK(!slurp(out_a / name).empty());
    }

    // out_dir collides with an existing file -> input error
    fs::path blocked = dir / "blocked";
    write_file(blocked, "i am a file");
    CHECK(run_cli("simulate --config " + cfg.string() + " --out " + blocked.string()) ==
          1);
    // config without out_dir and no --out -> input error
    CHECK(run_cli("simulate --config " + cfg.string()) == 1);
}

TEST_CASE("cli: predict-overlap emits the report schema") {
    fs::path dir = scratch();
    {
        std::ofstream out(dir / "id2.csv");
        for (int i = 0; i < 40; ++i) out << "1.0\n";
    }
    fs::path out = dir / "overlap.csv";
    CHECK(run_cli("predict-overlap --spectrum " + (dir / "id2.csv").string() +
                  " --n 100 --out " + out.string()) == 0);
    std::string content = slurp(out);
    CHECK(content.rfind("k,i,family,gamma,empirical,predicted,envelope,normalized_error",
                        0) == 0);
    // 40 locations x 3 observable families + header
    CHECK(std::count(content.begin(), content.end(), '\n') == 121);
}
