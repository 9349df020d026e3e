#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "test_util.hpp"

namespace fs = std::filesystem;
using testutil::run_command;

namespace {

const std::string kBin = REPLICTL_PATH;
const std::string kConfigs = CONFIG_DIR;

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("replictl_test_" + std::to_string(::getpid()));
        fs::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path, ec);
    }
};

std::string in_dir(const TempDir& dir, const std::string& cmd) {
    return "cd " + dir.path.string() + " && " + cmd;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

TEST_CASE("classify subcommand prints the class line") {
    auto res = run_command(kBin + " classify 1 3 0 2");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("dominant-strategy, NE = all action 1") == 0);

    res = run_command(kBin + " classify 1 0 0 1");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("coordination, x* = 0.5") == 0);

    res = run_command(kBin + " classify 0 1 1 0");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("anti-coordination, x* = 0.5") == 0);

    res = run_command(kBin + " classify 1 2 three 4");
    CHECK(res.exit_code == 2);
}

TEST_CASE("simulate subcommand end to end") {
    TempDir dir;
    SUBCASE("reaching run converges and reruns byte-identically") {
        auto res = run_command(
            in_dir(dir, kBin + " simulate -c " + kConfigs + "/reaching_conformity.ini"));
        CHECK(res.exit_code == 0);
        const auto j = nlohmann::json::parse(slurp(dir.path / "reaching_conformity.json"));
        CHECK(j["converged"] == true);
        CHECK(j["x_final"].get<double>() < 1e-3);
        CHECK(j["g_final"].get<double>() < 1e-3);

        const std::string csv1 = slurp(dir.path / "reaching_conformity.csv");
        const std::string json1 = slurp(dir.path / "reaching_conformity.json");
        run_command(in_dir(dir, kBin + " simulate -c " + kConfigs + "/reaching_conformity.ini"));
        CHECK(slurp(dir.path / "reaching_conformity.csv") == csv1);
        CHECK(slurp(dir.path / "reaching_conformity.json") == json1);
        CHECK(csv1.rfind("t,x,g\n", 0) == 0);
    }
    SUBCASE("guard rejection and --force") {
        auto res = run_command(
            in_dir(dir, kBin + " simulate -c " + kConfigs + "/stabilization_pd_forbidden.ini"));
        CHECK(res.exit_code == 3);
        CHECK(res.output.find("innovation") != std::string::npos);

        res = run_command(in_dir(dir, kBin + " simulate --force -c " + kConfigs +
                                           "/stabilization_pd_forbidden.ini"));
        CHECK(res.exit_code == 0);
        const auto j =
            nlohmann::json::parse(slurp(dir.path / "stabilization_pd_forbidden.json"));
        CHECK(j["converged"] == false);
    }
    SUBCASE("empty config is a parse error") {
        std::ofstream(dir.path / "empty.ini").close();
        const auto res = run_command(in_dir(dir, kBin + " simulate -c empty.ini"));
        CHECK(res.exit_code == 2);
    }
    SUBCASE("unreachable tolerance maps to the integration-failure exit code") {
        std::ofstream(dir.path / "stiff.ini")
            << "[payoff]\na=1\nb=0\nc=0\nd=1\n"
               "[problem]\nkind=reach\ntarget=0\ndelta=0.4\n"
               "[controller]\nmode=explicit\nmatrix=G4\nrate=power_shifted\np=7\nq=1\ndelta=0.4\n"
               "[initial]\nx0=0.7\ng0=5\n"
               "[integrator]\nrel_tol=1e-10\nabs_tol=1e-12\ndt_min=0.5\ndt_max=1\n"
               "record_stride=1\nhorizon=10\n";
        const auto res = run_command(in_dir(dir, kBin + " simulate -c stiff.ini"));
        CHECK(res.exit_code == 4);
    }
}

TEST_CASE("design subcommand emits the controller JSON") {
    const auto res =
        run_command(kBin + " design -c " + kConfigs + "/design_pd_setpoint.ini");
    CHECK(res.exit_code == 0);
    const auto j = nlohmann::json::parse(res.output);
    CHECK(j["matrix"] == "G3");
    CHECK(j["rate"] == "proportional");
    CHECK(j["p"].get<double>() == 0.5);
    CHECK(j["gbar"].get<double>() == 2.0);
    CHECK(j["conditions"].is_array());

    // anti-coordination set-point with unknown side is refused
    TempDir dir;
    std::ofstream(dir.path / "unknown_side.ini")
        << "[payoff]\na=0\nb=1\nc=1\nd=0\n[problem]\nkind=setpoint\ntarget=0.25\n";
    const auto bad = run_command(in_dir(dir, kBin + " design -c unknown_side.ini"));
    CHECK(bad.exit_code == 3);
    CHECK(bad.output.find("side") != std::string::npos);
}

TEST_CASE("sweep subcommand") {
    TempDir dir;
    SUBCASE("a 1x1 grid matches the corresponding simulate run") {
        const auto res = run_command(in_dir(
            dir, kBin + " sweep -c " + kConfigs +
                     "/sweep_final_gain.ini --p-grid 4 --q-grid 1 -o one.csv -j 1"));
        CHECK(res.exit_code == 0);
        std::istringstream in(slurp(dir.path / "one.csv"));
        std::string header, row;
        std::getline(in, header);
        CHECK(header == "p,q,J_g,g_max,g_final,x_final,converged,settle_time");
        std::getline(in, row);
        double p, q, J, gmax, gfin, xfin;
        char convbuf[16] = {0};
        std::sscanf(row.c_str(), "%lf,%lf,%lf,%lf,%lf,%lf,%15[^,]", &p, &q, &J, &gmax, &gfin,
                    &xfin, convbuf);
        CHECK(p == 4.0);
        CHECK(std::string(convbuf) == "true");
        CHECK(xfin < 1e-3);
    }
    SUBCASE("default grids give thirty cells") {
        const auto res = run_command(in_dir(
            dir, kBin + " sweep -c " + kConfigs + "/sweep_effort.ini -o grid.csv -j 2"));
        CHECK(res.exit_code == 0);
        std::istringstream in(slurp(dir.path / "grid.csv"));
        std::string line;
        int rows = -1; // discount header
        while (std::getline(in, line))
            if (!line.empty()) ++rows;
        CHECK(rows == 30);
    }
    SUBCASE("blow-up cells are present with converged=false") {
        const auto res = run_command(in_dir(
            dir, kBin + " sweep -c " + kConfigs +
                     "/sweep_final_gain.ini --p-grid 0.4 --q-grid 1 -o cap.csv"));
        CHECK(res.exit_code == 0);
        const std::string csv = slurp(dir.path / "cap.csv");
        CHECK(csv.find("false") != std::string::npos);
    }
}

TEST_CASE("verify subcommand reports equilibria and the energy audit") {
    const auto res = run_command(kBin + " verify -c " + kConfigs + "/setpoint_pd.ini");
    CHECK(res.exit_code == 0);
    CHECK(res.output.find("equilibria") != std::string::npos);
    CHECK(res.output.find("stable") != std::string::npos);
    CHECK(res.output.find("non-increasing") != std::string::npos);
}
