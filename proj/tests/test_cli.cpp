#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "envcontour/cli.hpp"
#include "envcontour/geometry.hpp"
#include "envcontour/io.hpp"

using namespace envc;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("preset configs resolve by bare name") {
    for (const char* name :
         {"table1_2d", "table2_3d", "fig7_mixture", "gauss2d_identity", "ellipse2d"}) {
        const std::string path = resolve_config(name);
        CHECK(fs::exists(path));
    }
    CHECK_THROWS_AS(resolve_config("no_such_model"), std::invalid_argument);
}

TEST_CASE("direction spec parsing") {
    CHECK(make_directions("grid2d:90", 2).size() == 90);
    CHECK(make_directions("uniform:50:3", 3).size() == 50);
    CHECK_THROWS_AS(make_directions("grid2d:90", 3), std::invalid_argument);
    CHECK_THROWS_AS(make_directions("banana", 2), std::invalid_argument);

    const fs::path tmp = fs::temp_directory_path() / "envc_dirs.csv";
    std::ofstream(tmp) << "u_1,u_2\n1,0\n0,1\n-1,0\n0,-1\n";
    const auto dirs = make_directions("file:" + tmp.string(), 2);
    CHECK(dirs.size() == 4);
    CHECK(dirs[0][0] == doctest::Approx(1.0));
}

TEST_CASE("contour command emits the artifact set and succeeds on a gaussian") {
    RunConfig cfg;
    cfg.config_path = "gauss2d_identity";
    cfg.pe = 0.1;
    cfg.directions = "grid2d:48";
    cfg.n = 50000;
    cfg.seed = 5;
    cfg.corrected = true;
    cfg.direct_baseline = true;
    cfg.analytic = true;
    cfg.out_dir = (fs::temp_directory_path() / "envc_cli_a").string();
    fs::remove_all(cfg.out_dir);
    CHECK(cmd_contour(cfg) == 0);
    for (const char* f :
         {"table.csv", "table_meta.json", "contour_vertices.csv", "contour_facets.json",
          "validity.json", "corrected_vertices.csv", "corrected_validity.json", "direct.csv",
          "contour.svg", "contour.json", "samples_head.csv", "analytic_points.csv"}) {
        CHECK(fs::exists(fs::path(cfg.out_dir) / f));
    }
    const auto report = nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "contour.json"));
    CHECK(report["status"] == "proper-candidate");
    CHECK(report["validity"] == "proper");
}

TEST_CASE("contour artifacts are byte-identical across reruns") {
    RunConfig cfg;
    cfg.config_path = "fig7_mixture";
    cfg.pe = 0.15;
    cfg.directions = "grid2d:60";
    cfg.n = 30000;
    cfg.seed = 9;
    cfg.refine_rounds = 1;
    cfg.corrected = true;
    cfg.direct_baseline = true;

    cfg.out_dir = (fs::temp_directory_path() / "envc_cli_b1").string();
    fs::remove_all(cfg.out_dir);
    const int code1 = cmd_contour(cfg);
    const std::string dir1 = cfg.out_dir;

    cfg.out_dir = (fs::temp_directory_path() / "envc_cli_b2").string();
    fs::remove_all(cfg.out_dir);
    const int code2 = cmd_contour(cfg);

    CHECK(code1 == code2);
    int compared = 0;
    for (const auto& entry : fs::directory_iterator(dir1)) {
        const fs::path other = fs::path(cfg.out_dir) / entry.path().filename();
        REQUIRE(fs::exists(other));
        CHECK(slurp(entry.path()) == slurp(other));
        ++compared;
    }
    CHECK(compared >= 8);
}

TEST_CASE("mixture contour exits with status 2") {
    RunConfig cfg;
    cfg.config_path = "fig7_mixture";
    cfg.pe = 0.15;
    cfg.directions = "grid2d:90";
    cfg.n = 50000;
    cfg.seed = 4;
    cfg.refine_rounds = 1;
    cfg.out_dir = (fs::temp_directory_path() / "envc_cli_c").string();
    fs::remove_all(cfg.out_dir);
    CHECK(cmd_contour(cfg) == 2);
    // corrected artifacts are written for non-proper outcomes even without the flag
    CHECK(fs::exists(fs::path(cfg.out_dir) / "corrected_vertices.csv"));
}

TEST_CASE("existence command verdicts") {
    RunConfig cfg;
    cfg.config_path = "gauss2d_identity";
    cfg.pe = 0.05;
    cfg.out_dir = (fs::temp_directory_path() / "envc_cli_d").string();
    cfg.scan_res = 120;
    fs::remove_all(cfg.out_dir);
    CHECK(cmd_existence(cfg) == 0);
    auto j = nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "existence.json"));
    CHECK(j["verdict"] == "admits");
    CHECK(j["inconsistent"] == false);

    cfg.config_path = "fig7_mixture";
    cfg.pe = 0.15;
    cfg.n = 100000;
    cfg.seed = 2;
    cfg.out_dir = (fs::temp_directory_path() / "envc_cli_e").string();
    fs::remove_all(cfg.out_dir);
    CHECK(cmd_existence(cfg) == 2);
    j = nlohmann::json::parse(slurp(fs::path(cfg.out_dir) / "existence.json"));
    CHECK(j["verdict"] == "fails");
}

TEST_CASE("atomic text writer replaces content completely") {
    const fs::path p = fs::temp_directory_path() / "envc_atomic.txt";
    write_text_atomic(p.string(), "first\n");
    write_text_atomic(p.string(), "second\n");
    CHECK(slurp(p) == "second\n");
    CHECK_FALSE(fs::exists(p.string() + ".tmp"));
}

TEST_CASE("obj writer emits faces for a cube cell") {
    RunConfig cfg;
    cfg.config_path = "gauss3d_identity";
    cfg.pe = 0.1;
    cfg.directions = "uniform:60:3";
    cfg.n = 30000;
    cfg.seed = 6;
    cfg.refine_rounds = 1;
    cfg.out_dir = (fs::temp_directory_path() / "envc_cli_f").string();
    fs::remove_all(cfg.out_dir);
    const int code = cmd_contour(cfg);
    CHECK((code == 0 || code == 2));
    const std::string obj = slurp(fs::path(cfg.out_dir) / "cell.obj");
    CHECK(obj.find("v ") != std::string::npos);
    CHECK(obj.find("f ") != std::string::npos);
}
