#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "slicer/config.hpp"
#include "slicer/errors.hpp"
#include "slicer/io.hpp"

using namespace slicer;

namespace {

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("slicer_test_" + std::to_string(::getpid()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

} // namespace

TEST_CASE("config parser") {
    SUBCASE("sections, numbers, strings, booleans, arrays, comments") {
        const ConfigTable t = parse_config_text(
            "# a comment\n"
            "[field]\n"
            "quad_strength_mg_um = 7.27  # inline comment\n"
            "bias_gauss = [0, 0, 40.68]\n"
            "mode = \"pure_quadrupole\"\n"
            "[output]\n"
            "plot = true\n");
        CHECK(t.at("field").at("quad_strength_mg_um").as_number("q") == 7.27);
        CHECK(t.at("field").at("bias_gauss").as_array("b", 3)[2] == 40.68);
        CHECK(t.at("field").at("mode").as_string("m") == "pure_quadrupole");
        CHECK(t.at("output").at("plot").as_bool("p") == true);
    }

    SUBCASE("malformed lines carry positions") {
        CHECK_THROWS_WITH_AS(parse_config_text("[field]\nbad line\n"),
                             doctest::Contains("line 2"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("key_outside = 1\n"), ConfigError);
        CHECK_THROWS_AS(parse_config_text("[field]\nx = 1a\n"), ConfigError);
    }
}

TEST_CASE("run config") {
    SUBCASE("defaults equal the calibrated preset") {
        const RunConfig cfg = default_run_config();
        CHECK(cfg.system.zeeman.kappa1_khz_mg == doctest::Approx(2.5028).epsilon(1e-4));
        CHECK(cfg.protocol.pulse_b.sweep_width_khz == 7.0);
        CHECK(cfg.protocol.pulse_a.sweep_width_khz == 5.25);
        CHECK(cfg.protocol.repetitions == 2);
        CHECK(cfg.spin_up_fraction == 0.5);
        CHECK(cfg.imaging.window.sweep_width_khz == 3.0);
    }

    SUBCASE("overrides apply and unknown keys are rejected") {
        const RunConfig cfg = run_config_from_text(
            "[pulse.B]\nwidth_khz = 6.5\n[protocol]\nrepetitions = 1\n"
            "spin_preset = \"scan\"\n");
        CHECK(cfg.protocol.pulse_b.sweep_width_khz == 6.5);
        CHECK(cfg.protocol.repetitions == 1);
        CHECK(cfg.spin_up_fraction == doctest::Approx(0.58));
        CHECK_THROWS_WITH_AS(run_config_from_text("[pulse.B]\nwidht_khz = 6.5\n"),
                             doctest::Contains("unknown key"), ConfigError);
        CHECK_THROWS_WITH_AS(run_config_from_text("[pulses]\nx = 1\n"),
                             doctest::Contains("unknown section"), ConfigError);
    }

    SUBCASE("invalid physics rejected at load") {
        CHECK_THROWS_AS(run_config_from_text("[protocol]\nrepetitions = 3\n"), ConfigError);
        CHECK_THROWS_AS(run_config_from_text("[lattice]\nspacing_um = -1\n"), ConfigError);
        CHECK_THROWS_AS(run_config_from_text("[protocol]\nspin_up_fraction = 1.2\n"),
                        ConfigError);
    }
}

TEST_CASE("number formatting round-trips cleanly") {
    CHECK(format_double(9.68) == "9.68");
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(-2.5) == "-2.5");
    CHECK(format_double(1e-9) == "1e-09");
}

TEST_CASE("csv io") {
    TempDir tmp;
    SUBCASE("write and read back") {
        CsvTable t;
        t.header = {"t_s", "n"};
        t.rows = {{0.0, 1.0}, {0.5, 0.75}, {1.0, 0.5}};
        write_csv(tmp.file("a.csv"), t);
        const CsvTable r = read_csv(tmp.file("a.csv"), 2);
        REQUIRE(r.rows.size() == 3);
        CHECK(r.rows[1][1] == 0.75);
    }

    SUBCASE("malformed rows report the line") {
        std::ofstream out(tmp.file("bad.csv"));
        out << "t_s,n\n0.0,1.0\n0.5,oops\n";
        out.close();
        CHECK_THROWS_WITH_AS(read_csv(tmp.file("bad.csv"), 2),
                             doctest::Contains("line 3"), ConfigError);
    }

    SUBCASE("missing file") {
        CHECK_THROWS_AS(read_csv(tmp.file("absent.csv"), 2), ConfigError);
    }
}

TEST_CASE("pgm writer") {
    TempDir tmp;
    ImageGrid g;
    g.pixels = 8;
    g.fov_um = 50.0;
    g.data.assign(64, 0.0);
    g.at(0, 0) = 1.0;
    g.at(7, 7) = 0.5;
    write_pgm16(tmp.file("img.pgm"), g);
    std::ifstream in(tmp.file("img.pgm"), std::ios::binary);
    std::string header;
    std::getline(in, header);
    CHECK(header == "P5");
    std::getline(in, header);
    CHECK(header == "8 8");
    std::getline(in, header);
    CHECK(header == "65535");
    std::string rest((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    CHECK(rest.size() == 128);  // 64 pixels, two bytes each
    // top row holds iy = 7: pixel (7,7) is 0.5 -> 0x7fff big endian
    CHECK(static_cast<unsigned char>(rest[14]) == 0x80);
}

TEST_CASE("hash is stable") {
    CHECK(fnv1a_hash("") == 14695981039346656037ull);
    CHECK(fnv1a_hash("slicer") == fnv1a_hash("slicer"));
    CHECK(fnv1a_hash("a") != fnv1a_hash("b"));
}
