#include "doctest.h"

#include <cmath>
#include <fstream>

#include "geoxray/io.hpp"

using namespace geoxray;

namespace {

void write_text(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

}  // namespace

TEST_CASE("scalar fields and lambda grids round-trip exactly") {
    const ScalarField f = ScalarField::from_function({7, 5, -1.0, 1.0, -0.5, 0.5},
                                                     [](Vec2 p) { return std::sin(10.0 * p.x) / 3.0 + p.y; });
    write_scalar_field("io_field.txt", f);
    const ScalarField g = read_scalar_field("io_field.txt");
    CHECK(g.grid() == f.grid());
    CHECK(g.values() == f.values());
}

TEST_CASE("sinograms round-trip exactly") {
    Sinogram s(5, 4, 1.2);
    for (std::size_t k = 0; k < s.values.size(); ++k) s.values[k] = std::exp(0.3 * k) / 7.0;
    write_sinogram("io_sino.txt", s);
    const Sinogram t = read_sinogram("io_sino.txt");
    CHECK(t.ns == 5);
    CHECK(t.nomega == 4);
    CHECK(t.S == 1.2);
    CHECK(t.values == s.values);
}

TEST_CASE("fan data keeps its mask") {
    FanBeamData d(FanGeometry{4, 4});
    for (std::size_t k = 0; k < d.values.size(); ++k) d.values[k] = 0.1 * k;
    d.mask[5] = 1;
    d.values[5] = 0.0;
    write_fan_data("io_fan.txt", d);
    const FanBeamData e = read_fan_data("io_fan.txt");
    CHECK(e.values == d.values);
    CHECK(e.mask == d.mask);
    CHECK(e.trapped == 1);
}

TEST_CASE("light-ray data round trip") {
    LightRayData d;
    d.fan = {2, 3};
    d.sigma = {4, -1.5, 0.5};
    for (int k = 0; k < 24; ++k) d.values.push_back(std::cos(k) / 9.0);
    d.mask = {0, 0, 1, 0, 0, 0};
    d.chord = {1.9, 1.0, 0.0, 0.5, 1.2, 1.7};
    d.trapped = 1;
    write_lightray_data("io_light.txt", d);
    const LightRayData e = read_lightray_data("io_light.txt");
    CHECK(e.values == d.values);
    CHECK(e.mask == d.mask);
    CHECK(e.chord == d.chord);
    CHECK(e.sigma.min == -1.5);
    CHECK(e.sigma.max == 0.5);
    CHECK(e.trapped == 1);
}

TEST_CASE("PGM output reads back with the expected scaling") {
    write_pgm("io_img.pgm", {0.0, 0.5, 1.0, 2.0}, 2, 2, 8);
    int w = 0, h = 0, m = 0;
    const auto px = read_pgm("io_img.pgm", w, h, m);
    CHECK(w == 2);
    CHECK(h == 2);
    CHECK(m == 255);
    CHECK(px == std::vector<int>{0, 64, 128, 255});
    write_pgm("io_img16.pgm", {1.0, 3.0}, 2, 1, 16);
    const auto px16 = read_pgm("io_img16.pgm", w, h, m);
    CHECK(m == 65535);
    CHECK(px16 == std::vector<int>{0, 65535});
    CHECK_THROWS_AS(write_pgm("io_bad.pgm", {1.0}, 2, 2, 8), ParameterError);
}

TEST_CASE("convergence logs and CSV") {
    write_convergence_log("io_log.txt", {1.0, 0.5, 0.125});
    CHECK(read_convergence_log("io_log.txt") == std::vector<double>{1.0, 0.5, 0.125});
    write_csv("io_table.csv", {"h", "error"}, {{0.5, 1e-3}, {0.25, NAN}});
    std::ifstream in("io_table.csv");
    std::string line;
    std::getline(in, line);
    CHECK(line == "h,error");
    std::getline(in, line);
    std::getline(in, line);
    CHECK(line == "0.25,nan");
}

TEST_CASE("malformed files are rejected") {
    write_text("io_trunc.txt", "3 3 -1 1 -1 1\n1 2 3\n");
    CHECK_THROWS_AS(read_scalar_field("io_trunc.txt"), ParameterError);
    write_text("io_word.txt", "2 2 -1 1 -1 1\n1 2 x 4\n");
    CHECK_THROWS_AS(read_lambda_grid("io_word.txt"), ParameterError);
    write_text("io_hdr.txt", "2.5 2 1\n");
    CHECK_THROWS_AS(read_sinogram("io_hdr.txt"), ParameterError);
    write_text("io_mask.txt", "1 2\n0.5 0.5\n0 2\n");
    CHECK_THROWS_AS(read_fan_data("io_mask.txt"), ParameterError);
    write_text("io_sm.txt", "9 8 8 1\n");
    CHECK_THROWS_AS(read_sm_field("io_sm.txt"), ParameterError);
    write_text("io_notpgm.pgm", "P2\n2 2\n255\n");
    int w, h, m;
    CHECK_THROWS_AS(read_pgm("io_notpgm.pgm", w, h, m), ParameterError);
    CHECK_THROWS_AS(read_numbers("does/not/exist.txt"), ParameterError);
    write_text("io_json.txt", "{\"a\": ");
    CHECK_THROWS_AS(read_json("io_json.txt"), ParameterError);
}
