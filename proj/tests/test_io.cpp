#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "lastzero/errors.hpp"
#include "lastzero/io.hpp"

using namespace lastzero;
namespace fs = std::filesystem;

namespace {

fs::path tmp(const std::string& name) {
    const fs::path dir = fs::path(LASTZERO_TEST_TMP) / "io";
    fs::create_directories(dir);
    return dir / name;
}

BoundaryPair sample_pair() {
    BoundaryPair bp;
    bp.spec = {0.75, 2.0};
    bp.grid = {0.0, 0.1 / 3.0, 1.5, 2.0};
    bp.b_minus = {-1.0 / 7.0, -0.1, -0.05, 0.0};
    bp.b_plus = {1.23456789012345678, 0.9, 0.3, 0.0};
    bp.h_minus = {-0.5, -0.4, -0.1, 0.0};
    bp.h_plus = {0.5, 0.4, 0.1, 0.0};
    bp.residual_minus = {1e-12, std::nan(""), -3e-11, 0.0};
    bp.residual_plus = {std::nan(""), 2e-300, 5e-11, 0.0};
    return bp;
}

void expect_same(const std::vector<double>& a, const std::vector<double>& b) {
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (std::isnan(a[i])) {
            EXPECT_TRUE(std::isnan(b[i]));
        } else {
            EXPECT_EQ(a[i], b[i]);
        }
    }
}

void expect_same(const BoundaryPair& a, const BoundaryPair& b) {
    EXPECT_EQ(a.spec, b.spec);
    expect_same(a.grid, b.grid);
    expect_same(a.b_minus, b.b_minus);
    expect_same(a.b_plus, b.b_plus);
    expect_same(a.h_minus, b.h_minus);
    expect_same(a.h_plus, b.h_plus);
    expect_same(a.residual_minus, b.residual_minus);
    expect_same(a.residual_plus, b.residual_plus);
    EXPECT_EQ(a.source, b.source);
}

}  // namespace

TEST(Fnv, ReferenceVectors) {
    EXPECT_EQ(fnv1a64(""), 0xcbf29ce484222325ULL);
    EXPECT_EQ(fnv1a64("a"), 0xaf63dc4c8601ec8cULL);
    EXPECT_EQ(hex64(0xaf63dc4c8601ec8cULL), "af63dc4c8601ec8c");
    EXPECT_EQ(hex64(1), "0000000000000001");
}

TEST(FormatNumber, RoundTripsExactly) {
    for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 1.2345678901234567e10}) {
        EXPECT_EQ(std::stod(format_number(v)), v);
    }
    EXPECT_EQ(format_number(std::nan("")), "nan");
}

TEST(BoundaryCsv, RoundTrip) {
    const BoundaryPair bp = sample_pair();
    const fs::path p = tmp("b.csv");
    write_boundaries_csv(bp, p, "abc");
    expect_same(bp, read_boundaries_csv(p));
    expect_same(bp, read_boundaries(p));
    const std::string text = read_text(p);
    EXPECT_EQ(text.rfind("# lastzero-boundaries v1 ", 0), 0u);
    EXPECT_NE(text.find("manifest=abc"), std::string::npos);
}

TEST(BoundaryJson, RoundTrip) {
    const BoundaryPair bp = sample_pair();
    const fs::path p = tmp("b.json");
    write_boundaries_json(bp, p, "abc");
    expect_same(bp, read_boundaries_json(p));
    expect_same(bp, read_boundaries(p));
    const auto j = nlohmann::json::parse(read_text(p));
    EXPECT_EQ(j.at("schema"), "lastzero.boundaries");
    EXPECT_EQ(j.at("version"), 1);
}

TEST(BoundaryCsv, RejectsWrongVersionOrHeader) {
    const BoundaryPair bp = sample_pair();
    const fs::path p = tmp("v.csv");
    write_boundaries_csv(bp, p);
    std::string text = read_text(p);

    std::string bumped = text;
    bumped.replace(bumped.find(" v1 "), 4, " v2 ");
    write_text(p, bumped);
    EXPECT_THROW(read_boundaries_csv(p), SchemaError);

    std::string renamed = text;
    renamed.replace(renamed.find("b_plus"), 6, "b_upper");
    write_text(p, renamed);
    EXPECT_THROW(read_boundaries_csv(p), SchemaError);

    write_text(p, "t,b_minus,b_plus\n0,0,0\n");
    EXPECT_THROW(read_boundaries_csv(p), SchemaError);
}

TEST(BoundaryJson, RejectsWrongSchema) {
    const fs::path p = tmp("bad.json");
    write_text(p, R"({"schema": "lastzero.boundaries", "version": 2})");
    EXPECT_THROW(read_boundaries_json(p), SchemaError);
    write_text(p, R"({"schema": "other", "version": 1})");
    EXPECT_THROW(read_boundaries_json(p), SchemaError);
    write_text(p, "not json");
    EXPECT_THROW(read_boundaries_json(p), SchemaError);
}

TEST(Files, MissingFileIsIoError) {
    EXPECT_THROW(read_text(tmp("does-not-exist.csv")), IoError);
    EXPECT_THROW(read_boundaries(tmp("does-not-exist.csv")), IoError);
}

TEST(SurfaceCsv, RoundTrip) {
    ValueSurface vs;
    vs.spec = {-1.0, 1.0};
    vs.t_grid = {0.0, 0.5, 1.0};
    vs.x_grid = {-1.0, 0.0, 1.0 / 3.0};
    vs.values = {-0.1, -0.2, -0.3, -0.05, -0.1, 0.0, 0.0, 0.0, 0.0};
    vs.source = SurfaceSource::bellman;
    const fs::path p = tmp("s.csv");
    write_surface_csv(vs, p);
    const ValueSurface back = read_surface_csv(p);
    EXPECT_EQ(back.spec, vs.spec);
    EXPECT_EQ(back.source, vs.source);
    expect_same(back.t_grid, vs.t_grid);
    expect_same(back.x_grid, vs.x_grid);
    expect_same(back.values, vs.values);
    EXPECT_EQ(read_text(p).rfind("# lastzero-surface v1", 0), 0u);
}

TEST(Manifest, HashIgnoresTimestampsAndOutputs) {
    RunManifest a;
    a.command = "solve";
    a.spec = to_json(ProblemSpec{1.0, 1.0});
    a.config = to_json(SolverConfig{});
    RunManifest b = a;
    b.started_at = "2030-01-01T00:00:00Z";
    b.wall_time_s = 12.5;
    b.outputs = {"/elsewhere/out.csv"};
    EXPECT_EQ(a.hash(), b.hash());
    b.spec = to_json(ProblemSpec{-1.0, 1.0});
    EXPECT_NE(a.hash(), b.hash());
    const auto j = a.to_json();
    EXPECT_EQ(j.at("hash"), a.hash());
}

TEST(PolicyReportLine, Fields) {
    PolicyReport r;
    r.policy_name = "optimal";
    r.estimate = 0.25;
    r.std_error = 1e-3;
    r.n_paths = 10;
    r.n_steps = 20;
    r.seed = 3;
    r.spec = {1.0, 1.0};
    const auto j = nlohmann::json::parse(policy_report_line(r, "h"));
    EXPECT_EQ(j.at("policy"), "optimal");
    EXPECT_EQ(j.at("estimate"), 0.25);
    EXPECT_EQ(j.at("manifest"), "h");
}
