#include "gou/config.hpp"

#include <gtest/gtest.h>

#include <string>

using namespace gou;

namespace {

Json base() {
    return Json::parse(R"({
        "command": "solve", "dim": 2,
        "boundary": {"type": "builtin", "name": "cos_2theta"},
        "grid": {"radii": [1, 2], "n_dirs": 4}
    })");
}

std::string error_of(const Json& doc) {
    try {
        parse_run_config(doc);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

}  // namespace

TEST(Config, ParsesAMinimalDocument) {
    const RunConfig c = parse_run_config(base());
    EXPECT_EQ(c.command, Command::solve);
    EXPECT_EQ(c.grid.radii, (std::vector<double>{1.0, 2.0}));
    EXPECT_EQ(c.mc.n_paths, 100000);
    EXPECT_EQ(c.format, Format::json);
}

TEST(Config, UnknownFieldsNameThePath) {
    Json d = base();
    d["grid"]["spacing"] = 3;
    EXPECT_NE(error_of(d).find("grid.spacing"), std::string::npos);
    d = base();
    d["mc"] = {{"paths", 10}};
    EXPECT_NE(error_of(d).find("mc.paths"), std::string::npos);
    d = base();
    d["colour"] = "red";
    EXPECT_NE(error_of(d).find("colour"), std::string::npos);
}

TEST(Config, BoundaryErrors) {
    Json d = base();
    d["boundary"]["name"] = "cos_3theta";
    EXPECT_NE(error_of(d).find("boundary.name"), std::string::npos);
    d = base();
    d["dim"] = 3;
    EXPECT_NE(error_of(d).find("form mismatch"), std::string::npos);
    d = base();
    d["boundary"] = {{"type", "spectrum"}, {"terms", {{{"l", 2}, {"kind", "tan"}, {"coef", 1.0}}}}};
    EXPECT_NE(error_of(d).find("terms[0].kind"), std::string::npos);
    d = base();
    d["boundary"] = {{"type", "zonal"}, {"d", 3}, {"profile_coeffs", {1.0}}};
    EXPECT_NE(error_of(d).find("boundary.d"), std::string::npos);
}

TEST(Config, ValueErrors) {
    Json d = base();
    d["mc"] = {{"dt", -1.0}};
    EXPECT_FALSE(error_of(d).empty());
    d = base();
    d["dim"] = 1;
    EXPECT_FALSE(error_of(d).empty());
    d = base();
    d["format"] = "xml";
    EXPECT_FALSE(error_of(d).empty());
    d = base();
    d["command"] = "plot";
    EXPECT_FALSE(error_of(d).empty());
}

TEST(Config, MissingFileIsAnIoError) {
    EXPECT_THROW(load_run_config("/nonexistent/run.json"), IoError);
}

TEST(Config, HashIsStableAndIgnoresWorkers) {
    Json a = base();
    a["mc"] = {{"worker_streams", 1}};
    Json b = base();
    b["mc"] = {{"worker_streams", 8}};
    const std::string ha = config_hash(resolved_config(parse_run_config(a)));
    EXPECT_EQ(ha, config_hash(resolved_config(parse_run_config(b))));
    EXPECT_EQ(ha.size(), 16u);
    Json c = base();
    c["mc"] = {{"seed", 43}};
    EXPECT_NE(ha, config_hash(resolved_config(parse_run_config(c))));
}

TEST(Config, ResolvedConfigRoundTrips) {
    const RunConfig c = parse_run_config(base());
    Json r = resolved_config(c);
    const RunConfig again = parse_run_config(r);
    EXPECT_EQ(config_hash(resolved_config(again)), config_hash(r));
}
