#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "snlab/io.hpp"

using namespace snlab;

TEST_CASE("family specs") {
    CHECK(io::parse_family("tree:4") == GraphFamily::regular_tree(4));
    CHECK(io::parse_family("cycle:1000") == GraphFamily::cycle(1000));
    CHECK(io::parse_family("torus:2:64") == GraphFamily::torus(2, 64));
    CHECK_THROWS(io::parse_family("tree"));
    CHECK_THROWS(io::parse_family("grid:3"));
    CHECK_THROWS(io::parse_family("torus:2"));
}

TEST_CASE("digests and formatting") {
    CHECK(io::digest("") == "cbf29ce484222325");
    CHECK(io::digest("a") == "af63dc4c8601ec8c");
    CHECK(io::fmt(0.1) == "0.1");
    CHECK(io::fmt(1.0 / 3) == "0.3333333333");
}

TEST_CASE("json views") {
    PairEstimate e;
    e.horizon = 7;
    e.eligible = 4;
    e.connected = 1;
    e.finish();
    auto j = io::to_json(e);
    CHECK(j["T"] == 7);
    CHECK(j["estimate"].get<double>() == doctest::Approx(0.25));
    auto w = io::to_json(Window(GraphFamily::regular_tree(3), 5));
    CHECK(w["radius"] == 5);
}

TEST_CASE("write_file creates directories") {
    auto dir = std::filesystem::temp_directory_path() / "snlab_io_test" / "a" / "b";
    std::filesystem::remove_all(dir.parent_path().parent_path());
    io::write_file(dir / "x.txt", "hello\n");
    std::ifstream in(dir / "x.txt");
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str() == "hello\n");
    std::filesystem::remove_all(dir.parent_path().parent_path());
}
