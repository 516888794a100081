#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "snlab/connectivity.hpp"
#include "snlab/graphs.hpp"
#include "snlab/stats.hpp"

namespace snlab::io {

using json = nlohmann::ordered_json;

json to_json(const GraphFamily& f);
json to_json(const Window& w);
json to_json(const RunningStats& s);
json to_json(const Interval& i);
json to_json(const PairEstimate& e);

// Parses "tree:D", "cycle:N" or "torus:DIM:SIDE".
GraphFamily parse_family(const std::string& spec);

// Fixed-precision rendering so equal runs give equal bytes.
std::string fmt(double x);

// Writes `content` to `path`, creating parent directories.
void write_file(const std::filesystem::path& path, const std::string& content);

// FNV-1a over the bytes, rendered as 16 hex digits.
std::string digest(const std::string& content);

}  // namespace snlab::io
