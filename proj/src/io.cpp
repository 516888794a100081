#include "snlab/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace snlab::io {

json to_json(const GraphFamily& f) {
    json j;
    j["name"] = f.name();
    j["degree"] = f.degree;
    if (f.is_periodic()) {
        j["dim"] = f.dim;
        j["side"] = f.side;
    }
    return j;
}

json to_json(const Window& w) {
    json j;
    j["family"] = to_json(w.family());
    j["radius"] = w.radius();
    j["policy"] = to_string(w.policy());
    return j;
}

json to_json(const RunningStats& s) {
    return json{{"n", s.n}, {"mean", s.mean}, {"stderr", s.stderr_mean()}, {"variance", s.variance()}};
}

json to_json(const Interval& i) { return json::array({i.lo, i.hi}); }

json to_json(const PairEstimate& e) {
    json j;
    j["T"] = e.horizon;
    j["replicas"] = e.replicas;
    j["eligible"] = e.eligible;
    j["connected"] = e.connected;
    j["censored"] = e.censored;
    j["defined"] = e.defined;
    if (e.defined) j["estimate"] = e.estimate;
    else j["estimate"] = nullptr;
    j["lower"] = e.lower;
    j["upper"] = e.upper;
    j["ci"] = to_json(e.ci);
    return j;
}

GraphFamily parse_family(const std::string& spec) {
    std::vector<std::string> parts;
    std::stringstream ss(spec);
    for (std::string p; std::getline(ss, p, ':');) parts.push_back(p);
    auto num = [&](std::size_t i) -> long long {
        if (i >= parts.size()) throw std::invalid_argument("family: missing parameter in '" + spec + "'");
        std::size_t used = 0;
        long long v = std::stoll(parts[i], &used);
        if (used != parts[i].size()) throw std::invalid_argument("family: bad number '" + parts[i] + "'");
        return v;
    };
    if (parts.empty()) throw std::invalid_argument("family: empty specification");
    if (parts[0] == "tree" && parts.size() == 2) return GraphFamily::regular_tree(static_cast<int>(num(1)));
    if (parts[0] == "cycle" && parts.size() == 2) return GraphFamily::cycle(static_cast<std::uint64_t>(num(1)));
    if (parts[0] == "torus" && parts.size() == 3)
        return GraphFamily::torus(static_cast<int>(num(1)), static_cast<std::uint64_t>(num(2)));
    throw std::invalid_argument("family: expected tree:D, cycle:N or torus:DIM:SIDE, got '" + spec + "'");
}

std::string fmt(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", x);
    return buf;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot open " + path.string() + " for writing");
    os << content;
    if (!os) throw std::runtime_error("write failed: " + path.string());
}

std::string digest(const std::string& content) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : content) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace snlab::io
