#include <CLI11.hpp>
#include <omp.h>

#include <chrono>
#include <cstdio>
#include <functional>
#include <memory>

#include "snlab/brw.hpp"
#include "snlab/field.hpp"

using namespace snlab;

namespace {

double seconds(const std::function<void()>& fn, int reps) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        fn();
        std::chrono::duration<double> dt = std::chrono::steady_clock::now() - t0;
        best = std::min(best, dt.count());
    }
    return best;
}

bool same_field(const WalkerField& a, const WalkerField& b) {
    if (a.size() != b.size() || a.horizon() != b.horizon()) return false;
    for (std::size_t i = 0; i < a.size(); ++i)
        for (int t = 0; t <= a.horizon(); ++t)
            if (a.position(i, t) != b.position(i, t)) return false;
    return true;
}

void report(const char* name, double serial, double parallel, bool equal) {
    std::printf("%-18s serial %8.4fs  parallel %8.4fs  speedup %5.2fx  identical %s\n", name, serial, parallel,
                serial / parallel, equal ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial reference vs OpenMP timings"};
    int side = 128, horizon = 64, reps = 3;
    double lambda = 1.0;
    std::uint64_t replicas = 20'000;
    app.add_option("--side", side, "Torus side")->capture_default_str();
    app.add_option("--horizon", horizon, "Field horizon")->capture_default_str();
    app.add_option("--lambda", lambda, "Density")->capture_default_str();
    app.add_option("--replicas", replicas, "Branching walk populations")->capture_default_str();
    app.add_option("--reps", reps, "Repetitions (best time kept)")->capture_default_str();
    CLI11_PARSE(app, argc, argv);

    std::printf("threads %d\n", omp_get_max_threads());

    auto space = std::make_shared<SiteSpace>(SiteSpace::explicit_window(Window(GraphFamily::torus(2, side), side)));
    WalkKernel kernel{4, 0.5};
    CouplingStream stream(7);
    WalkerField fs, fp;
    double ts = seconds([&] { fs = realize_field(stream, space, kernel, lambda, horizon, {}, Exec::Serial); }, reps);
    double tp = seconds([&] { fp = realize_field(stream, space, kernel, lambda, horizon, {}, Exec::Parallel); }, reps);
    report("realize_field", ts, tp, same_field(fs, fp));

    BrwQuery q;
    q.replicas = replicas;
    q.generations = 6;
    BrwMeansReport rs, rp;
    q.exec = Exec::Serial;
    ts = seconds([&] { rs = brw_root_means(q); }, reps);
    q.exec = Exec::Parallel;
    tp = seconds([&] { rp = brw_root_means(q); }, reps);
    bool eq = rs.rows.size() == rp.rows.size();
    for (std::size_t i = 0; eq && i < rs.rows.size(); ++i) eq = rs.rows[i].q.mean == rp.rows[i].q.mean;
    report("brw_root_means", ts, tp, eq);
    return 0;
}
