// Serial reference vs OpenMP replica map on the main sampling kernels.
// Prints wall time per kernel and checks that both produce identical output.
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <string>

#include <CLI11.hpp>

#include "ipd/crp.hpp"
#include "ipd/evolve.hpp"
#include "ipd/kernel.hpp"
#include "ipd/replicas.hpp"

using namespace ipd;

namespace {

template <class F>
double seconds(F&& f) {
    auto t0 = std::chrono::steady_clock::now();
    f();
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <class F>
bool compare(const char* name, size_t n, F f) {
    std::vector<double> a, b;
    double ts = seconds([&] { a = serial_map(n, f); });
    double tp = seconds([&] { b = parallel_map(n, f); });
    bool same = a == b;
    std::printf("%-22s n=%-7zu serial=%8.3f s  parallel=%8.3f s  speedup=%5.2f  identical=%s\n", name, n, ts, tp,
                ts / tp, same ? "yes" : "NO");
    return same;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Serial vs parallel replica benchmark"};
    size_t n = 2000;
    int w = 0;
    uint64_t seed = 7;
    app.add_option("--replicas", n, "Replicas per kernel")->check(CLI::PositiveNumber);
    app.add_option("--workers", w, "Worker threads (0: runtime default)");
    app.add_option("--seed", seed, "Seed");
    CLI11_PARSE(app, argc, argv);
    set_workers(w);
    std::printf("workers=%d\n", workers());

    auto pool = SpindlePool::shared_default();
    IntervalPartition beta = make_partition({0.5, 0.3, 0.2});
    bool ok = true;
    ok &= compare("kernel-type1", n, [&](size_t r) {
        Rng g = Rng(seed, 1).child(r);
        return sample_kernel_type1(beta, 0.5, g).total_mass;
    });
    ok &= compare("pdip-half-half", n, [&](size_t r) {
        Rng g = Rng(seed, 2).child(r);
        return double(sample_pdip(PdipVariant::HalfHalf, g).blocks.size());
    });
    ok &= compare("path-type1-mass", n / 4, [&](size_t r) {
        PathEvolution ev(beta, Mode::Type1, EvolveParams{}, Rng(seed, 3).child(r), pool);
        return ev.masses({0.5}).front();
    });
    ok &= compare("crp-top-block", n / 4, [&](size_t r) {
        Rng g = Rng(seed, 4).child(r);
        return ranked_sample(500, CrpParams{0.5, 0.5}, 10, g).values.at(0);
    });
    return ok ? EXIT_SUCCESS : EXIT_FAILURE;
}
