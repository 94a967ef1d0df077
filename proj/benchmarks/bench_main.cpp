#include <benchmark/benchmark.h>

#include "svnet/certificate.hpp"
#include "svnet/simulator.hpp"
#include "svnet/steady_state.hpp"
#include "svnet/weights.hpp"

using namespace svnet;

namespace {

ChannelSpec spec(int id, double L, int cells) {
    ChannelSpec s;
    s.id = id;
    s.length = L;
    s.friction = 0.002;
    s.cells = cells;
    return s;
}

NetworkTopology star(int cells) {
    return make_star(spec(1, 1000, cells), {spec(2, 800, cells), spec(3, 600, cells), spec(4, 700, cells)},
                     {0.3, 0.3, 0.4});
}

const std::map<int, double> kGains{{2, 0.5}, {3, 0.5}, {4, 0.5}};

void BM_SteadyChannel(benchmark::State& state) {
    const auto s = spec(1, 2000, static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(integrate_channel_steady(3.0, 2.0, s));
}
BENCHMARK(BM_SteadyChannel)->Arg(50)->Arg(200)->Arg(800);

void BM_EtaBarClosedForm(benchmark::State& state) {
    const auto prof = integrate_channel_steady(3.0, 2.0, spec(1, 2000, 200));
    const auto cc = coupling_coefficients(prof);
    const auto phi = phi_profiles(cc, prof.fine_step());
    for (auto _ : state) benchmark::DoNotOptimize(eta_bar_closed(prof, cc, phi));
}
BENCHMARK(BM_EtaBarClosedForm);

void BM_EtaBarOracle(benchmark::State& state) {
    const auto prof = integrate_channel_steady(3.0, 2.0, spec(1, 2000, 200));
    for (auto _ : state) benchmark::DoNotOptimize(eta_bar_ode_oracle(prof));
}
BENCHMARK(BM_EtaBarOracle);

void BM_CertifyStar(benchmark::State& state) {
    const auto topo = star(static_cast<int>(state.range(0)));
    const auto profiles = solve_network_steady(topo, 2.0, 3.0);
    for (auto _ : state) benchmark::DoNotOptimize(certify_network(topo, profiles, kGains));
}
BENCHMARK(BM_CertifyStar)->Arg(50)->Arg(200);

void BM_SimulationStep(benchmark::State& state) {
    const auto topo = star(static_cast<int>(state.range(0)));
    const auto profiles = solve_network_steady(topo, 2.0, 3.0);
    const auto mode = state.range(1) ? SimMode::Nonlinear : SimMode::Linear;
    NetworkSimulator sim(topo, profiles, kGains, SimOptions{mode, 0.9});
    sim.perturb(Perturbation{1e-3, {}});
    for (auto _ : state) sim.step();
    state.SetItemsProcessed(state.iterations() * 4 * state.range(0));
}
BENCHMARK(BM_SimulationStep)->Args({100, 0})->Args({100, 1})->Args({400, 0})->Args({400, 1});

void BM_LyapunovSample(benchmark::State& state) {
    const auto topo = star(100);
    const auto profiles = solve_network_steady(topo, 2.0, 3.0);
    NetworkSimulator sim(topo, profiles, kGains, SimOptions{SimMode::Nonlinear, 0.9});
    sim.perturb(Perturbation{1e-3, {}});
    sim.advance(10);
    for (auto _ : state) benchmark::DoNotOptimize(sim.sample());
}
BENCHMARK(BM_LyapunovSample);

}  // namespace

BENCHMARK_MAIN();
