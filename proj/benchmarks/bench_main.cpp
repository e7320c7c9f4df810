#include <benchmark/benchmark.h>

#include "iceload/config.hpp"
#include "iceload/elasticity.hpp"
#include "iceload/experiments.hpp"
#include "iceload/geometry.hpp"
#include "iceload/inference.hpp"
#include "iceload/pipeline.hpp"
#include "iceload/prior.hpp"

using namespace iceload;

namespace {

CylinderSpec scaled_spec(int factor) {
    CylinderSpec spec = default_config().geometry;
    spec.angular_resolution = spec.angular_resolution * factor / 2;
    spec.vertical_resolution = spec.vertical_resolution * factor / 2;
    return spec;
}

const Model& default_model() {
    static const Model model = build_model(default_config());
    return model;
}

void BM_MeshGeneration(benchmark::State& state) {
    const CylinderSpec spec = scaled_spec(static_cast<int>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(generate_cylinder_mesh(spec));
}
BENCHMARK(BM_MeshGeneration)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_StiffnessAssemblyAndFactor(benchmark::State& state) {
    const Mesh mesh = generate_cylinder_mesh(scaled_spec(static_cast<int>(state.range(0))));
    const Material material;
    for (auto _ : state) benchmark::DoNotOptimize(assemble_stiffness(mesh, material));
    state.counters["dofs"] = static_cast<double>(3 * mesh.nodes.size());
}
BENCHMARK(BM_StiffnessAssemblyAndFactor)->Arg(1)->Arg(2)->Unit(benchmark::kMillisecond);

void BM_ObservationOperator(benchmark::State& state) {
    const Model& m = default_model();
    for (auto _ : state) benchmark::DoNotOptimize(build_observation_operator(m.system, m.observer, m.load));
}
BENCHMARK(BM_ObservationOperator)->Unit(benchmark::kMillisecond);

void BM_PriorAssembly(benchmark::State& state) {
    const Model& m = default_model();
    const PriorConfig cfg = default_config().prior;
    for (auto _ : state) benchmark::DoNotOptimize(assemble_prior(m.mesh, m.band, cfg));
}
BENCHMARK(BM_PriorAssembly)->Unit(benchmark::kMillisecond);

void BM_ConditionSingleRecord(benchmark::State& state) {
    const Model& m = default_model();
    const Eigen::MatrixXd& h = m.h.matrix;
    const Eigen::VectorXd y = h * m.prior.mean;
    const ConditionOptions opts{state.range(0) != 0, false};
    for (auto _ : state) benchmark::DoNotOptimize(condition(m.prior, h, {y, {}, 1e-6, 0.0}, opts));
}
BENCHMARK(BM_ConditionSingleRecord)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_Timeseries(benchmark::State& state) {
    const Model& m = default_model();
    const Eigen::MatrixXd& h = m.h.matrix;
    const auto records = synthesize_series(m.prior.mean, h, 1e-6, 3, static_cast<std::size_t>(state.range(0)));
    for (auto _ : state) benchmark::DoNotOptimize(infer_timeseries(records, h, m.prior));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Timeseries)->Arg(60)->Arg(600)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
