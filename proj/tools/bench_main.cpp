// Compares the OpenMP-tiled kernels against the serial reference paths on a
// mid-sized synthetic scene. Outputs are identical by construction; this
// target only measures time.

#include "csplat/raster.hpp"
#include "csplat/synth.hpp"
#include "csplat/threading.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace csplat;

struct BenchScene {
    SynthScene scene;
    Camera camera;
    RenderOptions opts;
};

const BenchScene& bench_scene() {
    static BenchScene b = [] {
        BenchScene out;
        out.scene = synth_scene(4000, 11, "random");
        out.camera = out.scene.cameras[0];
        out.camera.width = 512;
        out.camera.height = 512;
        out.camera.fx = 448.0;
        out.camera.fy = 448.0;
        return out;
    }();
    return b;
}

void bm_render_tiled(benchmark::State& state) {
    const BenchScene& b = bench_scene();
    set_thread_cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        Image img = render(b.scene.gaussians, b.camera, b.opts, ProjectionMode::Conic);
        benchmark::DoNotOptimize(img.pixels.data());
    }
    set_thread_cap(0);
}

void bm_render_reference(benchmark::State& state) {
    const BenchScene& b = bench_scene();
    for (auto _ : state) {
        Image img = render_reference(b.scene.gaussians, b.camera, b.opts, ProjectionMode::Conic);
        benchmark::DoNotOptimize(img.pixels.data());
    }
}

void bm_project_scene(benchmark::State& state) {
    const BenchScene& b = bench_scene();
    set_thread_cap(static_cast<int>(state.range(0)));
    for (auto _ : state) {
        SceneProjection proj = project_scene(b.scene.gaussians, b.camera, ProjectionMode::Conic);
        benchmark::DoNotOptimize(proj.splats.data());
    }
    set_thread_cap(0);
}

BENCHMARK(bm_render_tiled)->Arg(1)->Arg(2)->Arg(4)->Arg(0)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_render_reference)->Unit(benchmark::kMillisecond);
BENCHMARK(bm_project_scene)->Arg(1)->Arg(0)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
