#include "csplat/core.hpp"
#include "csplat/ellipse.hpp"
#include "csplat/error.hpp"
#include "csplat/grad_opt.hpp"
#include "csplat/io_formats.hpp"
#include "csplat/prefilter.hpp"
#include "csplat/project_affine.hpp"
#include "csplat/project_conic.hpp"
#include "csplat/raster.hpp"
#include "csplat/synth.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>

namespace {

using namespace csplat;

std::string g17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

ProjectionMode parse_mode(const std::string& mode) {
    if (mode == "affine") return ProjectionMode::Affine;
    if (mode == "conic") return ProjectionMode::Conic;
    throw Error(ErrorKind::InvalidParameter, "mode must be affine or conic");
}

std::vector<Gaussian3D> load_cloud(const std::string& path) {
    return read_ply(read_file(path));
}

std::vector<Camera> load_cameras(const std::string& path) {
    auto bytes = read_file(path);
    return read_cameras(std::string(bytes.begin(), bytes.end()));
}

int run_synth(const std::string& out, const std::string& cameras_path, int n, std::uint64_t seed,
              const std::string& preset) {
    SynthScene scene = synth_scene(n, seed, preset);
    write_file(out, write_ply(scene.gaussians));
    write_file(cameras_path, write_cameras(scene.cameras));
    return 0;
}

int run_project(const std::string& cloud, const std::string& cameras_path, const std::string& mode,
                const std::string& out) {
    auto gaussians = load_cloud(cloud);
    auto cameras = load_cameras(cameras_path);
    ProjectionMode pm = parse_mode(mode);

    std::string csv = "camera,index,keep,reason,px,py,ic_xx,ic_xy,ic_yy,depth\n";
    for (size_t c = 0; c < cameras.size(); ++c) {
        SceneProjection proj = project_scene(gaussians, cameras[c], pm);
        size_t cursor = 0;
        for (size_t i = 0; i < gaussians.size(); ++i) {
            const FilterVerdict& v = proj.verdicts[i];
            csv += std::to_string(c) + "," + std::to_string(i) + "," + (v.keep ? "1" : "0") + "," +
                   to_string(v.reason);
            if (v.keep) {
                const Splat2D& s = proj.splats[cursor++];
                csv += "," + g17(s.center.x()) + "," + g17(s.center.y()) + "," + g17(s.inv_cov(0, 0)) +
                       "," + g17(s.inv_cov(0, 1)) + "," + g17(s.inv_cov(1, 1)) + "," + g17(s.depth);
            } else {
                csv += ",,,,,,";
            }
            csv += "\n";
        }
    }
    write_file(out, csv);
    return 0;
}

int run_render(const std::string& cloud, const std::string& cameras_path, const std::string& mode,
               const std::string& out_dir, double dilation) {
    auto gaussians = load_cloud(cloud);
    auto cameras = load_cameras(cameras_path);
    ProjectionMode pm = parse_mode(mode);
    RenderOptions opts;
    opts.dilation_s = dilation;

    std::filesystem::create_directories(out_dir);
    for (size_t c = 0; c < cameras.size(); ++c) {
        Image img = render(gaussians, cameras[c], opts, pm);
        char name[64];
        std::snprintf(name, sizeof(name), "render_%03zu.ppm", c);
        write_file(out_dir + "/" + name, write_ppm(img));
    }
    return 0;
}

int run_compare(const std::string& cloud, const std::string& cameras_path, const std::string& out) {
    auto gaussians = load_cloud(cloud);
    auto cameras = load_cameras(cameras_path);

    std::string csv = "camera,index,keep,reason,center_shift_px,hausdorff_px,conic_class\n";
    for (size_t c = 0; c < cameras.size(); ++c) {
        const Camera& cam = cameras[c];
        for (size_t i = 0; i < gaussians.size(); ++i) {
            const Gaussian3D& g = gaussians[i];
            Eigen::Matrix3d sigma = build_covariance(g.rotation, g.log_scales);
            auto [sigma_c, p_c] = to_camera(sigma, g.position, cam);
            FilterVerdict v = prefilter_camera_space(sigma_c, p_c, cam);
            csv += std::to_string(c) + "," + std::to_string(i) + "," + (v.keep ? "1" : "0") + "," +
                   to_string(v.reason);
            if (v.keep) {
                Splat2D conic = project_conic(sigma_c, p_c, cam);
                Splat2D affine = project_affine(sigma_c, p_c, cam);
                const double shift = (conic.center - affine.center).norm();
                EllipseAxes ec = ellipse_axes(conic.center, conic.inv_cov);
                EllipseAxes ea = ellipse_axes(affine.center, affine.inv_cov);
                csv += "," + g17(shift) + "," + g17(ellipse_hausdorff(ec, ea)) + ",ellipse";
            } else if (v.reason == RejectReason::CameraInside) {
                csv += ",,,";
            } else {
                Eigen::Matrix3d a = ellipsoid_form(sigma_c);
                UnitPlaneConic conic = conic_on_unit_plane(cone_matrix(a, p_c));
                csv += ",,," + std::string(to_string(conic.kind));
            }
            csv += "\n";
        }
    }
    write_file(out, csv);
    return 0;
}

int run_filter_stats(const std::string& cloud, const std::string& cameras_path) {
    auto gaussians = load_cloud(cloud);
    auto cameras = load_cameras(cameras_path);

    std::cout << "camera,kept,camera_inside,behind_plane,out_of_frustum\n";
    for (size_t c = 0; c < cameras.size(); ++c) {
        SceneProjection proj = project_scene(gaussians, cameras[c], ProjectionMode::Conic);
        int kept = 0, inside = 0, behind = 0, frustum = 0;
        for (const FilterVerdict& v : proj.verdicts) {
            switch (v.reason) {
            case RejectReason::None: ++kept; break;
            case RejectReason::CameraInside: ++inside; break;
            case RejectReason::BehindPlane: ++behind; break;
            case RejectReason::OutOfFrustum: ++frustum; break;
            }
        }
        std::cout << c << "," << kept << "," << inside << "," << behind << "," << frustum << "\n";
    }
    return 0;
}

int run_fit(const std::string& target_cloud, const std::string& init_cloud,
            const std::string& cameras_path, int iters, const std::string& mode,
            const std::string& out_cloud, const std::string& history_path) {
    auto target = load_cloud(target_cloud);
    auto init = load_cloud(init_cloud);
    auto cameras = load_cameras(cameras_path);

    FitConfig cfg;
    cfg.iterations = iters;
    cfg.mode = parse_mode(mode);

    std::vector<Image> refs;
    refs.reserve(cameras.size());
    for (const Camera& cam : cameras) {
        refs.push_back(render(target, cam, cfg.render, cfg.mode));
    }

    FitResult result = fit(init, cameras, refs, cfg);
    write_file(out_cloud, write_ply(result.scene));

    std::string csv = "iteration,loss,psnr\n";
    for (const FitHistoryRow& row : result.history) {
        csv += std::to_string(row.iteration) + "," + g17(row.loss) + "," + g17(row.psnr) + "\n";
    }
    write_file(history_path, csv);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian-splat projection toolkit: exact ellipsoid silhouettes next to the "
                 "classic affine path, with a deterministic CPU renderer and fitting loop"};
    app.require_subcommand(1);

    auto* synth = app.add_subcommand("synth", "write a reproducible synthetic scene and cameras");
    std::string synth_out, synth_cams, synth_preset = "sphere-grid";
    int synth_n = 16;
    std::uint64_t synth_seed = 0;
    synth->add_option("--out", synth_out, "output point cloud (.ply)")->required();
    synth->add_option("--cameras", synth_cams, "output camera list (.txt)")->required();
    synth->add_option("--n", synth_n, "number of Gaussians");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--preset", synth_preset, "sphere-grid | random")
        ->check(CLI::IsMember({"sphere-grid", "random"}));

    auto* project = app.add_subcommand("project", "per-Gaussian projection table");
    std::string proj_cloud, proj_cams, proj_mode, proj_out;
    project->add_option("--cloud", proj_cloud)->required();
    project->add_option("--cameras", proj_cams)->required();
    project->add_option("--mode", proj_mode)->required()->check(CLI::IsMember({"affine", "conic"}));
    project->add_option("--out", proj_out, "output CSV")->required();

    auto* render_cmd = app.add_subcommand("render", "render one PPM per camera");
    std::string ren_cloud, ren_cams, ren_mode, ren_dir;
    double ren_s = 0.3;
    render_cmd->add_option("--cloud", ren_cloud)->required();
    render_cmd->add_option("--cameras", ren_cams)->required();
    render_cmd->add_option("--mode", ren_mode)->required()->check(CLI::IsMember({"affine", "conic"}));
    render_cmd->add_option("--out-dir", ren_dir)->required();
    render_cmd->add_option("--s", ren_s, "dilation in px^2");

    auto* compare = app.add_subcommand("compare", "center shift and silhouette distance per Gaussian");
    std::string cmp_cloud, cmp_cams, cmp_out;
    compare->add_option("--cloud", cmp_cloud)->required();
    compare->add_option("--cameras", cmp_cams)->required();
    compare->add_option("--out", cmp_out, "output CSV")->required();

    auto* stats = app.add_subcommand("filter-stats", "rejection counts per camera");
    std::string st_cloud, st_cams;
    stats->add_option("--cloud", st_cloud)->required();
    stats->add_option("--cameras", st_cams)->required();

    auto* fit_cmd = app.add_subcommand("fit", "fit a scene to renders of a target cloud");
    std::string fit_target, fit_init, fit_cams, fit_mode, fit_out, fit_history;
    int fit_iters = 2000;
    fit_cmd->add_option("--target-cloud", fit_target)->required();
    fit_cmd->add_option("--init-cloud", fit_init)->required();
    fit_cmd->add_option("--cameras", fit_cams)->required();
    fit_cmd->add_option("--iters", fit_iters);
    fit_cmd->add_option("--mode", fit_mode)->required()->check(CLI::IsMember({"affine", "conic"}));
    fit_cmd->add_option("--out-cloud", fit_out)->required();
    fit_cmd->add_option("--history", fit_history, "loss history CSV")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (synth->parsed()) return run_synth(synth_out, synth_cams, synth_n, synth_seed, synth_preset);
        if (project->parsed()) return run_project(proj_cloud, proj_cams, proj_mode, proj_out);
        if (render_cmd->parsed()) return run_render(ren_cloud, ren_cams, ren_mode, ren_dir, ren_s);
        if (compare->parsed()) return run_compare(cmp_cloud, cmp_cams, cmp_out);
        if (stats->parsed()) return run_filter_stats(st_cloud, st_cams);
        if (fit_cmd->parsed())
            return run_fit(fit_target, fit_init, fit_cams, fit_iters, fit_mode, fit_out, fit_history);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
