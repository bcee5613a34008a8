// gsplatmpm: simulate elastic dynamics on 3D Gaussian splat clouds (MPM),
// export per-frame PLY sequences, and render them to PNG.

#include "gsmpm/config.hpp"
#include "gsmpm/errors.hpp"
#include "gsmpm/image.hpp"
#include "gsmpm/mpm.hpp"
#include "gsmpm/render.hpp"
#include "gsmpm/sequence.hpp"
#include "gsmpm/splat_io.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

constexpr double kDomainMargin = 0.1;

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

int cmd_simulate(const std::string& config_path) {
    const gsmpm::SimulationConfig cfg = gsmpm::SimulationConfig::from_file(config_path);
    if (!std::filesystem::exists(cfg.input_ply)) {
        throw gsmpm::IoError("input_ply does not exist: " + cfg.input_ply.string());
    }

    const auto setup_start = Clock::now();
    const gsmpm::GaussianCloud cloud = gsmpm::load_gaussian_ply(cfg.input_ply.string());
    gsmpm::ParticleSystem system =
        gsmpm::init_particles(cloud, cfg.material, cfg.grid.spacing(), kDomainMargin);
    gsmpm::Simulation sim(std::move(system), cfg.grid);
    sim.gravity = cfg.gravity;
    sim.schedule = cfg.forces;
    sim.dt_max = cfg.dt_max;
    sim.options.deterministic = cfg.deterministic;
    const double setup_seconds = seconds_since(setup_start);
    std::printf("setup: %.3f s (%zu kernels, grid %d^3)\n", setup_seconds, cloud.count(),
                cfg.grid.resolution);

    std::vector<gsmpm::Frame> frames;
    frames.reserve(cfg.frames);
    const auto dynamics_start = Clock::now();
    try {
        for (int f = 0; f < cfg.frames; ++f) {
            const auto frame_start = Clock::now();
            const int substeps = sim.advance_frame(cfg.frame_dt);
            frames.push_back(gsmpm::snapshot(sim.system, cloud, f));
            std::printf("frame %d: %d substeps, %.3f s\n", f, substeps,
                        seconds_since(frame_start));
            std::fflush(stdout);
        }
    } catch (const gsmpm::SimulationError& e) {
        if (!frames.empty()) {
            gsmpm::export_sequence(frames, cfg.output_dir, cfg.frame_dt, cfg.fingerprint());
            std::fprintf(stderr, "retained %zu completed frame(s) in %s\n", frames.size(),
                         cfg.output_dir.string().c_str());
        }
        throw;
    }
    gsmpm::export_sequence(frames, cfg.output_dir, cfg.frame_dt, cfg.fingerprint());
    std::printf("4D dynamics generation: %.2f s (%d frames, %zu kernels)\n",
                seconds_since(dynamics_start), cfg.frames, cloud.count());
    return 0;
}

gsmpm::Camera default_camera_for(const std::vector<gsmpm::Frame>& frames) {
    gsmpm::Camera cam;
    if (frames.empty() || frames.front().kernels.empty()) return cam;
    gsmpm::Vec3 lo = gsmpm::Vec3::Constant(std::numeric_limits<double>::infinity());
    gsmpm::Vec3 hi = -lo;
    for (const gsmpm::GaussianKernel& k : frames.front().kernels) {
        lo = lo.cwiseMin(k.position);
        hi = hi.cwiseMax(k.position);
    }
    const gsmpm::Vec3 center = 0.5 * (lo + hi);
    const double extent = std::max((hi - lo).maxCoeff(), 1e-3);
    cam.look_at = center;
    cam.position = center + gsmpm::Vec3(0.0, 0.0, 2.5 * extent);
    cam.near = 1e-3 * extent;
    return cam;
}

bool parse_vec3(const std::string& text, gsmpm::Vec3& out) {
    double x, y, z;
    if (std::sscanf(text.c_str(), "%lf,%lf,%lf", &x, &y, &z) != 3) return false;
    out = gsmpm::Vec3(x, y, z);
    return true;
}

int cmd_render(const std::string& dir, const std::string& camera_pos, const std::string& look_at,
               double fov_deg, const std::string& size, double turntable_deg) {
    if (!std::filesystem::exists(std::filesystem::path(dir) / "manifest.json")) {
        throw gsmpm::IoError("missing manifest: " + dir + "/manifest.json");
    }
    const std::vector<gsmpm::Frame> frames = gsmpm::import_sequence(dir);

    gsmpm::Camera cam = default_camera_for(frames);
    if (!camera_pos.empty() && !parse_vec3(camera_pos, cam.position)) {
        throw gsmpm::ValidationError("--camera-pos expects x,y,z");
    }
    if (!look_at.empty() && !parse_vec3(look_at, cam.look_at)) {
        throw gsmpm::ValidationError("--look-at expects x,y,z");
    }
    cam.vertical_fov = fov_deg * 3.14159265358979323846 / 180.0;
    if (!size.empty()) {
        int w = 0, h = 0;
        if (std::sscanf(size.c_str(), "%dx%d", &w, &h) != 2 || w <= 0 || h <= 0) {
            throw gsmpm::ValidationError("--size expects WxH");
        }
        cam.width = w;
        cam.height = h;
    }
    cam.validate();

    gsmpm::CameraPath path;
    path.turntable_deg_per_frame = turntable_deg;
    for (const gsmpm::Frame& frame : frames) {
        const gsmpm::Camera frame_cam = gsmpm::camera_for_frame(cam, path, frame.index);
        const gsmpm::ImageRgba8 image = gsmpm::render_frame(frame, frame_cam);
        char name[32];
        std::snprintf(name, sizeof name, "frame_%04d.png", frame.index);
        gsmpm::write_png_rgba8(std::filesystem::path(dir) / name, image);
        std::printf("rendered %s\n", name);
    }
    return 0;
}

int cmd_info(const std::string& path) {
    const gsmpm::GaussianCloud cloud = gsmpm::load_gaussian_ply(path);
    std::printf("kernels: %zu\n", cloud.count());
    if (cloud.count() == 0) return 0;

    gsmpm::Vec3 lo = gsmpm::Vec3::Constant(std::numeric_limits<double>::infinity());
    gsmpm::Vec3 hi = -lo;
    double op_min = 1.0, op_max = 0.0, op_sum = 0.0;
    double sc_min = std::numeric_limits<double>::infinity(), sc_max = 0.0, sc_sum = 0.0;
    for (const gsmpm::GaussianKernel& k : cloud.kernels) {
        lo = lo.cwiseMin(k.position);
        hi = hi.cwiseMax(k.position);
        op_min = std::min(op_min, k.opacity);
        op_max = std::max(op_max, k.opacity);
        op_sum += k.opacity;
        sc_min = std::min(sc_min, k.scales.minCoeff());
        sc_max = std::max(sc_max, k.scales.maxCoeff());
        sc_sum += k.scales.mean();
    }
    std::printf("bbox min: %.6g %.6g %.6g\n", lo.x(), lo.y(), lo.z());
    std::printf("bbox max: %.6g %.6g %.6g\n", hi.x(), hi.y(), hi.z());
    std::printf("opacity: min %.4f mean %.4f max %.4f\n", op_min, op_sum / cloud.count(), op_max);
    std::printf("scale: min %.6g mean %.6g max %.6g\n", sc_min, sc_sum / cloud.count(), sc_max);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Physics-driven 4D dynamics for 3D Gaussian splat clouds"};
    app.require_subcommand(1);

    std::string config_path;
    CLI::App* simulate = app.add_subcommand("simulate", "Run an MPM simulation from a JSON config");
    simulate->add_option("config", config_path, "JSON configuration file")->required();

    std::string render_dir, camera_pos, look_at, size;
    double fov_deg = 60.0, turntable = 0.0;
    CLI::App* render = app.add_subcommand("render", "Render an exported sequence to PNG frames");
    render->add_option("dir", render_dir, "Sequence directory (with manifest.json)")->required();
    render->add_option("--camera-pos", camera_pos, "Camera position x,y,z");
    render->add_option("--look-at", look_at, "Look-at point x,y,z");
    render->add_option("--fov", fov_deg, "Vertical field of view in degrees");
    render->add_option("--size", size, "Image size WxH (default 512x512)");
    render->add_option("--turntable", turntable, "Azimuth degrees per frame (default 0 = fixed)");

    std::string info_path;
    CLI::App* info = app.add_subcommand("info", "Summarize a 3DGS PLY file");
    info->add_option("file", info_path, "PLY file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        app.exit(e);
        return 2;
    }

    try {
        gsmpm::apply_thread_cap();
        if (simulate->parsed()) return cmd_simulate(config_path);
        if (render->parsed()) return cmd_render(render_dir, camera_pos, look_at, fov_deg, size, turntable);
        if (info->parsed()) return cmd_info(info_path);
    } catch (const gsmpm::SimulationError& e) {
        std::fprintf(stderr, "simulation error at step %lld: %s\n",
                     static_cast<long long>(e.step), e.what());
        return 3;
    } catch (const gsmpm::ParseError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const gsmpm::ValidationError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const gsmpm::IoError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
