#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <optional>
#include <sstream>

#include "rsa/rsa.hpp"

namespace fs = std::filesystem;
using namespace rsa;

namespace {

PipelineConfig config_or_default(const std::string& path) {
    return path.empty() ? PipelineConfig{} : load_config(path);
}

std::optional<double> radius_arg(const std::string& value, const char* name) {
    if (value == "auto") return std::nullopt;
    try {
        std::size_t used = 0;
        const double r = std::stod(value, &used);
        if (used == value.size() && r > 0.0) return r;
    } catch (const std::exception&) {
    }
    throw ConfigError(std::string(name) + " must be a positive number or 'auto', got '" + value + "'");
}

/// "start:stop:step", stop included when the grid lands on it.
std::vector<double> parse_grid(const std::string& spec) {
    double start = 0, stop = 0, step = 0;
    char c1 = 0, c2 = 0;
    std::istringstream in(spec);
    if (!(in >> start >> c1 >> stop >> c2 >> step) || c1 != ':' || c2 != ':' || !(step > 0.0) || stop < start ||
        !(in >> std::ws).eof()) {
        throw ConfigError("grid must look like start:stop:step with step > 0, got '" + spec + "'");
    }
    std::vector<double> out;
    for (std::size_t i = 0;; ++i) {
        const double r = start + static_cast<double>(i) * step;
        if (r > stop + 1e-9 * step) break;
        out.push_back(r);
    }
    return out;
}

void save_image(const fs::path& path, const ImageTensor& x) {
    if (path.extension() == ".png") {
        write_png(path, x);
    } else {
        write_ptf(path, x);
    }
}

int simulate(const std::string& source, std::size_t n, std::size_t s, double sigma, std::uint64_t seed,
             const std::string& family, const fs::path& out) {
    SimulationSpec spec;
    spec.source = read_image(source);
    spec.n_angles = n;
    spec.kernel_size = s;
    spec.noise_sigma = sigma;
    spec.seed = seed;
    spec.kernel_family = parse_kernel_family(family);
    const BlurredDataset ds = blur_dataset(spec);
    write_series(out / "frames", "frame", ds.frames);
    write_series(out / "convolved", "convolved", ds.convolved);
    write_kernels(out / "kernels", ds.kernels);
    write_ptf(out / "truth.ptf", spec.source);
    std::vector<MetricRow> rows;
    for (std::size_t i = 0; i < n; ++i) {
        rows.push_back({indexed_name("frame", i, ""), psnr(ds.frames[i], ds.convolved[i]), ssim(ds.frames[i], ds.convolved[i])});
    }
    write_metrics_csv(out / "noise.csv", rows);
    std::cout << "wrote " << n << " frames to " << (out / "frames") << " (prng " << SplitMix64::kName << ")\n";
    return 0;
}

int estimate(const fs::path& frames_dir, const std::string& config, const fs::path& out) {
    const PipelineConfig cfg = config_or_default(config);
    const auto frames = read_series(frames_dir);
    const XkResult r = run_xk(frames, cfg);
    write_kernels(out / "kernels", r.kernels);
    write_series(out / "xtilde", "xtilde", r.deconvolved);
    write_ptf(out / "xhat.ptf", r.x_hat);
    const std::string log = xk_log(r);
    write_text(out / "run.log", log);
    std::cout << log;
    return 0;
}

int manifold_fit(const fs::path& in, const std::string& r1, const std::string& r2, int k, std::size_t min_neighbors,
                 const fs::path& out) {
    const auto images = read_series(in);
    const SampleSet set = SampleSet::from_images(images);
    PipelineConfig cfg;
    cfg.r1 = radius_arg(r1, "--r1");
    cfg.r2 = radius_arg(r2, "--r2");
    cfg.k_exp = k;
    cfg.min_neighbors = min_neighbors;
    const ManifoldParams p = manifold_params(set, cfg);
    const ManifoldFit fit = fit_manifold(set, p);
    write_series(out, "xstar", fit.points.to_images());
    std::string table = "# r1=" + format_metric(p.r1) + " r2=" + format_metric(p.r2) + " k=" + std::to_string(p.k_exp) +
                        "\nindex,neighbors,displacement,under_sampled,degenerate\n";
    for (std::size_t i = 0; i < fit.diagnostics.size(); ++i) {
        const auto& d = fit.diagnostics[i];
        table += std::to_string(i) + "," + std::to_string(d.neighbors) + "," + format_metric(d.displacement) + "," +
                 (d.under_sampled ? "1" : "0") + "," + (d.degenerate ? "1" : "0") + "\n";
        if (d.under_sampled) {
            std::cerr << "warning: sample " << i << " has " << d.neighbors << " neighbours within r1 (< "
                      << p.min_neighbors << ")\n";
        }
    }
    write_text(out / "diagnostics.csv", table);
    std::cout << "r1 = " << format_metric(p.r1) << ", r2 = " << format_metric(p.r2) << "\n";
    return 0;
}

int reconstruct_cmd(const fs::path& frames_dir, const fs::path& kernels_dir, const std::string& config,
                    const fs::path& out) {
    const PipelineConfig cfg = config_or_default(config);
    const auto frames = read_series(frames_dir);
    const auto kernels = read_kernels(kernels_dir);
    if (frames.size() != kernels.size()) throw Error("frame and kernel counts differ");
    save_image(out, reconstruct(frames, kernels, cfg));
    return 0;
}

int run_all(const fs::path& frames_dir, const std::string& config, const std::string& truth, const fs::path& out) {
    const PipelineConfig cfg = config_or_default(config);
    const auto frames = read_series(frames_dir);
    std::optional<ImageTensor> reference;
    if (!truth.empty()) reference = read_image(truth);
    const RunArtifacts run = run_imr(frames, cfg);
    write_run(out, run, cfg, reference);
    std::cout << "r1 = " << format_metric(run.enhanced.params.r1) << ", XK iterations = " << run.xk.iterations() << "\n";
    if (reference) {
        std::cout << "final PSNR " << format_metric(psnr(run.x_final(), *reference)) << " dB, SSIM "
                  << format_metric(ssim(run.x_final(), *reference)) << "\n";
    }
    return 0;
}

int baselines(const fs::path& frames_dir, const std::string& truth, const std::string& config, const fs::path& out) {
    const PipelineConfig cfg = config_or_default(config);
    const auto frames = read_series(frames_dir);
    const ImageTensor reference = read_image(truth);
    const BaselineResult r = run_baselines(frames, reference, cfg);
    fs::create_directories(out);
    for (std::size_t i = 0; i < r.table.size(); ++i) {
        write_ptf(out / (r.table[i].name + ".ptf"), r.images[i]);
        write_png(out / (r.table[i].name + ".png"), r.images[i]);
    }
    write_metrics_csv(out / "metrics.csv", r.table);
    write_text(out / "config.txt", config_echo(cfg));
    for (const auto& row : r.table) {
        std::cout << row.name << "  PSNR " << format_metric(row.psnr_db) << "  SSIM " << format_metric(row.ssim) << "\n";
    }
    return 0;
}

int metrics(const std::string& target, const std::string& reference) {
    const QualityReport q = assess(read_image(target), read_image(reference), target, reference);
    std::cout << "psnr " << format_metric(q.psnr_db) << "\nssim " << format_metric(q.ssim) << "\n";
    return 0;
}

int sweep(const fs::path& frames_dir, const std::string& estimate_dir, const std::string& grid, const std::string& truth,
          const std::string& config, const fs::path& out) {
    const PipelineConfig cfg = config_or_default(config);
    std::vector<ImageTensor> x_tilde;
    std::vector<BlurKernel> kernels;
    if (!estimate_dir.empty()) {
        x_tilde = read_series(fs::path(estimate_dir) / "xtilde");
        kernels = read_kernels(fs::path(estimate_dir) / "kernels");
    } else {
        XkResult r = run_xk(read_series(frames_dir), cfg);
        x_tilde = std::move(r.deconvolved);
        kernels = std::move(r.kernels);
    }
    const auto radii = parse_grid(grid);
    const auto rows = sweep_r1(x_tilde, kernels, read_image(truth), radii, cfg);
    std::string text = "r1,psnr_prior,ssim_prior,psnr_no_prior,ssim_no_prior,feasible\n";
    for (const auto& r : rows) {
        text += format_metric(r.r1) + "," + format_metric(r.psnr_prior) + "," + format_metric(r.ssim_prior) + "," +
                format_metric(r.psnr_no_prior) + "," + format_metric(r.ssim_no_prior) + "," + (r.feasible ? "1" : "0") +
                "\n";
    }
    write_text(out, text);
    std::cout << text;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Multi-frame blind manifold deconvolution for rotating-aperture imagery"};
    app.require_subcommand(1);

    std::string source, family = "oriented-line", frames, kernels, config, truth, in, target, reference, estimate_dir;
    std::string out, r1 = "auto", r2 = "auto", grid;
    std::size_t n = 36, s = 25, min_neighbors = 5, size = 64;
    double sigma = 0.05;
    std::uint64_t seed = 0;
    std::optional<std::uint64_t> scene_seed;
    int k = 2;

    auto* sim = app.add_subcommand("simulate", "blur a source image with oriented PSFs and add Gaussian noise");
    sim->add_option("--source", source, "source image (.png or .ptf, values in [0,1])")->required();
    sim->add_option("--n", n, "number of rotation angles");
    sim->add_option("--s", s, "kernel size (odd)");
    sim->add_option("--sigma", sigma, "noise standard deviation");
    sim->add_option("--seed", seed, "noise seed");
    sim->add_option("--family", family, "oriented-line or oriented-sparse");
    sim->add_option("--out", out, "output directory")->required();

    auto* est = app.add_subcommand("estimate", "XK procedure: kernels and per-frame deconvolutions");
    est->add_option("--frames", frames, "directory of frame tensors")->required();
    est->add_option("--config", config, "key=value config file");
    est->add_option("--out", out, "output directory")->required();

    auto* mf = app.add_subcommand("manifold-fit", "project a set of tensors onto their estimated manifold");
    mf->add_option("--in", in, "directory of tensors")->required();
    mf->add_option("--r1", r1, "contraction radius or 'auto'");
    mf->add_option("--r2", r2, "cylinder length or 'auto' (10 r1)");
    mf->add_option("--k", k, "weight exponent (>= 2)");
    mf->add_option("--min-neighbors", min_neighbors, "neighbour count for automatic r1 and warnings");
    mf->add_option("--out", out, "output directory")->required();

    auto* rec = app.add_subcommand("reconstruct", "non-blind multi-frame reconstruction with the gradient prior");
    rec->add_option("--frames", frames, "directory of frame tensors")->required();
    rec->add_option("--kernels", kernels, "directory of kernel tensors")->required();
    rec->add_option("--config", config, "key=value config file");
    rec->add_option("--out", out, "output file (.ptf or .png)")->required();

    auto* all = app.add_subcommand("run-all", "full pipeline: XK, manifold fitting, reconvolution, reconstruction");
    all->add_option("--frames", frames, "directory of frame tensors")->required();
    all->add_option("--config", config, "key=value config file");
    all->add_option("--truth", truth, "optional reference image for metrics.csv");
    all->add_option("--out", out, "output directory")->required();

    auto* base = app.add_subcommand("baselines", "four-way comparison table against a reference");
    base->add_option("--frames", frames, "directory of frame tensors")->required();
    base->add_option("--truth", truth, "reference image")->required();
    base->add_option("--config", config, "key=value config file");
    base->add_option("--out", out, "output directory")->required();

    auto* met = app.add_subcommand("metrics", "PSNR and SSIM of a target against a reference");
    met->add_option("--target", target, "image under test")->required();
    met->add_option("--reference", reference, "reference image")->required();

    auto* sw = app.add_subcommand("sweep-r1", "final-image quality across contraction radii");
    sw->add_option("--frames", frames, "directory of frame tensors");
    sw->add_option("--estimate", estimate_dir, "reuse kernels/ and xtilde/ from an estimate run");
    sw->add_option("--grid", grid, "start:stop:step")->required();
    sw->add_option("--truth", truth, "reference image")->required();
    sw->add_option("--config", config, "key=value config file");
    sw->add_option("--out", out, "output csv")->required();

    auto* syn = app.add_subcommand("synth-target", "write the built-in RGB test scene");
    syn->add_option("--size", size, "edge length in pixels");
    syn->add_option("--scene-seed", scene_seed, "random scene instead of the fixed target");
    syn->add_option("--out", out, "output file (.png or .ptf)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sim) return simulate(source, n, s, sigma, seed, family, out);
        if (*est) return estimate(frames, config, out);
        if (*mf) return manifold_fit(in, r1, r2, k, min_neighbors, out);
        if (*rec) return reconstruct_cmd(frames, kernels, config, out);
        if (*all) return run_all(frames, config, truth, out);
        if (*base) return baselines(frames, truth, config, out);
        if (*met) return metrics(target, reference);
        if (*sw) {
            if (frames.empty() && estimate_dir.empty()) throw ConfigError("sweep-r1 needs --frames or --estimate");
            return sweep(frames, estimate_dir, grid, truth, config, out);
        }
        if (*syn) {
            save_image(out, scene_seed ? random_scene(size, *scene_seed) : synthetic_target(size));
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
