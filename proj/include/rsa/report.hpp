#pragma once

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "rsa/config.hpp"
#include "rsa/io.hpp"
#include "rsa/metrics.hpp"
#include "rsa/pipeline.hpp"
#include "rsa/simulation.hpp"

namespace rsa {

/// Six significant digits, '.' decimal separator, "inf"/"nan" spelled out.
inline std::string format_metric(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

inline std::string metrics_header() {
    const SsimParams p;
    return "# psnr peak=1; ssim gaussian window=" + std::to_string(p.window) + " sigma=" + format_metric(p.sigma) +
           " K1=" + format_metric(p.k1) + " K2=" + format_metric(p.k2) + " L=" + format_metric(p.dynamic_range) +
           "\nname,psnr,ssim\n";
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("failed writing " + path.string());
}

inline void write_metrics_csv(const std::filesystem::path& path, std::span<const MetricRow> rows) {
    std::string text = metrics_header();
    for (const auto& r : rows) text += r.name + "," + format_metric(r.psnr_db) + "," + format_metric(r.ssim) + "\n";
    write_text(path, text);
}

inline std::string indexed_name(const std::string& stem, std::size_t i, const std::string& ext) {
    std::string index = std::to_string(i);
    if (index.size() < 3) index.insert(0, 3 - index.size(), '0');
    return stem + "_" + index + ext;
}

inline void write_series(const std::filesystem::path& dir, const std::string& stem, std::span<const ImageTensor> xs) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < xs.size(); ++i) write_ptf(dir / indexed_name(stem, i, ".ptf"), xs[i]);
}

inline void write_kernels(const std::filesystem::path& dir, std::span<const BlurKernel> ks) {
    std::filesystem::create_directories(dir);
    for (std::size_t i = 0; i < ks.size(); ++i) {
        write_ptf(dir / indexed_name("kernel", i, ".ptf"), kernel_to_tensor(ks[i]));
        write_kernel_png(dir / indexed_name("kernel", i, ".png"), ks[i]);
    }
}

inline std::vector<ImageTensor> read_series(const std::filesystem::path& dir) {
    std::vector<ImageTensor> out;
    for (const auto& p : list_files(dir, ".ptf")) out.push_back(read_ptf(p));
    if (out.empty()) {
        for (const auto& p : list_files(dir, ".png")) out.push_back(read_png(p));
    }
    if (out.empty()) throw IoError("no .ptf or .png tensors in " + dir.string());
    return out;
}

inline std::vector<BlurKernel> read_kernels(const std::filesystem::path& dir) {
    std::vector<BlurKernel> out;
    for (const auto& p : list_files(dir, ".ptf")) out.emplace_back(kernel_from_tensor(read_ptf(p)));
    if (out.empty()) throw IoError("no kernel .ptf files in " + dir.string());
    return out;
}

inline std::string config_echo(const PipelineConfig& cfg) {
    return to_text(cfg) + "# prng = " + SplitMix64::kName + "\n";
}

/// One line per outer iteration: iteration, min cosine similarity, joint objective.
inline std::string xk_log(const XkResult& r) {
    std::string text = "iteration,min_similarity,objective\n";
    for (const auto& e : r.log) {
        text += std::to_string(e.iteration) + "," + format_metric(e.min_similarity) + "," + format_metric(e.objective) + "\n";
    }
    return text;
}

/// Directory tree of a full run: kernels/, xtilde/, xstar/, ytilde/, xhat.ptf,
/// final.ptf (+ clamped final.png), xk_log.csv, config.txt and metrics.csv. With a
/// reference, metrics.csv holds the final image and per-frame x~_i / x*_i rows.
inline void write_run(const std::filesystem::path& out, const RunArtifacts& run, const PipelineConfig& cfg,
                      const std::optional<ImageTensor>& truth) {
    std::filesystem::create_directories(out);
    write_kernels(out / "kernels", run.kernels());
    write_series(out / "xtilde", "xtilde", run.x_tilde());
    write_series(out / "xstar", "xstar", run.x_star());
    write_series(out / "ytilde", "ytilde", run.y_tilde());
    write_ptf(out / "xhat.ptf", run.xk.x_hat);
    write_ptf(out / "final.ptf", run.x_final());
    if (run.x_final().channels() == 1 || run.x_final().channels() == 3) write_png(out / "final.png", run.x_final());
    write_text(out / "xk_log.csv", xk_log(run.xk));
    write_text(out / "config.txt", config_echo(cfg));

    std::vector<MetricRow> rows;
    if (truth) {
        rows.push_back({"final", psnr(run.x_final(), *truth), ssim(run.x_final(), *truth)});
        for (std::size_t i = 0; i < run.x_tilde().size(); ++i) {
            rows.push_back({indexed_name("xtilde", i, ""), psnr(run.x_tilde()[i], *truth), ssim(run.x_tilde()[i], *truth)});
        }
        for (std::size_t i = 0; i < run.x_star().size(); ++i) {
            rows.push_back({indexed_name("xstar", i, ""), psnr(run.x_star()[i], *truth), ssim(run.x_star()[i], *truth)});
        }
    }
    write_metrics_csv(out / "metrics.csv", rows);
}

}  // namespace rsa
