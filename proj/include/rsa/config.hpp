#pragma once

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>

#include "rsa/solvers.hpp"
#include "rsa/tensor.hpp"

namespace rsa {

class ConfigError : public Error {
public:
    using Error::Error;
};

/// Every tuning parameter of the blind deconvolution pipeline.
struct PipelineConfig {
    std::size_t kernel_size = 25;
    double lambda1_joint = 667.0;    // joint multi-frame X-step
    double lambda1_single = 2000.0;  // per-frame deconvolution and final reconstruction
    double mu = 0.04;                // kernel L1 weight
    double alpha = 0.8;
    int outer_iters = 10;            // XK alternations
    double tau = 0.9980;             // kernel cosine-similarity stopping threshold
    std::optional<double> r1;        // nullopt: choose automatically
    std::optional<double> r2;        // nullopt: 10 * r1
    int k_exp = 2;
    std::size_t min_neighbors = 5;
    double kernel_init_sigma = 0.0;  // 0: kernel_size / 6
    HqsSchedule hqs{};
    std::uint64_t seed = 0;

    /// Splitting schedule for a given data weight.
    [[nodiscard]] HqsSchedule schedule(double lambda1) const {
        HqsSchedule s = hqs;
        s.alpha = alpha;
        s.lambda1 = lambda1;
        return s;
    }

    [[nodiscard]] double init_sigma() const {
        return kernel_init_sigma > 0.0 ? kernel_init_sigma : static_cast<double>(kernel_size) / 6.0;
    }

    void validate() const {
        if (kernel_size == 0 || kernel_size % 2 == 0) throw ConfigError("s must be a positive odd integer");
        if (!(lambda1_joint > 0.0) || !(lambda1_single > 0.0)) throw ConfigError("lambda1 values must be positive");
        if (!(mu >= 0.0)) throw ConfigError("mu must be nonnegative");
        if (outer_iters < 1) throw ConfigError("T must be at least 1");
        if (k_exp < 2) throw ConfigError("k must be an integer >= 2");
        if (r1 && !(*r1 > 0.0)) throw ConfigError("r1 must be positive");
        if (r1 && r2 && *r2 < 2.0 * *r1) throw ConfigError("r2 must be at least 2 * r1");
        schedule(lambda1_single).validate();
    }
};

namespace detail {

inline std::string trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return std::string(s.substr(first, last - first + 1));
}

inline double parse_real(const std::string& key, const std::string& value) {
    try {
        std::size_t used = 0;
        const double v = std::stod(value, &used);
        if (used != value.size()) throw ConfigError("");
        return v;
    } catch (const std::exception&) {
        throw ConfigError("config key '" + key + "': expected a number, got '" + value + "'");
    }
}

inline long long parse_integer(const std::string& key, const std::string& value) {
    long long v = 0;
    const auto* end = value.data() + value.size();
    const auto [ptr, ec] = std::from_chars(value.data(), end, v);
    if (ec != std::errc{} || ptr != end) {
        throw ConfigError("config key '" + key + "': expected an integer, got '" + value + "'");
    }
    return v;
}

inline std::optional<double> parse_radius(const std::string& key, const std::string& value) {
    if (value == "auto") return std::nullopt;
    return parse_real(key, value);
}

inline std::string format_real(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

}  // namespace detail

/// Parses flat `key = value` text; `#` starts a comment. Unknown keys are errors.
/// Unspecified keys keep their defaults.
inline PipelineConfig parse_config(std::string_view text) {
    PipelineConfig cfg;
    using Setter = std::function<void(const std::string&, const std::string&)>;
    const std::map<std::string, Setter, std::less<>> setters{
        {"s", [&](auto& k, auto& v) { cfg.kernel_size = static_cast<std::size_t>(detail::parse_integer(k, v)); }},
        {"lambda1_joint", [&](auto& k, auto& v) { cfg.lambda1_joint = detail::parse_real(k, v); }},
        {"lambda1_single", [&](auto& k, auto& v) { cfg.lambda1_single = detail::parse_real(k, v); }},
        {"mu", [&](auto& k, auto& v) { cfg.mu = detail::parse_real(k, v); }},
        {"alpha", [&](auto& k, auto& v) { cfg.alpha = detail::parse_real(k, v); }},
        {"T", [&](auto& k, auto& v) { cfg.outer_iters = static_cast<int>(detail::parse_integer(k, v)); }},
        {"tau", [&](auto& k, auto& v) { cfg.tau = detail::parse_real(k, v); }},
        {"r1", [&](auto& k, auto& v) { cfg.r1 = detail::parse_radius(k, v); }},
        {"r2", [&](auto& k, auto& v) { cfg.r2 = detail::parse_radius(k, v); }},
        {"k_exp", [&](auto& k, auto& v) { cfg.k_exp = static_cast<int>(detail::parse_integer(k, v)); }},
        {"min_neighbors",
         [&](auto& k, auto& v) { cfg.min_neighbors = static_cast<std::size_t>(detail::parse_integer(k, v)); }},
        {"kernel_init_sigma", [&](auto& k, auto& v) { cfg.kernel_init_sigma = detail::parse_real(k, v); }},
        {"beta_init", [&](auto& k, auto& v) { cfg.hqs.beta_init = detail::parse_real(k, v); }},
        {"beta_max", [&](auto& k, auto& v) { cfg.hqs.beta_max = detail::parse_real(k, v); }},
        {"beta_growth", [&](auto& k, auto& v) { cfg.hqs.growth = detail::parse_real(k, v); }},
        {"hqs_iters", [&](auto& k, auto& v) { cfg.hqs.inner_iters = static_cast<int>(detail::parse_integer(k, v)); }},
        {"epsilon", [&](auto& k, auto& v) { cfg.hqs.epsilon = detail::parse_real(k, v); }},
        {"seed", [&](auto& k, auto& v) { cfg.seed = static_cast<std::uint64_t>(detail::parse_integer(k, v)); }},
    };

    std::istringstream in{std::string(text)};
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        const std::string body = detail::trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string::npos) {
            throw ConfigError("config line " + std::to_string(line_no) + ": expected key=value");
        }
        const std::string key = detail::trim(std::string_view(body).substr(0, eq));
        const std::string value = detail::trim(std::string_view(body).substr(eq + 1));
        const auto it = setters.find(key);
        if (it == setters.end()) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        it->second(key, value);
    }
    cfg.validate();
    return cfg;
}

inline PipelineConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return parse_config(buffer.str());
}

/// Round-trippable text form (parse_config(to_text(c)) reproduces c).
inline std::string to_text(const PipelineConfig& cfg) {
    using detail::format_real;
    std::ostringstream os;
    os << "s = " << cfg.kernel_size << "\n"
       << "lambda1_joint = " << format_real(cfg.lambda1_joint) << "\n"
       << "lambda1_single = " << format_real(cfg.lambda1_single) << "\n"
       << "mu = " << format_real(cfg.mu) << "\n"
       << "alpha = " << format_real(cfg.alpha) << "\n"
       << "T = " << cfg.outer_iters << "\n"
       << "tau = " << format_real(cfg.tau) << "\n"
       << "r1 = " << (cfg.r1 ? format_real(*cfg.r1) : "auto") << "\n"
       << "r2 = " << (cfg.r2 ? format_real(*cfg.r2) : "auto") << "\n"
       << "k_exp = " << cfg.k_exp << "\n"
       << "min_neighbors = " << cfg.min_neighbors << "\n"
       << "kernel_init_sigma = " << format_real(cfg.kernel_init_sigma) << "\n"
       << "beta_init = " << format_real(cfg.hqs.beta_init) << "\n"
       << "beta_max = " << format_real(cfg.hqs.beta_max) << "\n"
       << "beta_growth = " << format_real(cfg.hqs.growth) << "\n"
       << "hqs_iters = " << cfg.hqs.inner_iters << "\n"
       << "epsilon = " << format_real(cfg.hqs.epsilon) << "\n"
       << "seed = " << cfg.seed << "\n";
    return os.str();
}

}  // namespace rsa
