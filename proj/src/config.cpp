#include "xcsf/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace xcsf {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec != std::errc{} || p != end) throw ConfigError("invalid number for '" + key + "': " + v);
    return out;
}

std::uint64_t parse_uint(const std::string& key, const std::string& v) {
    std::uint64_t out = 0;
    const auto* end = v.data() + v.size();
    auto [p, ec] = std::from_chars(v.data(), end, out);
    if (ec == std::errc{} && p == end) return out;
    // Accept integral values written in exponent form, e.g. 1e5.
    const double d = parse_double(key, v);
    if (d < 0 || d != static_cast<double>(static_cast<std::uint64_t>(d)))
        throw ConfigError("invalid non-negative integer for '" + key + "': " + v);
    return static_cast<std::uint64_t>(d);
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "true" || v == "1" || v == "yes") return true;
    if (v == "false" || v == "0" || v == "no") return false;
    throw ConfigError("invalid boolean for '" + key + "': " + v);
}

ImageShape parse_shape(const std::string& key, const std::string& v) {
    ImageShape s;
    std::vector<std::uint64_t> dims;
    std::stringstream ss(v);
    std::string part;
    while (std::getline(ss, part, 'x')) dims.push_back(parse_uint(key, trim(part)));
    if (dims.size() < 2 || dims.size() > 3) throw ConfigError("image_shape must be HxW or HxWxC");
    s.height = dims[0];
    s.width = dims[1];
    s.channels = dims.size() == 3 ? dims[2] : 1;
    if (s.size() == 0) throw ConfigError("image_shape has a zero dimension");
    return s;
}

std::string fmt(double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, p);
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string&)>;

const std::map<std::string, Setter>& setters() {
    static const std::map<std::string, Setter> table = {
        {"N", [](auto& c, auto& k, auto& v) { c.N = parse_uint(k, v); }},
        {"P_init", [](auto& c, auto& k, auto& v) { c.P_init = parse_bool(k, v); }},
        {"epsilon0", [](auto& c, auto& k, auto& v) { c.epsilon0 = parse_double(k, v); }},
        {"beta", [](auto& c, auto& k, auto& v) { c.beta = parse_double(k, v); }},
        {"alpha", [](auto& c, auto& k, auto& v) { c.alpha = parse_double(k, v); }},
        {"nu", [](auto& c, auto& k, auto& v) { c.nu = parse_double(k, v); }},
        {"delta", [](auto& c, auto& k, auto& v) { c.delta = parse_double(k, v); }},
        {"theta_del", [](auto& c, auto& k, auto& v) { c.theta_del = parse_uint(k, v); }},
        {"F_I", [](auto& c, auto& k, auto& v) { c.F_I = parse_double(k, v); }},
        {"epsilon_I", [](auto& c, auto& k, auto& v) { c.epsilon_I = parse_double(k, v); }},
        {"F_R", [](auto& c, auto& k, auto& v) { c.F_R = parse_double(k, v); }},
        {"epsilon_R", [](auto& c, auto& k, auto& v) { c.epsilon_R = parse_double(k, v); }},
        {"theta_EA", [](auto& c, auto& k, auto& v) { c.theta_EA = parse_uint(k, v); }},
        {"lambda", [](auto& c, auto& k, auto& v) { c.lambda = parse_uint(k, v); }},
        {"chi", [](auto& c, auto& k, auto& v) { c.chi = parse_double(k, v); }},
        {"mu_min", [](auto& c, auto& k, auto& v) { c.mu_min = parse_double(k, v); }},
        {"omega", [](auto& c, auto& k, auto& v) { c.omega = parse_double(k, v); }},
        {"h_I", [](auto& c, auto& k, auto& v) { c.h_I = parse_uint(k, v); }},
        {"h_M", [](auto& c, auto& k, auto& v) { c.h_M = parse_uint(k, v); }},
        {"h_max",
         [](auto& c, auto& k, auto& v) {
             c.h_max = (v == "none" || v == "unbounded") ? kUnboundedHidden : parse_uint(k, v);
         }},
        {"connection_mutation",
         [](auto& c, auto& k, auto& v) { c.connection_mutation = parse_bool(k, v); }},
        {"mode",
         [](auto& c, auto&, auto& v) {
             if (v == "xcsf") c.mode = Mode::Xcsf;
             else if (v == "global_ea") c.mode = Mode::GlobalEa;
             else throw ConfigError("mode must be 'xcsf' or 'global_ea', got: " + v);
         }},
        {"stale_limit", [](auto& c, auto& k, auto& v) { c.stale_limit = parse_uint(k, v); }},
        {"match_threshold",
         [](auto& c, auto& k, auto& v) { c.match_threshold = parse_double(k, v); }},
        {"init_sigma", [](auto& c, auto& k, auto& v) { c.init_sigma = parse_double(k, v); }},
        {"cover_sigma", [](auto& c, auto& k, auto& v) { c.cover_sigma = parse_double(k, v); }},
        {"cover_max_attempts",
         [](auto& c, auto& k, auto& v) { c.cover_max_attempts = parse_uint(k, v); }},
        {"seed", [](auto& c, auto& k, auto& v) { c.seed = parse_uint(k, v); }},
        {"trials", [](auto& c, auto& k, auto& v) { c.trials = parse_uint(k, v); }},
        {"checkpoint_interval",
         [](auto& c, auto& k, auto& v) { c.checkpoint_interval = parse_uint(k, v); }},
        {"dataset", [](auto& c, auto&, auto& v) { c.dataset = v; }},
        {"dataset_format",
         [](auto& c, auto&, auto& v) {
             if (v == "auto") c.dataset_format = DataFormat::Auto;
             else if (v == "csv") c.dataset_format = DataFormat::Csv;
             else if (v == "idx") c.dataset_format = DataFormat::Idx;
             else throw ConfigError("dataset_format must be auto, csv or idx, got: " + v);
         }},
        {"has_label_column",
         [](auto& c, auto& k, auto& v) { c.has_label_column = parse_bool(k, v); }},
        {"image_shape",
         [](auto& c, auto& k, auto& v) {
             if (v == "none") c.image_shape.reset();
             else c.image_shape = parse_shape(k, v);
         }},
        {"train_ratio", [](auto& c, auto& k, auto& v) { c.train_ratio = parse_double(k, v); }},
        {"output_dir", [](auto& c, auto&, auto& v) { c.output_dir = v; }},
    };
    return table;
}

}  // namespace

std::string to_string(Mode m) { return m == Mode::Xcsf ? "xcsf" : "global_ea"; }

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char* what) {
        if (!ok) throw ConfigError(std::string("invalid configuration: ") + what);
    };
    require(N >= 1, "N must be at least 1");
    require(epsilon0 > 0, "epsilon0 must be positive");
    require(beta > 0 && beta <= 1, "beta must be in (0, 1]");
    require(alpha > 0 && alpha <= 1, "alpha must be in (0, 1]");
    require(nu > 0, "nu must be positive");
    require(delta >= 0 && delta <= 1, "delta must be in [0, 1]");
    require(F_I > 0 && F_I <= 1, "F_I must be in (0, 1]");
    require(epsilon_I >= 0, "epsilon_I must be non-negative");
    require(F_R > 0 && F_R <= 1, "F_R must be in (0, 1]");
    require(epsilon_R >= 0, "epsilon_R must be non-negative");
    require(lambda >= 1, "lambda must be at least 1");
    require(chi == 0.0, "crossover is not supported; chi must be 0");
    require(mu_min > 0 && mu_min <= 1, "mu_min must be in (0, 1]");
    require(omega >= 0 && omega <= 1, "omega must be in [0, 1]");
    require(h_I >= 1, "h_I must be at least 1");
    require(h_max >= h_I, "h_max must be at least h_I");
    require(match_threshold > 0 && match_threshold < 1, "match_threshold must be in (0, 1)");
    require(init_sigma > 0 && cover_sigma > 0, "sigmas must be positive");
    require(cover_max_attempts >= 1, "cover_max_attempts must be at least 1");
    require(checkpoint_interval >= 1, "checkpoint_interval must be at least 1");
    require(train_ratio > 0 && train_ratio <= 1, "train_ratio must be in (0, 1]");
}

ExperimentConfig parse_config(const std::string& text) {
    ExperimentConfig cfg;
    std::set<std::string> seen;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(lineno) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        const auto value = trim(line.substr(eq + 1));
        const auto it = setters().find(key);
        if (it == setters().end())
            throw ConfigError("line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        if (!seen.insert(key).second)
            throw ConfigError("line " + std::to_string(lineno) + ": repeated key '" + key + "'");
        it->second(cfg, key, value);
    }
    cfg.validate();
    return cfg;
}

ExperimentConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string to_config_text(const ExperimentConfig& c) {
    std::ostringstream os;
    auto b = [](bool v) { return v ? "true" : "false"; };
    os << "N=" << c.N << '\n'
       << "P_init=" << b(c.P_init) << '\n'
       << "epsilon0=" << fmt(c.epsilon0) << '\n'
       << "beta=" << fmt(c.beta) << '\n'
       << "alpha=" << fmt(c.alpha) << '\n'
       << "nu=" << fmt(c.nu) << '\n'
       << "delta=" << fmt(c.delta) << '\n'
       << "theta_del=" << c.theta_del << '\n'
       << "F_I=" << fmt(c.F_I) << '\n'
       << "epsilon_I=" << fmt(c.epsilon_I) << '\n'
       << "F_R=" << fmt(c.F_R) << '\n'
       << "epsilon_R=" << fmt(c.epsilon_R) << '\n'
       << "theta_EA=" << c.theta_EA << '\n'
       << "lambda=" << c.lambda << '\n'
       << "chi=" << fmt(c.chi) << '\n'
       << "mu_min=" << fmt(c.mu_min) << '\n'
       << "omega=" << fmt(c.omega) << '\n'
       << "h_I=" << c.h_I << '\n'
       << "h_M=" << c.h_M << '\n'
       << "h_max=" << (c.h_max == kUnboundedHidden ? std::string("none") : std::to_string(c.h_max))
       << '\n'
       << "connection_mutation=" << b(c.connection_mutation) << '\n'
       << "mode=" << to_string(c.mode) << '\n'
       << "stale_limit=" << c.stale_limit << '\n'
       << "match_threshold=" << fmt(c.match_threshold) << '\n'
       << "init_sigma=" << fmt(c.init_sigma) << '\n'
       << "cover_sigma=" << fmt(c.cover_sigma) << '\n'
       << "cover_max_attempts=" << c.cover_max_attempts << '\n'
       << "seed=" << c.seed << '\n'
       << "trials=" << c.trials << '\n'
       << "checkpoint_interval=" << c.checkpoint_interval << '\n'
       << "dataset=" << c.dataset << '\n'
       << "dataset_format="
       << (c.dataset_format == DataFormat::Auto  ? "auto"
           : c.dataset_format == DataFormat::Csv ? "csv"
                                                 : "idx")
       << '\n'
       << "has_label_column=" << b(c.has_label_column) << '\n';
    if (c.image_shape)
        os << "image_shape=" << c.image_shape->height << 'x' << c.image_shape->width << 'x'
           << c.image_shape->channels << '\n';
    os << "train_ratio=" << fmt(c.train_ratio) << '\n' << "output_dir=" << c.output_dir << '\n';
    return os.str();
}

}  // namespace xcsf
