// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#include "io/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace nvs {

namespace {

const char *kDefaults = R"({
  "input":    { "fps": 30.0, "views": [0, 1], "root": "" },
  "pipeline": { "resolution": "128x96", "targets": [], "trailing": "drop",
                "live": false, "pipelined": true, "threads": 0 },
  "stages": {
    "spatial": { "impl": "oracle", "depth": 0.0, "footprint": 0.5, "opacity": 0.8,
                 "endpoint": "" },
    "inter":   { "impl": "blend", "endpoint": "" },
    "sr":      { "impl": "bicubic", "endpoint": "" }
  },
  "poses":    { "source": "file", "file": "" },
  "latency":  { "budget_ms": 1000.0 },
  "serve":    { "host": "127.0.0.1", "port": 7878, "stats_hz": 1.0, "loop": true,
                "max_clients": 0 },
  "scene":    { "sh_degree": 1, "background": [0.0, 0.0, 0.0] },
  "synth":    { "seed": 7, "gaussians": 128, "frames": 50, "cameras": 8, "radius": 4.0,
                "arc_deg": 180.0, "focal": 0.8, "velocity": 0.004, "amplitude": 0.02,
                "frequency": 0.1, "target_deg": 0.0, "extent": 1.0 },
  "bench":    { "resolutions": ["128x96", "256x192", "512x384"], "frames": 21 },
  "metrics":  { "lambda_mse": 1.0, "lambda_perceptual": 0.0, "perceptual": "none",
                "tau_deg": 5.0 }
})";

std::vector<std::string> split_key(const std::string &key) {
    std::vector<std::string> parts;
    std::stringstream ss(key);
    std::string part;
    while (std::getline(ss, part, '.')) {
        if (part.empty())
            throw ConfigError("malformed config key '" + key + "'");
        parts.push_back(part);
    }
    if (parts.empty())
        throw ConfigError("empty config key");
    return parts;
}

bool open_namespace(const std::string &key) {
    // stages.<name>.<anything>
    return key.rfind("stages.", 0) == 0 && std::count(key.begin(), key.end(), '.') >= 2;
}

// 1-based line of the first `"leaf"` key at or after the parent's position.
std::string locate(const std::string &text, const std::string &dotted) {
    std::size_t pos = 0;
    for (const auto &part : split_key(dotted)) {
        const auto hit = text.find('"' + part + '"', pos);
        if (hit == std::string::npos)
            return {};
        pos = hit + 1;
    }
    return std::to_string(std::count(text.begin(), text.begin() + static_cast<long>(pos), '\n') + 1);
}

} // namespace

Config::Config() { root_ = nlohmann::json::parse(kDefaults); }

Config Config::from_text(const std::string &text, const std::string &source) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        const auto upto = std::min<std::size_t>(e.byte, text.size());
        const auto line = std::count(text.begin(), text.begin() + static_cast<long>(upto), '\n') + 1;
        throw ConfigError(source + ":" + std::to_string(line) + ": parse error: " + e.what());
    }
    if (!doc.is_object())
        throw ConfigError(source + ": top level must be an object");
    Config cfg;
    cfg.merge_node(doc, "", source, &text);
    return cfg;
}

Config Config::from_file(const std::filesystem::path &path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot read config file " + path.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return from_text(ss.str(), path.string());
}

void Config::merge(const nlohmann::json &overrides, const std::string &source) {
    if (!overrides.is_object())
        throw ConfigError(source + ": overrides must be an object");
    merge_node(overrides, "", source, nullptr);
}

void Config::merge_node(const nlohmann::json &src, const std::string &prefix,
                        const std::string &source, const std::string *text) {
    for (auto it = src.begin(); it != src.end(); ++it) {
        const std::string key = prefix.empty() ? it.key() : prefix + "." + it.key();
        if (it.value().is_object() && (has(key) ? at(key).is_object() : open_namespace(key))) {
            merge_node(it.value(), key, source, text);
            continue;
        }
        std::string where = source;
        if (text) {
            const auto line = locate(*text, key);
            if (!line.empty())
                where += ":" + line;
        }
        set(key, it.value(), where);
    }
}

void Config::set(const std::string &key, nlohmann::json value, const std::string &source) {
    const auto parts = split_key(key);
    if (!has(key) && !open_namespace(key))
        throw ConfigError("unknown config key '" + key + "' (" + source + ")");
    nlohmann::json *node = &root_;
    for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
        node = &(*node)[parts[i]];
        if (!node->is_object() && !node->is_null())
            throw ConfigError("config key '" + key + "' (" + source + ") descends into a value");
    }
    auto &slot = (*node)[parts.back()];
    // Keep numeric defaults numeric even when overridden with an integer.
    if (!slot.is_null() && slot.is_number() != value.is_number() && !slot.is_object())
        throw ConfigError("config key '" + key + "' (" + source + ") expects " +
                          std::string(slot.type_name()) + ", got " + value.type_name());
    slot = std::move(value);
    origins_[key] = source;
}

void Config::set_from_string(const std::string &key, const std::string &value,
                             const std::string &source) {
    nlohmann::json parsed = nlohmann::json::parse(value, nullptr, false);
    if (parsed.is_discarded())
        parsed = value;
    set(key, std::move(parsed), source);
}

bool Config::has(const std::string &key) const {
    const nlohmann::json *node = &root_;
    for (const auto &part : split_key(key)) {
        if (!node->is_object() || !node->contains(part))
            return false;
        node = &(*node)[part];
    }
    return true;
}

const nlohmann::json &Config::at(const std::string &key) const {
    const nlohmann::json *node = &root_;
    for (const auto &part : split_key(key)) {
        if (!node->is_object() || !node->contains(part))
            throw ConfigError("missing config key '" + key + "'");
        node = &(*node)[part];
    }
    return *node;
}

std::string Config::origin(const std::string &key) const {
    const auto it = origins_.find(key);
    return it == origins_.end() ? "default" : it->second;
}

Resolution parse_resolution(const std::string &text, const std::string &key) {
    const auto x = text.find_first_of("xX");
    Resolution r;
    try {
        if (x == std::string::npos)
            throw std::invalid_argument("no separator");
        std::size_t used = 0;
        r.width = std::stoi(text.substr(0, x), &used);
        if (used != x)
            throw std::invalid_argument("trailing characters");
        const auto rest = text.substr(x + 1);
        r.height = std::stoi(rest, &used);
        if (used != rest.size())
            throw std::invalid_argument("trailing characters");
    } catch (const std::exception &) {
        throw ConfigError(key + ": expected WIDTHxHEIGHT, got '" + text + "'");
    }
    if (r.width < 1 || r.height < 1 || r.width > 65535 || r.height > 65535)
        throw ConfigError(key + ": dimensions out of range in '" + text + "'");
    return r;
}

std::string format_resolution(Resolution r) {
    return std::to_string(r.width) + "x" + std::to_string(r.height);
}

} // namespace nvs
