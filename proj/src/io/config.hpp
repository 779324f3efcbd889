// Copyright Contributors to the nvstream project
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "common/error.hpp"
#include "scene/framebuffer.hpp"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <string>

namespace nvs {

// Engine configuration: one JSON document with namespaced keys
// (input.*, pipeline.*, stages.*, poses.*, latency.*, serve.*, scene.*,
// synth.*, bench.*). Keys are addressed with dots, e.g. "stages.sr.impl".
// Unknown keys are rejected except below stages.<name>.*, which is left open
// for stage-specific settings.
class Config {
public:
    Config();

    static Config from_file(const std::filesystem::path &path);
    static Config from_text(const std::string &text, const std::string &source);

    // Merges a JSON object over the current values.
    void merge(const nlohmann::json &overrides, const std::string &source);

    void set(const std::string &key, nlohmann::json value, const std::string &source = "override");
    // `value` is parsed as JSON when possible, otherwise taken as a string.
    void set_from_string(const std::string &key, const std::string &value,
                         const std::string &source = "command line");

    bool has(const std::string &key) const;
    const nlohmann::json &at(const std::string &key) const;

    template <typename T> T get(const std::string &key) const {
        const auto &node = at(key);
        try {
            return node.get<T>();
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError("config key '" + key + "' (" + origin(key) +
                              ") has the wrong type: " + e.what());
        }
    }

    // Where a key's current value came from: "default", "<file>:<line>" or
    // the override source.
    std::string origin(const std::string &key) const;

    const nlohmann::json &json() const { return root_; }

private:
    void merge_node(const nlohmann::json &src, const std::string &prefix, const std::string &source,
                    const std::string *text);

    nlohmann::json root_;
    std::map<std::string, std::string> origins_;
};

// "WxH" -> Resolution; throws ConfigError naming `key`.
Resolution parse_resolution(const std::string &text, const std::string &key = "resolution");
std::string format_resolution(Resolution r);

} // namespace nvs
