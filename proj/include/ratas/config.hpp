#pragma once

#include <string>
#include <string_view>

#include <json.hpp>

namespace ratas {

enum class BackendKind { Mock, Remote };

const char* backend_name(BackendKind kind);
BackendKind backend_from_name(std::string_view name);

/// Effective run configuration. Layering order (lowest to highest):
/// defaults, environment (RATAS_*), config file, command-line flags.
struct RunConfig {
    BackendKind backend = BackendKind::Mock;
    int depth_cap = 4;
    bool continuous_sp = false;
    bool partial_ok = false;
    int concurrency_limit = 8;
    std::string cache_dir = ".ratas-cache";
    std::string template_set = "default"; // "default" = built-in templates, else a directory

    // Remote backend settings; the key comes from the environment only.
    std::string api_base;
    std::string api_key;
    std::string model;

    void apply_env();
    void apply_json(const nlohmann::json& doc);

    /// Throws ValidationError when bounds are violated.
    void validate() const;

    /// Canonical form, api_key redacted.
    nlohmann::json to_json() const;

    /// Stable content hash of the canonical form.
    std::string config_hash() const;
};

std::string fnv1a_hex(std::string_view data);

} // namespace ratas
