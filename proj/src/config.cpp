#include "ratas/config.hpp"

#include <cstdint>
#include <cstdio>
#include <cstdlib>

#include "ratas/errors.hpp"

namespace ratas {

const char* backend_name(BackendKind kind) {
    return kind == BackendKind::Mock ? "mock" : "remote";
}

BackendKind backend_from_name(std::string_view name) {
    if (name == "mock") return BackendKind::Mock;
    if (name == "remote") return BackendKind::Remote;
    throw ValidationError("unknown backend '" + std::string(name) +
                          "' (expected mock or remote)");
}

void RunConfig::apply_env() {
    auto get = [](const char* name) -> const char* { return std::getenv(name); };
    if (const char* v = get("RATAS_BACKEND")) backend = backend_from_name(v);
    if (const char* v = get("RATAS_CACHE_DIR")) cache_dir = v;
    if (const char* v = get("RATAS_TEMPLATES")) template_set = v;
    if (const char* v = get("RATAS_API_BASE")) api_base = v;
    if (const char* v = get("RATAS_API_KEY")) api_key = v;
    if (const char* v = get("RATAS_MODEL")) model = v;
}

void RunConfig::apply_json(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ParseError("config: document is not an object");
    for (auto it = doc.begin(); it != doc.end(); ++it) {
        const std::string& key = it.key();
        try {
            if (key == "backend") backend = backend_from_name(it->get<std::string>());
            else if (key == "depth_cap") depth_cap = it->get<int>();
            else if (key == "continuous_sp") continuous_sp = it->get<bool>();
            else if (key == "partial_ok") partial_ok = it->get<bool>();
            else if (key == "concurrency_limit") concurrency_limit = it->get<int>();
            else if (key == "cache_dir") cache_dir = it->get<std::string>();
            else if (key == "template_set") template_set = it->get<std::string>();
            else if (key == "api_base") api_base = it->get<std::string>();
            else if (key == "model") model = it->get<std::string>();
            else throw ParseError("config: unknown field '" + key + "'");
        } catch (const nlohmann::json::exception& e) {
            throw ParseError("config." + key + ": " + e.what());
        }
    }
}

void RunConfig::validate() const {
    if (depth_cap < 1) throw ValidationError("depth_cap must be >= 1");
    if (concurrency_limit < 1) throw ValidationError("concurrency_limit must be >= 1");
}

nlohmann::json RunConfig::to_json() const {
    return {{"backend", backend_name(backend)},
            {"depth_cap", depth_cap},
            {"continuous_sp", continuous_sp},
            {"partial_ok", partial_ok},
            {"concurrency_limit", concurrency_limit},
            {"cache_dir", cache_dir},
            {"template_set", template_set},
            {"api_base", api_base},
            {"model", model}};
}

std::string RunConfig::config_hash() const {
    // Only fields that change grading semantics; paths and concurrency do not.
    nlohmann::json semantic = {{"backend", backend_name(backend)},
                               {"depth_cap", depth_cap},
                               {"continuous_sp", continuous_sp},
                               {"partial_ok", partial_ok},
                               {"template_set", template_set},
                               {"api_base", api_base},
                               {"model", model}};
    return fnv1a_hex(semantic.dump());
}

std::string fnv1a_hex(std::string_view data) {
    std::uint64_t hash = 14695981039346656037ULL;
    for (unsigned char byte : data) {
        hash ^= byte;
        hash *= 1099511628211ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
    return buf;
}

} // namespace ratas
