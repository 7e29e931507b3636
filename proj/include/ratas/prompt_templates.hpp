#pragma once

#include <map>
#include <string>

#include "ratas/gateway.hpp"

namespace ratas {

/// Prompt assets for the remote backend, one template per task plus a
/// shared system message. Templates interpolate {{placeholder}} variables.
///
/// The built-in set combines instruction, few-shot and chain-of-thought
/// sections; a directory of ctm.txt / csc.txt / ssr.txt / segment.txt
/// (and optional system.txt) overrides it.
struct TemplateSet {
    std::string version = "builtin-1";
    std::string system;
    std::map<TaskKind, std::string> task;

    static TemplateSet builtin();
    static TemplateSet load_dir(const std::string& dir);

    std::string render(TaskKind kind,
                       const std::map<std::string, std::string>& vars) const;
};

} // namespace ratas
