#include "ratas/prompt_templates.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "ratas/errors.hpp"

namespace ratas {

namespace {

const char* kSystem =
    "You are a precise grading assistant. Always respond with a single valid "
    "JSON object and nothing else.";

const char* kCtm = R"(You decompose grading criteria into simpler rules.

Instructions:
- Split the criterion into the smallest set of simpler rules such that:
  1. the simpler rules together fully reconstruct the original criterion;
  2. they cover distinct, non-overlapping aspects;
  3. they carry approximately equal scoring importance.
- If the criterion is already atomic, return it unchanged as the only rule.
- Reason step by step about where the criterion separates into independent
  requirements, then output only the final JSON object.

Example:
Criterion: "The essay must describe the water cycle and name two climate feedback loops."
Output: {"rules": ["The essay must describe the water cycle", "The essay must name two climate feedback loops."]}

Example:
Criterion: "Define recursion."
Output: {"rules": ["Define recursion."]}

Criterion: "{{criteria}}"

Respond with JSON of the form {"rules": [string, ...]}.)";

const char* kCsc = R"(You distribute a parent rule's quality levels over its child rules.

Instructions:
- Assign every parent sub-condition to at least one child rule, choosing the
  child whose subject matter it describes.
- Copy each assigned sub-condition verbatim: the "quality" text and "score"
  number must be unchanged.
- The output must contain exactly one array per child rule, in order.
- Reason step by step about which child each sub-condition concerns, then
  output only the final JSON object.

Example:
Child rules: ["The essay must describe the water cycle", "The essay must name two climate feedback loops."]
Parent sub-conditions: [{"quality": "Names two feedback loops with mechanisms", "score": 1.0}]
Output: {"assignments": [[], [{"quality": "Names two feedback loops with mechanisms", "score": 1.0}]]}

Child rules: {{child_rules}}
Parent sub-conditions: {{subconditions}}

Respond with JSON of the form {"assignments": [[{"quality": string, "score": number}, ...], ...]}.)";

const char* kSsr = R"(You judge whether an answer segment fulfils one atomic grading rule.

Instructions:
- Decide whether the rule is met. fulfilled is {{fulfilled_domain}}.
- When the rule is met and quality levels are listed, set matched_level to the
  0-based index of the best-matching level and lqap to how closely the answer
  aligns with that level (0 to 1). Otherwise matched_level is null.
- When the rule is not met, fulfilled is 0 and lqap is 0.
- related_content must be a verbatim excerpt of the answer segment that shows
  the evidence, or "" when there is none.
- reason must be one or two sentences explaining the decision.
- Reason step by step: restate the rule, find the evidence, compare it to the
  levels, then output only the final JSON object.

Example:
Rule: "The essay must name two climate feedback loops."
Answer segment: "Ice albedo loss and permafrost methane release reinforce warming."
Levels: [{"quality": "Names two feedback loops with mechanisms", "score": 1.0}]
Output: {"fulfilled": 1, "matched_level": 0, "lqap": 1.0, "related_content": "Ice albedo loss and permafrost methane release reinforce warming.", "reason": "Two feedback loops are named with their reinforcing mechanisms."}

Rule: "{{criteria}}"
Answer segment: "{{answer_segment}}"
Levels: {{subconditions}}

Respond with JSON of the form {"fulfilled": number, "matched_level": int|null, "lqap": number, "related_content": string, "reason": string}.)";

const char* kSegment = R"(You extract the part of an answer relevant to one rubric rule.

Instructions:
- Return the contiguous portion (or concatenated portions) of the answer that
  addresses the rule, copied verbatim.
- Return the whole answer when it is short or the rule spans all of it.
- Return "" when nothing in the answer relates to the rule.
- Reason step by step about which passages mention the rule's subject, then
  output only the final JSON object.

Rule: "{{row_rule}}"
Answer:
{{answer}}

Respond with JSON of the form {"segment": string}.)";

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ParseError("cannot open template file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

} // namespace

TemplateSet TemplateSet::builtin() {
    TemplateSet set;
    set.version = "builtin-1";
    set.system = kSystem;
    set.task[TaskKind::Ctm] = kCtm;
    set.task[TaskKind::Csc] = kCsc;
    set.task[TaskKind::Ssr] = kSsr;
    set.task[TaskKind::Segment] = kSegment;
    return set;
}

TemplateSet TemplateSet::load_dir(const std::string& dir) {
    namespace fs = std::filesystem;
    fs::path base(dir);
    if (!fs::is_directory(base)) {
        throw ParseError("template set directory not found: " + dir);
    }
    TemplateSet set = builtin();
    set.version = "dir:" + base.filename().string();
    if (fs::exists(base / "system.txt")) set.system = read_file(base / "system.txt");
    const std::pair<TaskKind, const char*> files[] = {
        {TaskKind::Ctm, "ctm.txt"},
        {TaskKind::Csc, "csc.txt"},
        {TaskKind::Ssr, "ssr.txt"},
        {TaskKind::Segment, "segment.txt"},
    };
    for (const auto& [kind, name] : files) {
        if (fs::exists(base / name)) set.task[kind] = read_file(base / name);
    }
    return set;
}

std::string TemplateSet::render(TaskKind kind,
                                const std::map<std::string, std::string>& vars) const {
    auto it = task.find(kind);
    if (it == task.end()) {
        throw InvariantError(std::string("no template for task ") + task_name(kind));
    }
    std::string out = it->second;
    for (const auto& [key, value] : vars) {
        const std::string placeholder = "{{" + key + "}}";
        std::size_t pos = 0;
        while ((pos = out.find(placeholder, pos)) != std::string::npos) {
            out.replace(pos, placeholder.size(), value);
            pos += value.size();
        }
    }
    return out;
}

} // namespace ratas
