#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace udt {

enum class TaskKind {
    edit,
    qa_stratified,
    dialogue,
    style_rewrite,
    textbook_module,
    persona,
};

std::string_view task_kind_name(TaskKind k);
std::optional<TaskKind> task_kind_from_name(std::string_view name);
std::vector<TaskKind> all_task_kinds();

enum class RewriteStyle { wikipedia, blog, academic };
enum class GradeLevel { primary, middle, high, undergraduate };

std::string_view rewrite_style_name(RewriteStyle s);
std::string_view grade_level_name(GradeLevel l);

/// A planned generation task over one seed record.
struct RefinementRequest {
    std::string seed_id;
    TaskKind kind = TaskKind::edit;
    std::string prompt;  // instantiated template
    std::optional<RewriteStyle> style;     // style_rewrite only
    std::optional<GradeLevel> level;       // qa_stratified only
    std::optional<int> persona_pair;       // dialogue/persona only, 0..6
    uint64_t max_output_chars = 4000;
};

struct GenerationResult {
    bool ok = false;
    std::string text;   // when ok
    std::string error;  // when !ok
};

/// Pluggable generation backend. Implementations must be safe to call from
/// multiple workers.
class GenerationClient {
public:
    virtual ~GenerationClient() = default;
    virtual GenerationResult generate(const RefinementRequest& request) = 0;
};

/// Deterministic scriptable mock. Resolution order: (kind, seed_id) rule,
/// then kind default, then global default, then seed-excerpt echo.
class MockClient : public GenerationClient {
public:
    MockClient() = default;

    /// Loads a script file: {"default": str?, "kind_defaults": {kind: str}?,
    ///  "rules": [{"kind": str, "seed_id": str, "text": str | "fail": str}]}.
    static MockClient from_script_file(const std::filesystem::path& path);

    void set_default(std::string text) { default_text_ = std::move(text); }
    void set_kind_default(TaskKind kind, std::string text);
    void add_rule(TaskKind kind, std::string seed_id, std::string text);
    void add_failure_rule(TaskKind kind, std::string seed_id, std::string error);
    /// Echo mode: reply with the excerpt embedded in the prompt.
    void set_identity(bool on) { identity_ = on; }
    /// Fails every call `n` times before succeeding (retry testing).
    void set_transient_failures(int n) { transient_failures_ = n; }

    GenerationResult generate(const RefinementRequest& request) override;

private:
    struct Rule {
        std::string text;
        std::string error;  // nonempty = scripted failure
    };
    std::map<std::pair<TaskKind, std::string>, Rule> rules_;
    std::map<TaskKind, std::string> kind_defaults_;
    std::optional<std::string> default_text_;
    bool identity_ = true;
    int transient_failures_ = 0;
};

/// JSON-over-HTTP client. POSTs {"prompt","max_chars","kind"} and expects
/// {"text"} or {"error"}. Auth token (when set) is sent as a bearer header;
/// the CLI sources it from UDT_GEN_TOKEN.
class HttpGenerationClient : public GenerationClient {
public:
    HttpGenerationClient(std::string base_url, std::string path = "/generate",
                         std::string auth_token = "");

    GenerationResult generate(const RefinementRequest& request) override;

private:
    std::string base_url_;
    std::string path_;
    std::string auth_token_;
};

/// Extracts the seed excerpt between the prompt's excerpt markers; used by
/// the mock's identity mode. Returns the whole prompt if markers are absent.
std::string prompt_seed_excerpt(const std::string& prompt);

}  // namespace udt
