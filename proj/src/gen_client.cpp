#include "udt/gen_client.hpp"

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <fstream>

#include "udt/error.hpp"

namespace udt {

std::string_view task_kind_name(TaskKind k) {
    switch (k) {
        case TaskKind::edit: return "edit";
        case TaskKind::qa_stratified: return "qa_stratified";
        case TaskKind::dialogue: return "dialogue";
        case TaskKind::style_rewrite: return "style_rewrite";
        case TaskKind::textbook_module: return "textbook_module";
        case TaskKind::persona: return "persona";
    }
    return "edit";
}

std::optional<TaskKind> task_kind_from_name(std::string_view name) {
    if (name == "edit") return TaskKind::edit;
    if (name == "qa_stratified" || name == "qa") return TaskKind::qa_stratified;
    if (name == "dialogue") return TaskKind::dialogue;
    if (name == "style_rewrite" || name == "style") return TaskKind::style_rewrite;
    if (name == "textbook_module" || name == "textbook") return TaskKind::textbook_module;
    if (name == "persona") return TaskKind::persona;
    return std::nullopt;
}

std::vector<TaskKind> all_task_kinds() {
    return {TaskKind::edit,          TaskKind::qa_stratified,   TaskKind::dialogue,
            TaskKind::style_rewrite, TaskKind::textbook_module, TaskKind::persona};
}

std::string_view rewrite_style_name(RewriteStyle s) {
    switch (s) {
        case RewriteStyle::wikipedia: return "wikipedia";
        case RewriteStyle::blog: return "blog";
        case RewriteStyle::academic: return "academic";
    }
    return "wikipedia";
}

std::string_view grade_level_name(GradeLevel l) {
    switch (l) {
        case GradeLevel::primary: return "primary";
        case GradeLevel::middle: return "middle";
        case GradeLevel::high: return "high";
        case GradeLevel::undergraduate: return "undergraduate";
    }
    return "primary";
}

static constexpr std::string_view kExcerptBegin = "---BEGIN SOURCE---\n";
static constexpr std::string_view kExcerptEnd = "\n---END SOURCE---";

std::string prompt_seed_excerpt(const std::string& prompt) {
    size_t begin = prompt.find(kExcerptBegin);
    if (begin == std::string::npos) {
        return prompt;
    }
    begin += kExcerptBegin.size();
    size_t end = prompt.find(kExcerptEnd, begin);
    if (end == std::string::npos) {
        return prompt.substr(begin);
    }
    return prompt.substr(begin, end - begin);
}

MockClient MockClient::from_script_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open mock script: " + path.string());
    }
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        throw ConfigError("malformed mock script: " + path.string());
    }
    MockClient mock;
    if (j.contains("default")) {
        mock.set_default(j["default"].get<std::string>());
    }
    if (j.contains("kind_defaults")) {
        for (const auto& [kind_name, text] : j["kind_defaults"].items()) {
            auto kind = task_kind_from_name(kind_name);
            if (!kind) {
                throw ConfigError("mock script: unknown kind " + kind_name);
            }
            mock.set_kind_default(*kind, text.get<std::string>());
        }
    }
    if (j.contains("rules")) {
        for (const auto& rule : j["rules"]) {
            auto kind = task_kind_from_name(rule.at("kind").get<std::string>());
            if (!kind) {
                throw ConfigError("mock script: unknown kind in rule");
            }
            std::string seed_id = rule.at("seed_id").get<std::string>();
            if (rule.contains("fail")) {
                mock.add_failure_rule(*kind, std::move(seed_id),
                                      rule["fail"].get<std::string>());
            } else {
                mock.add_rule(*kind, std::move(seed_id), rule.at("text").get<std::string>());
            }
        }
    }
    return mock;
}

void MockClient::set_kind_default(TaskKind kind, std::string text) {
    kind_defaults_[kind] = std::move(text);
}

void MockClient::add_rule(TaskKind kind, std::string seed_id, std::string text) {
    rules_[{kind, std::move(seed_id)}] = Rule{std::move(text), ""};
}

void MockClient::add_failure_rule(TaskKind kind, std::string seed_id, std::string error) {
    rules_[{kind, std::move(seed_id)}] = Rule{"", std::move(error)};
}

GenerationResult MockClient::generate(const RefinementRequest& request) {
    if (transient_failures_ > 0) {
        --transient_failures_;
        return {false, "", "mock transient failure"};
    }
    auto it = rules_.find({request.kind, request.seed_id});
    if (it != rules_.end()) {
        if (!it->second.error.empty()) {
            return {false, "", it->second.error};
        }
        return {true, it->second.text, ""};
    }
    auto kd = kind_defaults_.find(request.kind);
    if (kd != kind_defaults_.end()) {
        return {true, kd->second, ""};
    }
    if (default_text_) {
        return {true, *default_text_, ""};
    }
    if (identity_) {
        return {true, prompt_seed_excerpt(request.prompt), ""};
    }
    return {false, "", "mock: no rule for task"};
}

HttpGenerationClient::HttpGenerationClient(std::string base_url, std::string path,
                                           std::string auth_token)
    : base_url_(std::move(base_url)), path_(std::move(path)), auth_token_(std::move(auth_token)) {}

GenerationResult HttpGenerationClient::generate(const RefinementRequest& request) {
    httplib::Client client(base_url_);
    client.set_connection_timeout(10);
    client.set_read_timeout(60);
    if (!auth_token_.empty()) {
        client.set_bearer_token_auth(auth_token_);
    }
    nlohmann::ordered_json body;
    body["prompt"] = request.prompt;
    body["max_chars"] = request.max_output_chars;
    body["kind"] = task_kind_name(request.kind);
    auto res = client.Post(path_, body.dump(), "application/json");
    if (!res) {
        return {false, "", "transport error: " + httplib::to_string(res.error())};
    }
    if (res->status != 200) {
        return {false, "", "endpoint returned HTTP " + std::to_string(res->status)};
    }
    nlohmann::json j = nlohmann::json::parse(res->body, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
        return {false, "", "endpoint returned malformed JSON"};
    }
    if (j.contains("error")) {
        return {false, "", j["error"].get<std::string>()};
    }
    if (!j.contains("text") || !j["text"].is_string()) {
        return {false, "", "endpoint response lacks \"text\""};
    }
    return {true, j["text"].get<std::string>(), ""};
}

}  // namespace udt
