#pragma once

#include <filesystem>
#include <vector>

#include "udt/filter.hpp"

namespace udt {

/// Built-in en/zh trigram profiles trained on small embedded seed corpora.
std::vector<LangProfile> builtin_lang_profiles();

/// Loads profiles from every *.json file in `dir`:
/// {"lang": code, "text": seed corpus} or {"lang": code, "trigram_freqs": {...}}.
std::vector<LangProfile> load_lang_profiles(const std::filesystem::path& dir);

}  // namespace udt
