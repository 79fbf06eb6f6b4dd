#pragma once

#include <string>
#include <string_view>

namespace udt {

/// Minimal tag-level HTML to text conversion for L0 archival:
/// script/style/comment content removed, tags stripped, block-level tags
/// (p, div, br, li, h1-h6, tr) become line breaks, entities decoded,
/// per-line whitespace trimmed, blank lines dropped. Tolerates malformed
/// markup; boilerplate judgment is deliberately NOT done here.
std::string extract_text(std::string_view html);

/// Decodes numeric character references and the common named entities.
/// Unknown names pass through verbatim.
std::string decode_entities(std::string_view s);

}  // namespace udt
