#include "udt/html_text.hpp"

#include <algorithm>
#include <cctype>
#include <unordered_map>
#include <vector>

#include "udt/unicode.hpp"

namespace udt {

namespace {

// HTML4 named entities (Latin-1, Greek, punctuation, math) plus the HTML5
// apostrophe. Unknown names are passed through verbatim.
const std::unordered_map<std::string_view, uint32_t>& entity_table() {
    static const std::unordered_map<std::string_view, uint32_t> table = {
        {"quot", 0x22},    {"amp", 0x26},     {"apos", 0x27},    {"lt", 0x3C},
        {"gt", 0x3E},      {"nbsp", 0xA0},    {"iexcl", 0xA1},   {"cent", 0xA2},
        {"pound", 0xA3},   {"curren", 0xA4},  {"yen", 0xA5},     {"brvbar", 0xA6},
        {"sect", 0xA7},    {"uml", 0xA8},     {"copy", 0xA9},    {"ordf", 0xAA},
        {"laquo", 0xAB},   {"not", 0xAC},     {"shy", 0xAD},     {"reg", 0xAE},
        {"macr", 0xAF},    {"deg", 0xB0},     {"plusmn", 0xB1},  {"sup2", 0xB2},
        {"sup3", 0xB3},    {"acute", 0xB4},   {"micro", 0xB5},   {"para", 0xB6},
        {"middot", 0xB7},  {"cedil", 0xB8},   {"sup1", 0xB9},    {"ordm", 0xBA},
        {"raquo", 0xBB},   {"frac14", 0xBC},  {"frac12", 0xBD},  {"frac34", 0xBE},
        {"iquest", 0xBF},  {"Agrave", 0xC0},  {"Aacute", 0xC1},  {"Acirc", 0xC2},
        {"Atilde", 0xC3},  {"Auml", 0xC4},    {"Aring", 0xC5},   {"AElig", 0xC6},
        {"Ccedil", 0xC7},  {"Egrave", 0xC8},  {"Eacute", 0xC9},  {"Ecirc", 0xCA},
        {"Euml", 0xCB},    {"Igrave", 0xCC},  {"Iacute", 0xCD},  {"Icirc", 0xCE},
        {"Iuml", 0xCF},    {"ETH", 0xD0},     {"Ntilde", 0xD1},  {"Ograve", 0xD2},
        {"Oacute", 0xD3},  {"Ocirc", 0xD4},   {"Otilde", 0xD5},  {"Ouml", 0xD6},
        {"times", 0xD7},   {"Oslash", 0xD8},  {"Ugrave", 0xD9},  {"Uacute", 0xDA},
        {"Ucirc", 0xDB},   {"Uuml", 0xDC},    {"Yacute", 0xDD},  {"THORN", 0xDE},
        {"szlig", 0xDF},   {"agrave", 0xE0},  {"aacute", 0xE1},  {"acirc", 0xE2},
        {"atilde", 0xE3},  {"auml", 0xE4},    {"aring", 0xE5},   {"aelig", 0xE6},
        {"ccedil", 0xE7},  {"egrave", 0xE8},  {"eacute", 0xE9},  {"ecirc", 0xEA},
        {"euml", 0xEB},    {"igrave", 0xEC},  {"iacute", 0xED},  {"icirc", 0xEE},
        {"iuml", 0xEF},    {"eth", 0xF0},     {"ntilde", 0xF1},  {"ograve", 0xF2},
        {"oacute", 0xF3},  {"ocirc", 0xF4},   {"otilde", 0xF5},  {"ouml", 0xF6},
        {"divide", 0xF7},  {"oslash", 0xF8},  {"ugrave", 0xF9},  {"uacute", 0xFA},
        {"ucirc", 0xFB},   {"uuml", 0xFC},    {"yacute", 0xFD},  {"thorn", 0xFE},
        {"yuml", 0xFF},    {"OElig", 0x152},  {"oelig", 0x153},  {"Scaron", 0x160},
        {"scaron", 0x161}, {"Yuml", 0x178},   {"fnof", 0x192},   {"circ", 0x2C6},
        {"tilde", 0x2DC},  {"Alpha", 0x391},  {"Beta", 0x392},   {"Gamma", 0x393},
        {"Delta", 0x394},  {"Epsilon", 0x395},{"Zeta", 0x396},   {"Eta", 0x397},
        {"Theta", 0x398},  {"Iota", 0x399},   {"Kappa", 0x39A},  {"Lambda", 0x39B},
        {"Mu", 0x39C},     {"Nu", 0x39D},     {"Xi", 0x39E},     {"Omicron", 0x39F},
        {"Pi", 0x3A0},     {"Rho", 0x3A1},    {"Sigma", 0x3A3},  {"Tau", 0x3A4},
        {"Upsilon", 0x3A5},{"Phi", 0x3A6},    {"Chi", 0x3A7},    {"Psi", 0x3A8},
        {"Omega", 0x3A9},  {"alpha", 0x3B1},  {"beta", 0x3B2},   {"gamma", 0x3B3},
        {"delta", 0x3B4},  {"epsilon", 0x3B5},{"zeta", 0x3B6},   {"eta", 0x3B7},
        {"theta", 0x3B8},  {"iota", 0x3B9},   {"kappa", 0x3BA},  {"lambda", 0x3BB},
        {"mu", 0x3BC},     {"nu", 0x3BD},     {"xi", 0x3BE},     {"omicron", 0x3BF},
        {"pi", 0x3C0},     {"rho", 0x3C1},    {"sigmaf", 0x3C2}, {"sigma", 0x3C3},
        {"tau", 0x3C4},    {"upsilon", 0x3C5},{"phi", 0x3C6},    {"chi", 0x3C7},
        {"psi", 0x3C8},    {"omega", 0x3C9},  {"ensp", 0x2002},  {"emsp", 0x2003},
        {"thinsp", 0x2009},{"zwnj", 0x200C},  {"zwj", 0x200D},   {"lrm", 0x200E},
        {"rlm", 0x200F},   {"ndash", 0x2013}, {"mdash", 0x2014}, {"lsquo", 0x2018},
        {"rsquo", 0x2019}, {"sbquo", 0x201A}, {"ldquo", 0x201C}, {"rdquo", 0x201D},
        {"bdquo", 0x201E}, {"dagger", 0x2020},{"Dagger", 0x2021},{"bull", 0x2022},
        {"hellip", 0x2026},{"permil", 0x2030},{"prime", 0x2032}, {"Prime", 0x2033},
        {"lsaquo", 0x2039},{"rsaquo", 0x203A},{"oline", 0x203E}, {"frasl", 0x2044},
        {"euro", 0x20AC},  {"trade", 0x2122}, {"alefsym", 0x2135},{"larr", 0x2190},
        {"uarr", 0x2191},  {"rarr", 0x2192},  {"darr", 0x2193},  {"harr", 0x2194},
        {"crarr", 0x21B5}, {"lArr", 0x21D0},  {"uArr", 0x21D1},  {"rArr", 0x21D2},
        {"dArr", 0x21D3},  {"hArr", 0x21D4},  {"forall", 0x2200},{"part", 0x2202},
        {"exist", 0x2203}, {"empty", 0x2205}, {"nabla", 0x2207}, {"isin", 0x2208},
        {"notin", 0x2209}, {"ni", 0x220B},    {"prod", 0x220F},  {"sum", 0x2211},
        {"minus", 0x2212}, {"lowast", 0x2217},{"radic", 0x221A}, {"prop", 0x221D},
        {"infin", 0x221E}, {"ang", 0x2220},   {"and", 0x2227},   {"or", 0x2228},
        {"cap", 0x2229},   {"cup", 0x222A},   {"int", 0x222B},   {"there4", 0x2234},
        {"sim", 0x223C},   {"cong", 0x2245},  {"asymp", 0x2248}, {"ne", 0x2260},
        {"equiv", 0x2261}, {"le", 0x2264},    {"ge", 0x2265},    {"sub", 0x2282},
        {"sup", 0x2283},   {"nsub", 0x2284},  {"sube", 0x2286},  {"supe", 0x2287},
        {"oplus", 0x2295}, {"otimes", 0x2297},{"perp", 0x22A5},  {"sdot", 0x22C5},
        {"lceil", 0x2308}, {"rceil", 0x2309}, {"lfloor", 0x230A},{"rfloor", 0x230B},
        {"lang", 0x2329},  {"rang", 0x232A},  {"loz", 0x25CA},   {"spades", 0x2660},
        {"clubs", 0x2663}, {"hearts", 0x2665},{"diams", 0x2666},
    };
    return table;
}

bool is_entity_name_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9');
}

// Tags whose open or close boundary forces a line break.
bool is_block_tag(std::string_view name) {
    static const std::unordered_map<std::string_view, bool> block = {
        {"p", true},  {"div", true}, {"br", true}, {"li", true}, {"tr", true},
        {"h1", true}, {"h2", true},  {"h3", true}, {"h4", true}, {"h5", true},
        {"h6", true},
    };
    return block.count(name) > 0;
}

std::string lower_ascii(std::string_view s) {
    std::string out(s);
    for (char& c : out) {
        if (c >= 'A' && c <= 'Z') {
            c = static_cast<char>(c - 'A' + 'a');
        }
    }
    return out;
}

// Case-insensitive search for "</name" from `from`; npos if absent.
size_t find_close_tag(std::string_view html, std::string_view name, size_t from) {
    const std::string needle = "</" + std::string(name);
    for (size_t i = from; i + needle.size() <= html.size(); ++i) {
        bool match = true;
        for (size_t k = 0; k < needle.size(); ++k) {
            char a = html[i + k];
            char b = needle[k];
            if (a >= 'A' && a <= 'Z') {
                a = static_cast<char>(a - 'A' + 'a');
            }
            if (a != b) {
                match = false;
                break;
            }
        }
        if (match) {
            return i;
        }
    }
    return std::string_view::npos;
}

}  // namespace

std::string decode_entities(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    size_t i = 0;
    while (i < s.size()) {
        if (s[i] != '&') {
            out.push_back(s[i]);
            ++i;
            continue;
        }
        // Numeric reference: &#123; or &#x1F;
        if (i + 2 < s.size() && s[i + 1] == '#') {
            size_t j = i + 2;
            bool hex = false;
            if (j < s.size() && (s[j] == 'x' || s[j] == 'X')) {
                hex = true;
                ++j;
            }
            uint64_t cp = 0;
            size_t digits_start = j;
            while (j < s.size() && cp <= 0x10FFFF) {
                char c = s[j];
                int d;
                if (c >= '0' && c <= '9') {
                    d = c - '0';
                } else if (hex && c >= 'a' && c <= 'f') {
                    d = c - 'a' + 10;
                } else if (hex && c >= 'A' && c <= 'F') {
                    d = c - 'A' + 10;
                } else {
                    break;
                }
                cp = cp * (hex ? 16 : 10) + static_cast<uint64_t>(d);
                ++j;
            }
            if (j > digits_start && j < s.size() && s[j] == ';' && cp > 0 && cp <= 0x10FFFF &&
                !(cp >= 0xD800 && cp <= 0xDFFF)) {
                unicode::append(out, static_cast<uint32_t>(cp));
                i = j + 1;
                continue;
            }
            out.push_back('&');
            ++i;
            continue;
        }
        // Named reference.
        size_t j = i + 1;
        while (j < s.size() && is_entity_name_char(s[j])) {
            ++j;
        }
        if (j > i + 1 && j < s.size() && s[j] == ';') {
            auto it = entity_table().find(s.substr(i + 1, j - i - 1));
            if (it != entity_table().end()) {
                unicode::append(out, it->second);
                i = j + 1;
                continue;
            }
        }
        out.push_back('&');
        ++i;
    }
    return out;
}

std::string extract_text(std::string_view html) {
    std::string flat;
    flat.reserve(html.size());
    size_t i = 0;
    while (i < html.size()) {
        char c = html[i];
        if (c != '<') {
            flat.push_back(c);
            ++i;
            continue;
        }
        // '<' begins a tag only when followed by a letter, '/', '!' or '?'.
        if (i + 1 >= html.size()) {
            flat.push_back(c);
            ++i;
            continue;
        }
        char next = html[i + 1];
        const bool tagish = std::isalpha(static_cast<unsigned char>(next)) || next == '/' ||
                            next == '!' || next == '?';
        if (!tagish) {
            flat.push_back(c);
            ++i;
            continue;
        }
        // Comment.
        if (html.substr(i, 4) == "<!--") {
            size_t end = html.find("-->", i + 4);
            i = (end == std::string_view::npos) ? html.size() : end + 3;
            continue;
        }
        // Parse the tag name.
        size_t name_start = i + 1;
        bool closing = false;
        if (html[name_start] == '/') {
            closing = true;
            ++name_start;
        }
        size_t name_end = name_start;
        while (name_end < html.size() &&
               std::isalnum(static_cast<unsigned char>(html[name_end]))) {
            ++name_end;
        }
        std::string name = lower_ascii(html.substr(name_start, name_end - name_start));
        size_t tag_end = html.find('>', i + 1);
        if (tag_end == std::string_view::npos) {
            // Unterminated tag: drop the rest.
            break;
        }
        if (!closing && (name == "script" || name == "style")) {
            size_t close = find_close_tag(html, name, tag_end + 1);
            if (close == std::string_view::npos) {
                break;
            }
            size_t close_end = html.find('>', close);
            i = (close_end == std::string_view::npos) ? html.size() : close_end + 1;
            continue;
        }
        if (is_block_tag(name)) {
            flat.push_back('\n');
        }
        i = tag_end + 1;
    }

    flat = decode_entities(flat);

    // Trim each line; drop blank lines.
    std::string out;
    out.reserve(flat.size());
    size_t pos = 0;
    while (pos <= flat.size()) {
        size_t nl = flat.find('\n', pos);
        std::string_view line(flat.data() + pos,
                              (nl == std::string::npos ? flat.size() : nl) - pos);
        auto trimmed = unicode::trim(line);
        if (!trimmed.empty()) {
            if (!out.empty()) {
                out.push_back('\n');
            }
            out.append(trimmed);
        }
        if (nl == std::string::npos) {
            break;
        }
        pos = nl + 1;
    }
    return out;
}

}  // namespace udt
