#include "udt/lang_profiles.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <fstream>

#include "udt/error.hpp"

namespace udt {

namespace {

const char* kEnglishSeed =
    "The weather turned cold early this year, and the first snow arrived before the end of "
    "November. Most mornings the roads were quiet, and people walked quickly with their coats "
    "closed against the wind. The library on the corner stayed open late through the winter, "
    "and students filled the long tables near the windows. A good cup of coffee makes the "
    "early hours easier, and the bakery across the street sold bread that was still warm. "
    "Science begins with careful observation. When we measure something many times, we learn "
    "not only its value but also how much our measurements vary. A result that cannot be "
    "repeated is not yet knowledge; it is a suggestion waiting for evidence. The history of "
    "engineering is a history of small improvements accumulating into great change. Bridges "
    "grew longer as materials improved, and engines grew quieter as designers learned where "
    "the noise was born. Cooking is chemistry you can eat. Heat changes proteins, browning "
    "builds flavor, and salt carries taste to every part of the dish. A simple soup, made "
    "slowly, can be better than an elaborate meal made in a hurry. The garden needs less "
    "attention in winter, but planning the spring beds is work best done early. Seeds ordered "
    "in January arrive in time for the first warm weeks, and the soil rewards patience more "
    "than strength.";

const char* kChineseSeed =
    "今年的冬天来得比往年早，十一月底就下了第一场雪。早晨的街道很安静，人们裹紧大衣，匆匆走过路口。"
    "街角的图书馆整个冬天都开到很晚，学生们坐满了靠窗的长桌。一杯热咖啡能让清晨变得容易一些，"
    "街对面的面包店卖着还温热的面包。科学始于细致的观察。当我们对同一个量进行多次测量时，"
    "我们不仅得到它的数值，也了解测量本身的波动。不能重复的结果还不是知识，只是等待证据的一种猜想。"
    "工程的历史是无数微小改进累积成巨大变化的历史。随着材料的进步，桥梁越建越长；设计者弄清噪声的来源之后，"
    "发动机也越来越安静。烹饪是可以吃的化学。加热改变蛋白质，焦化带来风味，盐把味道送到菜的每一个角落。"
    "一碗慢慢熬出来的简单的汤，可能胜过匆忙做出的丰盛大餐。冬天的园子不需要太多照料，"
    "但规划春天的苗床最好趁早。一月订购的种子会在最初的暖和日子前寄到，土壤回报的是耐心而不是力气。";

}  // namespace

std::vector<LangProfile> builtin_lang_profiles() {
    return {
        LangProfile::train("en", kEnglishSeed),
        LangProfile::train("zh", kChineseSeed),
    };
}

std::vector<LangProfile> load_lang_profiles(const std::filesystem::path& dir) {
    std::vector<LangProfile> profiles;
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (entry.is_regular_file() && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) {
        std::ifstream in(file);
        nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
        if (j.is_discarded() || !j.is_object() || !j.contains("lang")) {
            throw ConfigError("malformed language profile: " + file.string());
        }
        if (j.contains("text")) {
            profiles.push_back(
                LangProfile::train(j["lang"].get<std::string>(), j["text"].get<std::string>()));
        } else if (j.contains("trigram_freqs")) {
            LangProfile p;
            p.lang = j["lang"].get<std::string>();
            for (const auto& [gram, freq] : j["trigram_freqs"].items()) {
                p.trigram_freqs[gram] = freq.get<double>();
            }
            profiles.push_back(std::move(p));
        } else {
            throw ConfigError("language profile needs \"text\" or \"trigram_freqs\": " +
                              file.string());
        }
    }
    return profiles;
}

}  // namespace udt
