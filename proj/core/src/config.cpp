#include "grapho/config.hpp"

#include <cmath>

#include "grapho/error.hpp"
#include "text_util.hpp"

namespace grapho {

std::vector<KeyValue> parse_key_values(std::string_view text) {
    std::vector<KeyValue> out;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        auto raw = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = (nl == std::string_view::npos) ? text.size() + 1 : nl + 1;
        ++line_no;
        auto line = detail::trim(raw);
        if (line.empty() || line.front() == '#') continue;
        auto eq = line.find('=');
        if (eq == std::string_view::npos) throw Error("SCHEMA", "expected key=value", line_no);
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (key.empty()) throw Error("SCHEMA", "empty key", line_no);
        out.push_back({std::string(key), std::string(value), line_no});
    }
    return out;
}

double kv_double(const KeyValue& kv) {
    auto v = detail::to_double(kv.value);
    if (!v || !std::isfinite(*v)) throw Error("SCHEMA", "'" + kv.key + "' expects a number", kv.line);
    return *v;
}

long long kv_int(const KeyValue& kv) {
    auto v = detail::to_int(kv.value);
    if (!v) throw Error("SCHEMA", "'" + kv.key + "' expects an integer", kv.line);
    return *v;
}

}  // namespace grapho
