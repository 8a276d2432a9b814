#pragma once

#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace grapho {

struct KeyValue {
    std::string key;
    std::string value;
    std::size_t line = 0;
};

// Parses "key = value" lines. Blank lines and lines starting with '#' are skipped.
// Throws Error("SCHEMA") on a line without '=' or with an empty key.
std::vector<KeyValue> parse_key_values(std::string_view text);

double kv_double(const KeyValue& kv);
long long kv_int(const KeyValue& kv);

}  // namespace grapho
