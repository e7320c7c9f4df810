#pragma once

#include <map>
#include <memory>
#include <string>
#include <variant>
#include <vector>

namespace iceload::toml {

// The subset of TOML used by run configs: [tables], [[arrays of tables]],
// dotted table headers, and key = value with strings, numbers, booleans and
// single-line arrays of those. Inline tables and multi-line strings are not
// supported.

struct Value;
struct Table;

using Array = std::vector<Value>;

struct Value {
    std::variant<bool, double, std::string, Array> data;
    bool integer = false;  // number written without '.', 'e' or 'inf'
    std::size_t line = 0;

    bool is_bool() const { return std::holds_alternative<bool>(data); }
    bool is_number() const { return std::holds_alternative<double>(data); }
    bool is_string() const { return std::holds_alternative<std::string>(data); }
    bool is_array() const { return std::holds_alternative<Array>(data); }
};

struct Table {
    std::map<std::string, Value> values;
    std::map<std::string, std::shared_ptr<Table>> tables;
    std::map<std::string, std::vector<std::shared_ptr<Table>>> arrays;
    std::size_t line = 0;
};

Table parse(const std::string& text, const std::string& source = "<config>");

}  // namespace iceload::toml
