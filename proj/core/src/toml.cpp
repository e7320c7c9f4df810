#include "iceload/toml.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

#include "iceload/error.hpp"

namespace iceload::toml {

namespace {

class Parser {
public:
    Parser(const std::string& text, std::string source) : text_(text), source_(std::move(source)) {}

    Table run() {
        Table root;
        root.line = 1;
        Table* current = &root;
        std::istringstream in(text_);
        std::string raw;
        while (std::getline(in, raw)) {
            ++line_;
            if (!raw.empty() && raw.back() == '\r') raw.pop_back();
            line_text_ = raw;
            pos_ = 0;
            skip_ws();
            if (at_end() || peek() == '#') continue;
            if (peek() == '[') {
                current = header(root);
            } else {
                key_value(*current);
            }
        }
        return root;
    }

private:
    [[noreturn]] void fail(const std::string& what) const { throw ParseError(source_, line_, what); }

    bool at_end() const { return pos_ >= line_text_.size(); }
    char peek() const { return line_text_[pos_]; }
    void skip_ws() {
        while (!at_end() && (peek() == ' ' || peek() == '\t')) ++pos_;
    }
    void expect_line_end() {
        skip_ws();
        if (!at_end() && peek() != '#') fail("unexpected text after value: '" + line_text_.substr(pos_) + "'");
    }

    std::string bare_key() {
        skip_ws();
        const std::size_t start = pos_;
        while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_' || peek() == '-')) ++pos_;
        if (pos_ == start) fail("expected a key");
        return line_text_.substr(start, pos_ - start);
    }

    std::vector<std::string> dotted_key() {
        std::vector<std::string> parts{bare_key()};
        skip_ws();
        while (!at_end() && peek() == '.') {
            ++pos_;
            parts.push_back(bare_key());
            skip_ws();
        }
        return parts;
    }

    Table* header(Table& root) {
        ++pos_;
        const bool array = !at_end() && peek() == '[';
        if (array) ++pos_;
        const auto parts = dotted_key();
        if (at_end() || peek() != ']') fail("expected ']' to close table header");
        ++pos_;
        if (array) {
            if (at_end() || peek() != ']') fail("expected ']]' to close array-of-tables header");
            ++pos_;
        }
        expect_line_end();

        Table* t = &root;
        for (std::size_t i = 0; i + 1 < parts.size(); ++i) t = &descend(*t, parts[i]);
        const std::string& last = parts.back();
        if (array) {
            if (t->tables.count(last) || t->values.count(last)) fail("'" + last + "' is already defined as a non-array");
            auto fresh = std::make_shared<Table>();
            fresh->line = line_;
            t->arrays[last].push_back(fresh);
            return fresh.get();
        }
        if (t->values.count(last) || t->arrays.count(last)) fail("'" + last + "' is already defined");
        auto& slot = t->tables[last];
        if (slot && defined_.count(slot.get())) fail("table [" + last + "] defined twice");
        if (!slot) slot = std::make_shared<Table>();
        slot->line = line_;
        defined_.insert({slot.get(), true});
        return slot.get();
    }

    Table& descend(Table& t, const std::string& key) {
        if (auto it = t.arrays.find(key); it != t.arrays.end()) return *it->second.back();
        if (t.values.count(key)) fail("'" + key + "' is a value, not a table");
        auto& slot = t.tables[key];
        if (!slot) {
            slot = std::make_shared<Table>();
            slot->line = line_;
        }
        return *slot;
    }

    void key_value(Table& t) {
        const auto parts = dotted_key();
        if (parts.size() != 1) fail("dotted keys are not supported; use a [table] header");
        skip_ws();
        if (at_end() || peek() != '=') fail("expected '=' after key '" + parts[0] + "'");
        ++pos_;
        Value v = value();
        expect_line_end();
        if (t.values.count(parts[0]) || t.tables.count(parts[0]) || t.arrays.count(parts[0])) {
            fail("duplicate key '" + parts[0] + "'");
        }
        t.values.emplace(parts[0], std::move(v));
    }

    Value value() {
        skip_ws();
        if (at_end()) fail("missing value");
        Value v;
        v.line = line_;
        const char c = peek();
        if (c == '"' || c == '\'') {
            v.data = string(c);
        } else if (c == '[') {
            ++pos_;
            Array items;
            skip_ws();
            while (!at_end() && peek() != ']') {
                items.push_back(value());
                skip_ws();
                if (!at_end() && peek() == ',') {
                    ++pos_;
                    skip_ws();
                } else {
                    break;
                }
            }
            if (at_end() || peek() != ']') fail("unterminated array (arrays must fit on one line)");
            ++pos_;
            v.data = std::move(items);
        } else {
            const std::size_t start = pos_;
            while (!at_end() && peek() != ',' && peek() != ']' && peek() != '#' && peek() != ' ' && peek() != '\t') ++pos_;
            const std::string tok = line_text_.substr(start, pos_ - start);
            if (tok == "true" || tok == "false") {
                v.data = tok == "true";
            } else {
                v.data = number(tok, v.integer);
            }
        }
        return v;
    }

    std::string string(char quote) {
        ++pos_;
        std::string out;
        while (!at_end() && peek() != quote) {
            char c = peek();
            ++pos_;
            if (quote == '"' && c == '\\') {
                if (at_end()) break;
                const char e = peek();
                ++pos_;
                switch (e) {
                    case 'n': c = '\n'; break;
                    case 't': c = '\t'; break;
                    case '\\': c = '\\'; break;
                    case '"': c = '"'; break;
                    default: fail(std::string("unsupported escape '\\") + e + "'");
                }
            }
            out.push_back(c);
        }
        if (at_end()) fail("unterminated string");
        ++pos_;
        return out;
    }

    double number(std::string tok, bool& integer) {
        std::string clean;
        for (char c : tok) {
            if (c != '_') clean.push_back(c);
        }
        if (clean.empty()) fail("missing value");
        if (clean == "inf" || clean == "+inf" || clean == "-inf" || clean == "nan") fail("non-finite number '" + tok + "'");
        const char* first = clean.data();
        if (*first == '+') ++first;
        double v = 0.0;
        const auto [p, ec] = std::from_chars(first, clean.data() + clean.size(), v);
        if (ec != std::errc{} || p != clean.data() + clean.size()) {
            fail("invalid value '" + tok + "' (strings must be quoted)");
        }
        integer = clean.find_first_of(".eE") == std::string::npos;
        return v;
    }

    const std::string& text_;
    std::string source_;
    std::size_t line_ = 0;
    std::string line_text_;
    std::size_t pos_ = 0;
    std::map<const Table*, bool> defined_;
};

}  // namespace

Table parse(const std::string& text, const std::string& source) { return Parser(text, source).run(); }

}  // namespace iceload::toml
