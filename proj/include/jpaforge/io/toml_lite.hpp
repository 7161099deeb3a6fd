#pragma once

// Reader for the TOML subset used by run configs:
//
//   # comment
//   [table]            [table.sub]           [[array_of_tables]]
//   key = 1.5e-3       key = "text"          key = 'literal'
//   key = true         key = [1.0, 2.0,      # arrays may span lines
//                             3.0]
//
// Inline tables, dotted keys, dates and multi-line strings are not
// supported and are reported as parse errors. The document is returned as
// a JSON object; duplicate keys are rejected.

#include <charconv>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace jpaforge::io {

class TomlError : public std::runtime_error {
 public:
  TomlError(std::size_t line, const std::string& what)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

namespace detail {

class TomlParser {
 public:
  explicit TomlParser(std::string_view text) : text_(text) {}

  nlohmann::json parse() {
    nlohmann::json root = nlohmann::json::object();
    nlohmann::json* current = &root;
    while (!at_end()) {
      skip_ws_and_comments();
      if (at_end()) break;
      const char c = peek();
      if (c == '\n') {
        advance();
        continue;
      }
      if (c == '[') {
        current = parse_header(root);
      } else {
        parse_key_value(*current);
      }
      expect_line_end();
    }
    return root;
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;

  bool at_end() const { return pos_ >= text_.size(); }
  char peek() const { return at_end() ? '\0' : text_[pos_]; }
  char advance() {
    const char c = text_[pos_++];
    if (c == '\n') ++line_;
    return c;
  }
  [[noreturn]] void error(const std::string& what) const { throw TomlError(line_, what); }

  void skip_spaces() {
    while (!at_end() && (peek() == ' ' || peek() == '\t' || peek() == '\r')) advance();
  }
  void skip_comment() {
    if (peek() == '#') {
      while (!at_end() && peek() != '\n') advance();
    }
  }
  void skip_ws_and_comments() {
    skip_spaces();
    skip_comment();
  }
  // Whitespace, comments and newlines (inside arrays).
  void skip_all() {
    while (!at_end()) {
      skip_ws_and_comments();
      if (peek() == '\n') {
        advance();
      } else {
        break;
      }
    }
  }
  void expect_line_end() {
    skip_ws_and_comments();
    if (at_end()) return;
    if (peek() != '\n') error(std::string("unexpected character '") + peek() + "'");
    advance();
  }

  static bool bare_key_char(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '_' || c == '-';
  }

  std::string parse_key() {
    skip_spaces();
    if (peek() == '"') return parse_basic_string();
    std::string key;
    while (!at_end() && bare_key_char(peek())) key += advance();
    if (key.empty()) error("expected a key");
    return key;
  }

  nlohmann::json* parse_header(nlohmann::json& root) {
    advance();  // [
    const bool array = peek() == '[';
    if (array) advance();
    std::vector<std::string> path;
    while (true) {
      path.push_back(parse_key());
      skip_spaces();
      if (peek() == '.') {
        advance();
        continue;
      }
      break;
    }
    if (peek() != ']') error("expected ']' after table name");
    advance();
    if (array) {
      if (peek() != ']') error("expected ']]' after array-of-tables name");
      advance();
    }
    nlohmann::json* node = &root;
    for (std::size_t i = 0; i < path.size(); ++i) {
      const bool last = i + 1 == path.size();
      auto& child = (*node)[path[i]];
      if (last && array) {
        if (child.is_null()) child = nlohmann::json::array();
        if (!child.is_array()) error("'" + path[i] + "' is not an array of tables");
        child.push_back(nlohmann::json::object());
        return &child.back();
      }
      if (child.is_null()) child = nlohmann::json::object();
      if (child.is_array() && !child.empty() && child.back().is_object()) {
        node = &child.back();
        continue;
      }
      if (!child.is_object()) error("'" + path[i] + "' is not a table");
      node = &child;
    }
    return node;
  }

  void parse_key_value(nlohmann::json& table) {
    const std::string key = parse_key();
    skip_spaces();
    if (peek() == '.') error("dotted keys are not supported");
    if (peek() != '=') error("expected '=' after key '" + key + "'");
    advance();
    skip_spaces();
    if (table.contains(key)) error("duplicate key '" + key + "'");
    table[key] = parse_value();
  }

  nlohmann::json parse_value() {
    const char c = peek();
    if (c == '"') return parse_basic_string();
    if (c == '\'') return parse_literal_string();
    if (c == '[') return parse_array();
    if (c == '{') error("inline tables are not supported");
    if (text_.substr(pos_, 4) == "true") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "false") {
      pos_ += 5;
      return false;
    }
    return parse_number();
  }

  std::string parse_basic_string() {
    advance();  // "
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') error("unterminated string");
      const char c = advance();
      if (c == '"') break;
      if (c == '\\') {
        if (at_end()) error("unterminated escape");
        const char e = advance();
        switch (e) {
          case '"': out += '"'; break;
          case '\\': out += '\\'; break;
          case 'n': out += '\n'; break;
          case 't': out += '\t'; break;
          default: error(std::string("unsupported escape '\\") + e + "'");
        }
      } else {
        out += c;
      }
    }
    return out;
  }

  std::string parse_literal_string() {
    advance();  // '
    std::string out;
    while (true) {
      if (at_end() || peek() == '\n') error("unterminated string");
      const char c = advance();
      if (c == '\'') break;
      out += c;
    }
    return out;
  }

  nlohmann::json parse_array() {
    advance();  // [
    nlohmann::json arr = nlohmann::json::array();
    skip_all();
    if (peek() == ']') {
      advance();
      return arr;
    }
    while (true) {
      skip_all();
      arr.push_back(parse_value());
      skip_all();
      if (peek() == ',') {
        advance();
        skip_all();
        if (peek() == ']') {
          advance();
          return arr;
        }
        continue;
      }
      if (peek() == ']') {
        advance();
        return arr;
      }
      error("expected ',' or ']' in array");
    }
  }

  nlohmann::json parse_number() {
    std::string token;
    while (!at_end()) {
      const char c = peek();
      if ((c >= '0' && c <= '9') || c == '+' || c == '-' || c == '.' || c == 'e' || c == 'E' || c == '_') {
        if (c != '_') token += c;
        advance();
      } else {
        break;
      }
    }
    if (token.empty()) error("expected a value");
    const bool is_float = token.find_first_of(".eE") != std::string::npos;
    const char* first = token.data() + (token.front() == '+' ? 1 : 0);
    const char* last = token.data() + token.size();
    if (is_float) {
      double v = 0.0;
      auto [p, ec] = std::from_chars(first, last, v);
      if (ec != std::errc() || p != last) error("malformed number '" + token + "'");
      return v;
    }
    long long v = 0;
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) error("malformed number '" + token + "'");
    return v;
  }
};

}  // namespace detail

inline nlohmann::json parse_toml(std::string_view text) { return detail::TomlParser(text).parse(); }

inline nlohmann::json parse_toml_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_toml(ss.str());
}

}  // namespace jpaforge::io
