#pragma once

// Parser for generation output in the form
//
//   {Caption: "..."} {Rationale: "..."} {Situation: "..."}
//
// Rules:
//   - Text outside braces is ignored prose.
//   - A block is '{' label ':' quoted-string '}', whitespace allowed between
//     tokens. Labels are Caption, Rationale, Situation (case-insensitive).
//   - Quoted strings end at the first unescaped '"' and may not span lines.
//     Escapes: \" \\ \n \t \r \{ \}; any other backslash pair is kept as is.
//     Braces inside the quotes are field content, not delimiters.
//   - Blocks form triples in the order Caption, Rationale, Situation. A
//     triple cut short by a new Caption, a syntax error or end of input is
//     reported with its starting position.
//
// parse_scenario_blocks never throws; problems come back as diagnostics.

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ricl/core/error.hpp"

namespace ricl {

struct ScenarioBlock {
  std::string caption;
  std::string rationale;
  std::string situation;
  std::size_t source_line = 0;

  friend bool operator==(const ScenarioBlock&, const ScenarioBlock&) = default;
};

struct ParseDiagnostic {
  std::size_t line = 0;
  std::size_t column = 0;
  std::string message;
};

struct ParseResult {
  std::vector<ScenarioBlock> blocks;
  std::vector<ParseDiagnostic> errors;
};

class ParseError : public Error {
 public:
  explicit ParseError(const ParseDiagnostic& d)
      : Error("line " + std::to_string(d.line) + ", column " + std::to_string(d.column) + ": " +
              d.message),
        diag_(d) {}
  const ParseDiagnostic& diagnostic() const noexcept { return diag_; }

 private:
  ParseDiagnostic diag_;
};

namespace detail {

enum class Field { caption, rationale, situation };

inline std::string_view field_name(Field f) {
  switch (f) {
    case Field::caption: return "Caption";
    case Field::rationale: return "Rationale";
    case Field::situation: return "Situation";
  }
  return "";
}

inline std::optional<Field> field_from_label(std::string_view label) {
  auto eq = [&](std::string_view want) {
    if (label.size() != want.size()) return false;
    for (std::size_t i = 0; i < want.size(); ++i) {
      char c = label[i];
      if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
      char w = want[i];
      if (w >= 'A' && w <= 'Z') w = static_cast<char>(w - 'A' + 'a');
      if (c != w) return false;
    }
    return true;
  };
  if (eq("caption")) return Field::caption;
  if (eq("rationale")) return Field::rationale;
  if (eq("situation")) return Field::situation;
  return std::nullopt;
}

class BlockScanner {
 public:
  explicit BlockScanner(std::string_view in) : in_(in) {}

  ParseResult run() {
    while (pos_ < in_.size()) {
      const char c = in_[pos_];
      if (c == '{') {
        block();
      } else {
        advance();
      }
    }
    if (open_) incomplete(open_->line, open_->column);
    return std::move(result_);
  }

 private:
  struct Partial {
    std::size_t line = 0, column = 0;
    std::optional<std::string> caption, rationale;
  };

  void advance() {
    if (in_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }

  void error(std::size_t line, std::size_t col, std::string msg) {
    result_.errors.push_back({line, col, std::move(msg)});
  }

  void skip_inline_space() {
    while (pos_ < in_.size() && (in_[pos_] == ' ' || in_[pos_] == '\t' || in_[pos_] == '\r')) advance();
  }

  // Resynchronise after a malformed block: up to the next '}' on this line or
  // the end of the line.
  void recover() {
    while (pos_ < in_.size() && in_[pos_] != '\n') {
      if (in_[pos_] == '}') {
        advance();
        return;
      }
      advance();
    }
  }

  void incomplete(std::size_t line, std::size_t col) {
    std::string missing = !open_->rationale ? "Rationale" : "Situation";
    error(line, col, "incomplete scenario triple: missing field '" + missing + "'");
    open_.reset();
  }

  void drop_open_triple() { open_.reset(); }

  void block() {
    const std::size_t bl = line_, bc = col_;
    advance();  // '{'
    skip_inline_space();
    const std::size_t label_start = pos_;
    while (pos_ < in_.size() && ((in_[pos_] >= 'A' && in_[pos_] <= 'Z') || (in_[pos_] >= 'a' && in_[pos_] <= 'z')))
      advance();
    const auto label = in_.substr(label_start, pos_ - label_start);
    if (label.empty()) {
      error(bl, bc, "missing field label after '{'");
      drop_open_triple();
      recover();
      return;
    }
    const auto field = field_from_label(label);
    if (!field) {
      error(bl, bc, "unknown field label '" + std::string(label) + "'");
      drop_open_triple();
      recover();
      return;
    }
    skip_inline_space();
    if (pos_ >= in_.size() || in_[pos_] != ':') {
      error(line_, col_, "expected ':' after field label '" + std::string(label) + "'");
      drop_open_triple();
      recover();
      return;
    }
    advance();
    skip_inline_space();
    if (pos_ >= in_.size() || in_[pos_] != '"') {
      error(line_, col_, "expected '\"' to open the " + std::string(field_name(*field)) + " value");
      drop_open_triple();
      recover();
      return;
    }
    const std::size_t sl = line_, sc = col_;
    advance();
    std::string value;
    bool closed = false;
    while (pos_ < in_.size()) {
      const char c = in_[pos_];
      if (c == '\n') break;
      if (c == '"') {
        advance();
        closed = true;
        break;
      }
      if (c == '\\' && pos_ + 1 < in_.size() && in_[pos_ + 1] != '\n') {
        const char e = in_[pos_ + 1];
        switch (e) {
          case '"': value.push_back('"'); break;
          case '\\': value.push_back('\\'); break;
          case 'n': value.push_back('\n'); break;
          case 't': value.push_back('\t'); break;
          case 'r': value.push_back('\r'); break;
          case '{': value.push_back('{'); break;
          case '}': value.push_back('}'); break;
          default:
            value.push_back('\\');
            value.push_back(e);
        }
        advance();
        advance();
        continue;
      }
      value.push_back(c);
      advance();
    }
    if (!closed) {
      error(sl, sc, "unterminated string in " + std::string(field_name(*field)) + " field");
      drop_open_triple();
      return;
    }
    skip_inline_space();
    if (pos_ >= in_.size() || in_[pos_] != '}') {
      error(line_, col_, "unbalanced braces: expected '}' to close the " +
                             std::string(field_name(*field)) + " block opened at column " +
                             std::to_string(bc));
      drop_open_triple();
      recover();
      return;
    }
    advance();
    accept(*field, std::move(value), bl, bc);
  }

  void accept(Field f, std::string value, std::size_t line, std::size_t col) {
    if (value.empty()) {
      error(line, col, "empty " + std::string(field_name(f)) + " field");
      drop_open_triple();
      return;
    }
    switch (f) {
      case Field::caption:
        if (open_) incomplete(open_->line, open_->column);
        open_ = Partial{line, col, std::move(value), std::nullopt};
        return;
      case Field::rationale:
        if (!open_) {
          error(line, col, "Rationale without a preceding Caption");
          return;
        }
        if (open_->rationale) {
          error(line, col, "duplicate Rationale in scenario triple");
          drop_open_triple();
          return;
        }
        open_->rationale = std::move(value);
        return;
      case Field::situation:
        if (!open_) {
          error(line, col, "Situation without a preceding Caption");
          return;
        }
        if (!open_->rationale) {
          error(open_->line, open_->column, "incomplete scenario triple: missing field 'Rationale'");
          drop_open_triple();
          return;
        }
        result_.blocks.push_back({std::move(*open_->caption), std::move(*open_->rationale),
                                  std::move(value), open_->line});
        open_.reset();
        return;
    }
  }

  std::string_view in_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
  std::optional<Partial> open_;
  ParseResult result_;
};

inline std::string escape_field(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (char c : s) {
    switch (c) {
      case '"': out += "\\\""; break;
      case '\\': out += "\\\\"; break;
      case '\n': out += "\\n"; break;
      case '\t': out += "\\t"; break;
      case '\r': out += "\\r"; break;
      case '{': out += "\\{"; break;
      case '}': out += "\\}"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

}  // namespace detail

inline ParseResult parse_scenario_blocks(std::string_view raw_llm_output) {
  return detail::BlockScanner(raw_llm_output).run();
}

// Throws ParseError for the first diagnostic, if any.
inline std::vector<ScenarioBlock> parse_scenario_blocks_strict(std::string_view raw_llm_output) {
  auto r = parse_scenario_blocks(raw_llm_output);
  if (!r.errors.empty()) throw ParseError(r.errors.front());
  return std::move(r.blocks);
}

inline std::string serialize_block(const ScenarioBlock& b) {
  return "{Caption: \"" + detail::escape_field(b.caption) + "\"} {Rationale: \"" +
         detail::escape_field(b.rationale) + "\"} {Situation: \"" +
         detail::escape_field(b.situation) + "\"}";
}

// One block per line; source_line of block i is i + 1.
inline std::string serialize_blocks(const std::vector<ScenarioBlock>& blocks) {
  std::string out;
  for (const auto& b : blocks) {
    out += serialize_block(b);
    out.push_back('\n');
  }
  return out;
}

}  // namespace ricl
