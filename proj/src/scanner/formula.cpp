#include "eucgov/scanner/formula.hpp"

#include <cctype>

namespace eucgov::scanner {

namespace {

bool is_ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
}

bool iequals(std::string_view a, std::string_view b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (std::toupper(static_cast<unsigned char>(a[i])) != std::toupper(static_cast<unsigned char>(b[i]))) {
      return false;
    }
  }
  return true;
}

// Index one past the bracket group opened at `open`, honoring nesting.
// Returns npos if it never closes.
std::size_t skip_brackets(std::string_view f, std::size_t open) {
  int depth = 0;
  for (std::size_t i = open; i < f.size(); ++i) {
    if (f[i] == '[') ++depth;
    if (f[i] == ']' && --depth == 0) return i + 1;
  }
  return std::string_view::npos;
}

}  // namespace

FormulaScan scan_formula(std::string_view f) {
  FormulaScan out;
  if (!f.empty() && f.front() == '=') f.remove_prefix(1);

  std::vector<bool> frames;  // one per open paren; true when it is an IF call
  int if_depth = 0;
  std::size_t ident_start = std::string_view::npos;

  std::size_t i = 0;
  while (i < f.size()) {
    char c = f[i];
    if (is_ident_char(c)) {
      if (ident_start == std::string_view::npos) ident_start = i;
      ++i;
      continue;
    }
    std::string_view ident;
    if (ident_start != std::string_view::npos) {
      ident = f.substr(ident_start, i - ident_start);
      ident_start = std::string_view::npos;
    }

    switch (c) {
      case '"': {
        std::size_t j = i + 1;
        bool closed = false;
        while (j < f.size()) {
          if (f[j] == '"') {
            if (j + 1 < f.size() && f[j + 1] == '"') {
              j += 2;
              continue;
            }
            closed = true;
            break;
          }
          ++j;
        }
        if (!closed) {
          out.balanced = false;
          i = f.size();
        } else {
          i = j + 1;
        }
        break;
      }
      case '\'': {
        // Quoted sheet name; may carry an external workbook prefix.
        std::size_t j = i + 1;
        std::string quoted;
        bool closed = false;
        while (j < f.size()) {
          if (f[j] == '\'') {
            if (j + 1 < f.size() && f[j + 1] == '\'') {
              quoted.push_back('\'');
              j += 2;
              continue;
            }
            closed = true;
            break;
          }
          quoted.push_back(f[j]);
          ++j;
        }
        if (!closed) {
          out.balanced = false;
          i = f.size();
          break;
        }
        auto open = quoted.find('[');
        auto close = quoted.find(']', open == std::string::npos ? 0 : open);
        if (open != std::string::npos && close != std::string::npos && j + 1 < f.size() && f[j + 1] == '!') {
          out.external_refs.push_back(quoted.substr(open + 1, close - open - 1));
        }
        i = j + 1;
        break;
      }
      case '[': {
        std::size_t end = skip_brackets(f, i);
        if (end == std::string_view::npos) {
          out.balanced = false;
          i = f.size();
          break;
        }
        if (ident.empty()) {
          // `[n]Sheet!A1` or `[n]!Name`; anything else is a structured
          // reference such as `[@Qty]`.
          std::size_t k = end;
          while (k < f.size() && is_ident_char(f[k])) ++k;
          if (k < f.size() && f[k] == '!') {
            out.external_refs.emplace_back(f.substr(i + 1, end - i - 2));
            ident_start = std::string_view::npos;
            i = k + 1;
            break;
          }
        }
        i = end;
        break;
      }
      case '(': {
        bool is_if = iequals(ident, "IF");
        frames.push_back(is_if);
        if (is_if) {
          ++out.if_calls;
          ++if_depth;
          if (if_depth > out.max_if_depth) out.max_if_depth = if_depth;
        }
        ++i;
        break;
      }
      case ')':
        if (frames.empty()) {
          out.balanced = false;
        } else {
          if (frames.back()) --if_depth;
          frames.pop_back();
        }
        ++i;
        break;
      default:
        ++i;
    }
  }
  if (!frames.empty()) out.balanced = false;
  return out;
}

IfNesting nested_if_depth(std::string_view formula) {
  auto scan = scan_formula(formula);
  return {scan.max_if_depth, scan.balanced};
}

}  // namespace eucgov::scanner
