#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace eucgov::scanner {

/// Result of a lexical pass over one formula. String literals, quoted sheet
/// names and structured-reference brackets never contribute IF calls.
struct FormulaScan {
  int max_if_depth = 0;  // deepest nesting of IF( calls
  int if_calls = 0;      // number of IF( calls
  /// False when a parenthesis or string literal never closes (or a stray ')'
  /// appears). Depth is then computed over the parsed prefix.
  bool balanced = true;
  /// Raw contents of external-workbook brackets, e.g. "1" for `[1]Book2!A1` or
  /// "Book2.xlsx" for `'C:\x\[Book2.xlsx]Sheet1'!A1`.
  std::vector<std::string> external_refs;
};

FormulaScan scan_formula(std::string_view formula);

struct IfNesting {
  int depth = 0;
  bool balanced = true;  // false flags UnbalancedFormula
};

/// Maximum nesting depth of IF( calls; accepts text with or without "=".
IfNesting nested_if_depth(std::string_view formula);

}  // namespace eucgov::scanner
