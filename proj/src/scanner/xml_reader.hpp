#pragma once

#include <functional>
#include <string>
#include <string_view>

namespace eucgov::scanner::xml {

/// Attribute list as handed out by expat: name/value pairs, null terminated.
class Attributes {
 public:
  explicit Attributes(const char** atts) : atts_(atts) {}
  /// Exact name first, then any attribute with the same local name, so
  /// "r:id" still resolves when a writer picked another prefix.
  const char* get(std::string_view name) const;
  bool truthy(std::string_view name) const;

 private:
  const char** atts_;
};

struct Handlers {
  /// Local element name (namespace prefix stripped).
  std::function<void(std::string_view name, const Attributes&)> on_start;
  std::function<void(std::string_view name)> on_end;
  std::function<void(std::string_view text)> on_text;
};

/// Parses `document`; throws Error{MalformedPart} naming `part` on failure.
void parse(std::string_view part, std::string_view document, const Handlers& handlers);

/// Strips any `prefix:` from an element name.
std::string_view local_name(std::string_view qualified);

}  // namespace eucgov::scanner::xml
