#include "xml_reader.hpp"

#include <expat.h>

#include <cstring>
#include <exception>
#include <memory>

#include "eucgov/error.hpp"

namespace eucgov::scanner::xml {

std::string_view local_name(std::string_view qualified) {
  auto colon = qualified.find(':');
  return colon == std::string_view::npos ? qualified : qualified.substr(colon + 1);
}

const char* Attributes::get(std::string_view name) const {
  const char* fallback = nullptr;
  for (std::size_t i = 0; atts_[i]; i += 2) {
    std::string_view key = atts_[i];
    if (key == name) return atts_[i + 1];
    if (!fallback && local_name(key) == local_name(name)) {
      fallback = atts_[i + 1];
    }
  }
  return fallback;
}

bool Attributes::truthy(std::string_view name) const {
  const char* v = get(name);
  return v && (std::strcmp(v, "1") == 0 || std::strcmp(v, "true") == 0);
}

namespace {

struct Context {
  const Handlers* handlers;
  std::exception_ptr error;
  XML_Parser parser;
};

void XMLCALL start_cb(void* data, const XML_Char* name, const XML_Char** atts) {
  auto* ctx = static_cast<Context*>(data);
  if (!ctx->handlers->on_start) return;
  try {
    ctx->handlers->on_start(local_name(name), Attributes{atts});
  } catch (...) {
    ctx->error = std::current_exception();
    XML_StopParser(ctx->parser, XML_FALSE);
  }
}

void XMLCALL end_cb(void* data, const XML_Char* name) {
  auto* ctx = static_cast<Context*>(data);
  if (!ctx->handlers->on_end) return;
  try {
    ctx->handlers->on_end(local_name(name));
  } catch (...) {
    ctx->error = std::current_exception();
    XML_StopParser(ctx->parser, XML_FALSE);
  }
}

void XMLCALL text_cb(void* data, const XML_Char* s, int len) {
  auto* ctx = static_cast<Context*>(data);
  if (ctx->handlers->on_text) ctx->handlers->on_text(std::string_view(s, static_cast<std::size_t>(len)));
}

}  // namespace

void parse(std::string_view part, std::string_view document, const Handlers& handlers) {
  std::unique_ptr<std::remove_pointer_t<XML_Parser>, decltype(&XML_ParserFree)> parser(
      XML_ParserCreate("UTF-8"), &XML_ParserFree);
  if (!parser) throw Error(ErrorCode::MalformedPart, "cannot allocate XML parser", std::string(part));

  Context ctx{&handlers, nullptr, parser.get()};
  XML_SetUserData(parser.get(), &ctx);
  XML_SetElementHandler(parser.get(), start_cb, end_cb);
  XML_SetCharacterDataHandler(parser.get(), text_cb);

  auto status = XML_Parse(parser.get(), document.data(), static_cast<int>(document.size()), XML_TRUE);
  if (ctx.error) std::rethrow_exception(ctx.error);
  if (status != XML_STATUS_OK) {
    throw Error(ErrorCode::MalformedPart,
                std::string(part) + ": XML parse error at line " +
                    std::to_string(XML_GetCurrentLineNumber(parser.get())) + ": " +
                    XML_ErrorString(XML_GetErrorCode(parser.get())),
                std::string(part));
  }
}

}  // namespace eucgov::scanner::xml
