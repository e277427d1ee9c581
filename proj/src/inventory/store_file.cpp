#include <fstream>
#include <sstream>

#include <unistd.h>

#include "eucgov/error.hpp"
#include "eucgov/inventory/inventory.hpp"
#include "eucgov/serialization.hpp"

namespace eucgov::inventory {

namespace fs = std::filesystem;

StoreDocument load_store(const fs::path& path) {
  std::error_code ec;
  if (!fs::exists(path, ec)) return {};

  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::StoreUnreadable, "cannot open store " + path.string(), "store");
  std::stringstream buffer;
  buffer << in.rdbuf();

  StoreDocument doc;
  try {
    auto j = parse_json(buffer.str(), "store");
    doc = j.get<StoreDocument>();
  } catch (const Error& e) {
    throw Error(ErrorCode::StoreUnreadable, path.string() + ": " + e.what(), "store");
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::StoreUnreadable, path.string() + ": " + e.what(), "store");
  }
  if (doc.schema_version != kSchemaVersion) {
    throw Error(ErrorCode::StoreUnreadable,
                path.string() + ": unsupported schema_version " + std::to_string(doc.schema_version), "store");
  }
  if (auto problems = check_integrity(doc); !problems.empty()) {
    throw Error(ErrorCode::StoreUnreadable, path.string() + ": " + problems.front(), "store");
  }
  return doc;
}

void save_store(const fs::path& path, const StoreDocument& doc) {
  auto text = nlohmann::json(doc).dump(2) + "\n";
  auto tmp = path;
  tmp += ".tmp-" + std::to_string(::getpid());
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string(), "store");
    out << text;
    out.flush();
    if (!out) throw Error(ErrorCode::Io, "write failed for " + tmp.string(), "store");
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorCode::Io, "cannot replace " + path.string(), "store");
  }
}

}  // namespace eucgov::inventory
