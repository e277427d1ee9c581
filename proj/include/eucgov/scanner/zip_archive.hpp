#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace eucgov::scanner {

/// Read-only view of a ZIP package held in memory. Supports stored and
/// deflated entries; ZIP64 and multi-disk archives are rejected.
class ZipArchive {
 public:
  struct Entry {
    std::string name;
    std::uint16_t method = 0;
    std::uint32_t crc32 = 0;
    std::uint64_t compressed_size = 0;
    std::uint64_t uncompressed_size = 0;
    std::uint64_t local_header_offset = 0;
  };

  /// Throws Error{NotAWorkbook} if `bytes` is not a readable ZIP container.
  explicit ZipArchive(std::vector<std::uint8_t> bytes);

  const std::vector<Entry>& entries() const { return entries_; }
  bool contains(std::string_view name) const;
  /// Inflated contents of `name`, or nullopt when absent.
  std::optional<std::string> read(std::string_view name) const;
  std::size_t size_bytes() const { return bytes_.size(); }

 private:
  std::string extract(const Entry& e) const;

  std::vector<std::uint8_t> bytes_;
  std::vector<Entry> entries_;
};

}  // namespace eucgov::scanner
