#include "eucgov/scanner/zip_archive.hpp"

#include <zlib.h>

#include <algorithm>

#include "eucgov/error.hpp"

namespace eucgov::scanner {

namespace {

constexpr std::uint32_t kLocalHeaderSig = 0x04034b50;
constexpr std::uint32_t kCentralHeaderSig = 0x02014b50;
constexpr std::uint32_t kEndOfCentralDirSig = 0x06054b50;
constexpr std::size_t kEndOfCentralDirSize = 22;

std::uint16_t le16(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint16_t>(b[at] | (b[at + 1] << 8));
}

std::uint32_t le32(std::span<const std::uint8_t> b, std::size_t at) {
  return static_cast<std::uint32_t>(b[at]) | (static_cast<std::uint32_t>(b[at + 1]) << 8) |
         (static_cast<std::uint32_t>(b[at + 2]) << 16) |
         (static_cast<std::uint32_t>(b[at + 3]) << 24);
}

[[noreturn]] void corrupt(const std::string& what) {
  throw Error(ErrorCode::NotAWorkbook, "corrupt zip container: " + what);
}

}  // namespace

ZipArchive::ZipArchive(std::vector<std::uint8_t> bytes) : bytes_(std::move(bytes)) {
  std::span<const std::uint8_t> b{bytes_};
  if (b.size() < kEndOfCentralDirSize) corrupt("file too short");

  // The end-of-central-directory record sits within the last 64 KiB + 22 bytes
  // (trailing comment is at most 0xFFFF bytes).
  std::size_t lowest = b.size() > 0xFFFF + kEndOfCentralDirSize ? b.size() - 0xFFFF - kEndOfCentralDirSize : 0;
  std::optional<std::size_t> eocd;
  for (std::size_t pos = b.size() - kEndOfCentralDirSize + 1; pos-- > lowest;) {
    if (le32(b, pos) == kEndOfCentralDirSig) {
      eocd = pos;
      break;
    }
  }
  if (!eocd) corrupt("no end of central directory");

  std::uint16_t disk = le16(b, *eocd + 4);
  std::uint16_t cd_disk = le16(b, *eocd + 6);
  std::uint16_t count = le16(b, *eocd + 10);
  std::uint32_t cd_size = le32(b, *eocd + 12);
  std::uint32_t cd_offset = le32(b, *eocd + 16);
  if (disk != 0 || cd_disk != 0) corrupt("multi-disk archives are not supported");
  if (count == 0xFFFF || cd_offset == 0xFFFFFFFF) corrupt("zip64 archives are not supported");
  if (static_cast<std::uint64_t>(cd_offset) + cd_size > *eocd) corrupt("central directory out of range");

  std::size_t pos = cd_offset;
  entries_.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    if (pos + 46 > b.size() || le32(b, pos) != kCentralHeaderSig) corrupt("bad central directory entry");
    Entry e;
    e.method = le16(b, pos + 10);
    e.crc32 = le32(b, pos + 16);
    e.compressed_size = le32(b, pos + 20);
    e.uncompressed_size = le32(b, pos + 24);
    std::uint16_t name_len = le16(b, pos + 28);
    std::uint16_t extra_len = le16(b, pos + 30);
    std::uint16_t comment_len = le16(b, pos + 32);
    e.local_header_offset = le32(b, pos + 42);
    if (pos + 46 + name_len > b.size()) corrupt("entry name out of range");
    e.name.assign(reinterpret_cast<const char*>(b.data() + pos + 46), name_len);
    entries_.push_back(std::move(e));
    pos += 46 + name_len + extra_len + comment_len;
  }
}

bool ZipArchive::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.name == name; });
}

std::optional<std::string> ZipArchive::read(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return extract(e);
  }
  return std::nullopt;
}

std::string ZipArchive::extract(const Entry& e) const {
  std::span<const std::uint8_t> b{bytes_};
  std::size_t at = e.local_header_offset;
  if (at + 30 > b.size() || le32(b, at) != kLocalHeaderSig) corrupt("bad local header for " + e.name);
  std::size_t data = at + 30 + le16(b, at + 26) + le16(b, at + 28);
  if (data + e.compressed_size > b.size()) corrupt("entry data out of range for " + e.name);

  std::string out;
  if (e.method == 0) {
    out.assign(reinterpret_cast<const char*>(b.data() + data), e.compressed_size);
  } else if (e.method == 8) {
    out.resize(e.uncompressed_size);
    z_stream zs{};
    if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) corrupt("inflate init failed");
    zs.next_in = const_cast<Bytef*>(b.data() + data);
    zs.avail_in = static_cast<uInt>(e.compressed_size);
    zs.next_out = reinterpret_cast<Bytef*>(out.data());
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    auto produced = zs.total_out;
    inflateEnd(&zs);
    if (rc != Z_STREAM_END || produced != e.uncompressed_size) corrupt("inflate failed for " + e.name);
  } else {
    corrupt("unsupported compression method " + std::to_string(e.method) + " for " + e.name);
  }

  auto crc = ::crc32(0L, reinterpret_cast<const Bytef*>(out.data()), static_cast<uInt>(out.size()));
  if (crc != e.crc32) corrupt("crc mismatch for " + e.name);
  return out;
}

}  // namespace eucgov::scanner
