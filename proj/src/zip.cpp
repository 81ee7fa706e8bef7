#include "autopower/zip.hpp"

#include <zlib.h>

#include <cstring>

#include "autopower/error.hpp"

namespace autopower::zip {

namespace {

constexpr std::uint32_t kLocalSig = 0x04034b50;
constexpr std::uint32_t kCentralSig = 0x02014b50;
constexpr std::uint32_t kEndSig = 0x06054b50;
constexpr std::size_t kEndSize = 22;
constexpr std::size_t kCentralSize = 46;
constexpr std::size_t kLocalSize = 30;

[[noreturn]] void fail(const std::string& why) { throw Error(ErrorKind::format, "ingest", why); }

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  std::uint16_t u16(std::size_t at) const {
    need(at, 2);
    return static_cast<std::uint16_t>(bytes_[at] | (bytes_[at + 1] << 8));
  }
  std::uint32_t u32(std::size_t at) const {
    need(at, 4);
    return static_cast<std::uint32_t>(bytes_[at]) | (static_cast<std::uint32_t>(bytes_[at + 1]) << 8) |
           (static_cast<std::uint32_t>(bytes_[at + 2]) << 16) |
           (static_cast<std::uint32_t>(bytes_[at + 3]) << 24);
  }
  std::span<const std::uint8_t> bytes(std::size_t at, std::size_t n) const {
    need(at, n);
    return bytes_.subspan(at, n);
  }
  std::size_t size() const { return bytes_.size(); }

 private:
  void need(std::size_t at, std::size_t n) const {
    if (at > bytes_.size() || n > bytes_.size() - at) fail("archive truncated");
  }
  std::span<const std::uint8_t> bytes_;
};

std::vector<std::uint8_t> inflate_raw(std::span<const std::uint8_t> in, std::size_t expected) {
  std::vector<std::uint8_t> out(expected);
  z_stream zs{};
  if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) fail("inflate init failed");
  zs.next_in = const_cast<Bytef*>(in.data());
  zs.avail_in = static_cast<uInt>(in.size());
  zs.next_out = out.data();
  zs.avail_out = static_cast<uInt>(out.size());
  const int rc = inflate(&zs, Z_FINISH);
  const auto produced = zs.total_out;
  inflateEnd(&zs);
  if (rc != Z_STREAM_END || produced != expected) fail("deflate stream corrupt");
  return out;
}

std::uint32_t crc_of(std::span<const std::uint8_t> data) {
  return static_cast<std::uint32_t>(
      crc32(crc32(0L, Z_NULL, 0), data.data(), static_cast<uInt>(data.size())));
}

void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}
void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

}  // namespace

std::vector<Entry> read_archive(std::span<const std::uint8_t> archive) {
  const Reader r(archive);
  if (archive.size() < kEndSize) fail("not a zip archive (too short)");
  // The end record sits in the last 22 + 65535 bytes (trailing comment).
  std::size_t end_at = archive.size();
  const std::size_t lowest = archive.size() > kEndSize + 0xffff ? archive.size() - kEndSize - 0xffff : 0;
  for (std::size_t at = archive.size() - kEndSize + 1; at-- > lowest;) {
    if (r.u32(at) == kEndSig) {
      end_at = at;
      break;
    }
  }
  if (end_at == archive.size()) {
    if (archive.size() >= 4 && r.u32(0) == kLocalSig) fail("archive truncated (no end record)");
    fail("not a zip archive");
  }
  const std::uint16_t entries = r.u16(end_at + 10);
  const std::uint32_t dir_size = r.u32(end_at + 12);
  const std::uint32_t dir_offset = r.u32(end_at + 16);
  if (entries == 0xffff || dir_offset == 0xffffffffu) fail("zip64 archives are not supported");
  if (static_cast<std::size_t>(dir_offset) + dir_size > end_at) fail("central directory out of range");

  std::vector<Entry> out;
  std::size_t at = dir_offset;
  for (std::uint16_t e = 0; e < entries; ++e) {
    if (r.u32(at) != kCentralSig) fail("central directory corrupt");
    const std::uint16_t flags = r.u16(at + 8);
    const std::uint16_t method = r.u16(at + 10);
    const std::uint32_t crc = r.u32(at + 16);
    const std::uint32_t comp_size = r.u32(at + 20);
    const std::uint32_t raw_size = r.u32(at + 24);
    const std::uint16_t name_len = r.u16(at + 28);
    const std::uint16_t extra_len = r.u16(at + 30);
    const std::uint16_t comment_len = r.u16(at + 32);
    const std::uint32_t local_at = r.u32(at + 42);
    const auto name_bytes = r.bytes(at + kCentralSize, name_len);
    if (flags & 0x1) fail("encrypted entries are not supported");

    if (r.u32(local_at) != kLocalSig) fail("local header corrupt");
    const std::size_t data_at = local_at + kLocalSize + r.u16(local_at + 26) + r.u16(local_at + 28);
    const auto payload = r.bytes(data_at, comp_size);

    Entry entry;
    entry.name.assign(name_bytes.begin(), name_bytes.end());
    if (method == 0) {
      if (comp_size != raw_size) fail("stored entry size mismatch");
      entry.data.assign(payload.begin(), payload.end());
    } else if (method == 8) {
      entry.data = inflate_raw(payload, raw_size);
    } else {
      fail("unsupported compression method " + std::to_string(method));
    }
    if (crc_of(entry.data) != crc) fail("CRC mismatch in entry '" + entry.name + "'");
    out.push_back(std::move(entry));
    at += kCentralSize + name_len + extra_len + comment_len;
  }
  return out;
}

std::vector<std::uint8_t> write_single(std::string_view entry_name,
                                       std::span<const std::uint8_t> data) {
  z_stream zs{};
  if (deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK) {
    fail("deflate init failed");
  }
  std::vector<std::uint8_t> packed(deflateBound(&zs, static_cast<uLong>(data.size())));
  zs.next_in = const_cast<Bytef*>(data.data());
  zs.avail_in = static_cast<uInt>(data.size());
  zs.next_out = packed.data();
  zs.avail_out = static_cast<uInt>(packed.size());
  const int rc = deflate(&zs, Z_FINISH);
  packed.resize(zs.total_out);
  deflateEnd(&zs);
  if (rc != Z_STREAM_END) fail("deflate failed");

  const std::uint32_t crc = crc_of(data);
  const auto name_len = static_cast<std::uint16_t>(entry_name.size());
  const auto raw = static_cast<std::uint32_t>(data.size());
  const auto comp = static_cast<std::uint32_t>(packed.size());
  // Fixed DOS timestamp (1980-01-01 00:00) keeps archives reproducible.
  const std::uint16_t dos_time = 0, dos_date = (0 << 9) | (1 << 5) | 1;

  std::vector<std::uint8_t> out;
  put32(out, kLocalSig);
  put16(out, 20);
  put16(out, 0);
  put16(out, 8);
  put16(out, dos_time);
  put16(out, dos_date);
  put32(out, crc);
  put32(out, comp);
  put32(out, raw);
  put16(out, name_len);
  put16(out, 0);
  out.insert(out.end(), entry_name.begin(), entry_name.end());
  out.insert(out.end(), packed.begin(), packed.end());

  const auto dir_at = static_cast<std::uint32_t>(out.size());
  put32(out, kCentralSig);
  put16(out, 20);
  put16(out, 20);
  put16(out, 0);
  put16(out, 8);
  put16(out, dos_time);
  put16(out, dos_date);
  put32(out, crc);
  put32(out, comp);
  put32(out, raw);
  put16(out, name_len);
  put16(out, 0);
  put16(out, 0);
  put16(out, 0);
  put16(out, 0);
  put32(out, 0);
  put32(out, 0);
  out.insert(out.end(), entry_name.begin(), entry_name.end());
  const auto dir_size = static_cast<std::uint32_t>(out.size()) - dir_at;

  put32(out, kEndSig);
  put16(out, 0);
  put16(out, 0);
  put16(out, 1);
  put16(out, 1);
  put32(out, dir_size);
  put32(out, dir_at);
  put16(out, 0);
  return out;
}

}  // namespace autopower::zip
