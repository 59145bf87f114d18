#pragma once

#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <vector>

#include <zlib.h>

#include "crea/error.hpp"

namespace crea {

using Bytes = std::vector<unsigned char>;

inline Bytes read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return Bytes(std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>());
}

inline void write_file(const std::string& path, const Bytes& data) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(data.data()), static_cast<std::streamsize>(data.size()));
  if (!out) throw Error("cannot write " + path);
}

namespace detail {

inline std::uint32_t le16(const Bytes& b, std::size_t at) {
  if (at + 2 > b.size()) throw FormatError("zip: truncated record");
  return static_cast<std::uint32_t>(b[at]) | static_cast<std::uint32_t>(b[at + 1]) << 8;
}

inline std::uint32_t le32(const Bytes& b, std::size_t at) {
  if (at + 4 > b.size()) throw FormatError("zip: truncated record");
  return le16(b, at) | le16(b, at + 2) << 16;
}

inline void put16(Bytes& b, std::uint32_t v) {
  b.push_back(static_cast<unsigned char>(v & 0xff));
  b.push_back(static_cast<unsigned char>((v >> 8) & 0xff));
}

inline void put32(Bytes& b, std::uint32_t v) {
  put16(b, v & 0xffff);
  put16(b, v >> 16);
}

inline std::uint32_t crc(const unsigned char* p, std::size_t n) {
  uLong c = crc32(0L, Z_NULL, 0);
  while (n > 0) {
    const uInt chunk = n > 0x40000000u ? 0x40000000u : static_cast<uInt>(n);
    c = crc32(c, p, chunk);
    p += chunk;
    n -= chunk;
  }
  return static_cast<std::uint32_t>(c);
}

}  // namespace detail

/// Read-only view of a zip archive held in memory. Supports stored and
/// deflated entries; no zip64, no encryption.
class ZipArchive {
 public:
  explicit ZipArchive(Bytes data) : data_(std::move(data)) { index(); }

  static ZipArchive open(const std::string& path) { return ZipArchive(read_file(path)); }

  bool contains(const std::string& name) const { return entries_.count(name) != 0; }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    for (const auto& [n, e] : entries_) out.push_back(n);
    return out;
  }

  Bytes read(const std::string& name) const {
    const auto it = entries_.find(name);
    if (it == entries_.end()) throw UnknownId(name, "archive entry");
    const Entry& e = it->second;
    const std::size_t lh = e.local_offset;
    if (detail::le32(data_, lh) != 0x04034b50) throw FormatError("zip: bad local header for " + name);
    const std::size_t start = lh + 30 + detail::le16(data_, lh + 26) + detail::le16(data_, lh + 28);
    if (start + e.compressed > data_.size()) throw FormatError("zip: entry data out of range for " + name);
    const unsigned char* src = data_.data() + start;

    Bytes out;
    if (e.method == 0) {
      out.assign(src, src + e.compressed);
    } else if (e.method == 8) {
      out.resize(e.size);
      z_stream zs{};
      if (inflateInit2(&zs, -MAX_WBITS) != Z_OK) throw Error("zip: inflateInit failed");
      zs.next_in = const_cast<unsigned char*>(src);
      zs.avail_in = static_cast<uInt>(e.compressed);
      zs.next_out = out.data();
      zs.avail_out = static_cast<uInt>(out.size());
      const int rc = inflate(&zs, Z_FINISH);
      const auto produced = zs.total_out;
      inflateEnd(&zs);
      if (rc != Z_STREAM_END || produced != e.size) throw FormatError("zip: corrupt deflate data in " + name);
    } else {
      throw FormatError("zip: unsupported compression method " + std::to_string(e.method) + " for " + name);
    }
    if (detail::crc(out.data(), out.size()) != e.crc) throw FormatError("zip: checksum mismatch in " + name);
    return out;
  }

  std::string read_text(const std::string& name) const {
    const Bytes b = read(name);
    return std::string(b.begin(), b.end());
  }

 private:
  struct Entry {
    std::uint32_t method = 0;
    std::uint32_t crc = 0;
    std::uint32_t compressed = 0;
    std::uint32_t size = 0;
    std::uint32_t local_offset = 0;
  };

  void index() {
    if (data_.size() < 22) throw FormatError("zip: not a zip archive");
    std::size_t eocd = std::string::npos;
    const std::size_t lowest = data_.size() > 22 + 0xffff ? data_.size() - 22 - 0xffff : 0;
    for (std::size_t i = data_.size() - 22 + 1; i-- > lowest;)
      if (detail::le32(data_, i) == 0x06054b50) {
        eocd = i;
        break;
      }
    if (eocd == std::string::npos) throw FormatError("zip: end of central directory not found");
    const std::uint32_t count = detail::le16(data_, eocd + 10);
    std::size_t p = detail::le32(data_, eocd + 16);
    for (std::uint32_t k = 0; k < count; ++k) {
      if (detail::le32(data_, p) != 0x02014b50) throw FormatError("zip: bad central directory entry");
      Entry e;
      const std::uint32_t flags = detail::le16(data_, p + 8);
      e.method = detail::le16(data_, p + 10);
      e.crc = detail::le32(data_, p + 16);
      e.compressed = detail::le32(data_, p + 20);
      e.size = detail::le32(data_, p + 24);
      const std::uint32_t name_len = detail::le16(data_, p + 28);
      const std::uint32_t extra_len = detail::le16(data_, p + 30);
      const std::uint32_t comment_len = detail::le16(data_, p + 32);
      e.local_offset = detail::le32(data_, p + 42);
      if (p + 46 + name_len > data_.size()) throw FormatError("zip: truncated central directory");
      std::string name(reinterpret_cast<const char*>(data_.data() + p + 46), name_len);
      if (flags & 1u) throw FormatError("zip: encrypted entry " + name);
      if (e.compressed == 0xffffffffu || e.size == 0xffffffffu) throw FormatError("zip: zip64 entry " + name);
      if (!name.empty() && name.back() != '/') entries_[name] = e;
      p += 46 + name_len + extra_len + comment_len;
    }
  }

  Bytes data_;
  std::map<std::string, Entry> entries_;
};

/// Builds a zip archive in memory.
class ZipWriter {
 public:
  void add(const std::string& name, const Bytes& content, bool compress = true) {
    Bytes payload;
    std::uint32_t method = 0;
    if (compress && !content.empty()) {
      uLong bound = compressBound(static_cast<uLong>(content.size()));
      payload.resize(bound);
      z_stream zs{};
      if (deflateInit2(&zs, Z_BEST_COMPRESSION, Z_DEFLATED, -MAX_WBITS, 8, Z_DEFAULT_STRATEGY) != Z_OK)
        throw Error("zip: deflateInit failed");
      zs.next_in = const_cast<unsigned char*>(content.data());
      zs.avail_in = static_cast<uInt>(content.size());
      zs.next_out = payload.data();
      zs.avail_out = static_cast<uInt>(payload.size());
      const int rc = deflate(&zs, Z_FINISH);
      payload.resize(zs.total_out);
      deflateEnd(&zs);
      if (rc != Z_STREAM_END) throw Error("zip: deflate failed");
      method = 8;
    } else {
      payload = content;
    }
    const std::uint32_t crc = detail::crc(content.data(), content.size());
    Central c{name, method, crc, static_cast<std::uint32_t>(payload.size()), static_cast<std::uint32_t>(content.size()),
              static_cast<std::uint32_t>(out_.size())};
    detail::put32(out_, 0x04034b50);
    detail::put16(out_, 20);
    detail::put16(out_, 0);
    detail::put16(out_, method);
    detail::put16(out_, 0);
    detail::put16(out_, 0x21);
    detail::put32(out_, crc);
    detail::put32(out_, c.compressed);
    detail::put32(out_, c.size);
    detail::put16(out_, static_cast<std::uint32_t>(name.size()));
    detail::put16(out_, 0);
    out_.insert(out_.end(), name.begin(), name.end());
    out_.insert(out_.end(), payload.begin(), payload.end());
    central_.push_back(std::move(c));
  }

  void add(const std::string& name, const std::string& text, bool compress = true) {
    add(name, Bytes(text.begin(), text.end()), compress);
  }

  Bytes finish() {
    Bytes out = out_;
    const auto dir_start = static_cast<std::uint32_t>(out.size());
    for (const auto& c : central_) {
      detail::put32(out, 0x02014b50);
      detail::put16(out, 20);
      detail::put16(out, 20);
      detail::put16(out, 0);
      detail::put16(out, c.method);
      detail::put16(out, 0);
      detail::put16(out, 0x21);
      detail::put32(out, c.crc);
      detail::put32(out, c.compressed);
      detail::put32(out, c.size);
      detail::put16(out, static_cast<std::uint32_t>(c.name.size()));
      detail::put16(out, 0);
      detail::put16(out, 0);
      detail::put16(out, 0);
      detail::put16(out, 0);
      detail::put32(out, 0);
      detail::put32(out, c.offset);
      out.insert(out.end(), c.name.begin(), c.name.end());
    }
    const auto dir_size = static_cast<std::uint32_t>(out.size()) - dir_start;
    detail::put32(out, 0x06054b50);
    detail::put16(out, 0);
    detail::put16(out, 0);
    detail::put16(out, static_cast<std::uint32_t>(central_.size()));
    detail::put16(out, static_cast<std::uint32_t>(central_.size()));
    detail::put32(out, dir_size);
    detail::put32(out, dir_start);
    detail::put16(out, 0);
    return out;
  }

 private:
  struct Central {
    std::string name;
    std::uint32_t method;
    std::uint32_t crc;
    std::uint32_t compressed;
    std::uint32_t size;
    std::uint32_t offset;
  };

  Bytes out_;
  std::vector<Central> central_;
};

}  // namespace crea
