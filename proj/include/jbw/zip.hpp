#pragma once

#include <zlib.h>

#include <map>
#include <string>
#include <vector>

#include "jbw/common.hpp"

namespace jbw {

// Just enough ZIP to read and write jars: stored and deflate entries, one
// central directory, no zip64, no encryption.
class ZipReader {
 public:
  explicit ZipReader(std::vector<u1> data) : data_(std::move(data)) { parse_directory(); }

  const std::map<std::string, std::size_t>& entries() const { return entries_; }
  bool has(const std::string& name) const { return entries_.count(name) != 0; }

  std::vector<u1> read(const std::string& name) const {
    auto it = entries_.find(name);
    if (it == entries_.end()) throw ClasspathError("no zip entry named '" + name + "'");
    return read_at(it->second);
  }

 private:
  struct Central {
    u2 method;
    u4 comp_size, uncomp_size, local_offset;
  };

  void parse_directory() {
    // EOCD: scan backwards for PK\x05\x06 within the trailing 64KB + 22.
    if (data_.size() < 22) throw ClasspathError("zip too small");
    std::size_t scan_floor = data_.size() > 0x10016 ? data_.size() - 0x10016 : 0;
    std::size_t eocd = data_.size();
    for (std::size_t i = data_.size() - 22 + 1; i-- > scan_floor;) {
      if (data_[i] == 0x50 && data_[i + 1] == 0x4b && data_[i + 2] == 0x05 && data_[i + 3] == 0x06) {
        eocd = i;
        break;
      }
    }
    if (eocd == data_.size()) throw ClasspathError("zip end-of-central-directory not found");
    u2 count = read_u2(eocd + 10);
    u4 cd_size = read_u4(eocd + 12);
    u4 cd_offset = read_u4(eocd + 16);
    if (cd_offset + cd_size > data_.size())
      throw ClasspathError("corrupt zip central directory bounds");

    std::size_t p = cd_offset;
    for (u2 i = 0; i < count; ++i) {
      if (p + 46 > data_.size() || read_u4(p) != 0x02014b50)
        throw ClasspathError("corrupt zip central directory entry");
      Central c;
      c.method = read_u2(p + 10);
      c.comp_size = read_u4(p + 20);
      c.uncomp_size = read_u4(p + 24);
      u2 name_len = read_u2(p + 28);
      u2 extra_len = read_u2(p + 30);
      u2 comment_len = read_u2(p + 32);
      c.local_offset = read_u4(p + 42);
      std::string name(reinterpret_cast<const char*>(data_.data() + p + 46), name_len);
      records_.push_back(c);
      entries_.emplace(std::move(name), records_.size() - 1);
      p += 46 + name_len + extra_len + comment_len;
    }
  }

  std::vector<u1> read_at(std::size_t record) const {
    const Central& c = records_[record];
    std::size_t p = c.local_offset;
    if (p + 30 > data_.size() || read_u4(p) != 0x04034b50)
      throw ClasspathError("corrupt zip local header");
    u2 name_len = read_u2(p + 26);
    u2 extra_len = read_u2(p + 28);
    std::size_t start = p + 30 + name_len + extra_len;
    if (start + c.comp_size > data_.size()) throw ClasspathError("zip entry overruns file");

    if (c.method == 0) {
      return std::vector<u1>(data_.begin() + start, data_.begin() + start + c.comp_size);
    }
    if (c.method != 8) throw ClasspathError("unsupported zip compression method");

    std::vector<u1> out(c.uncomp_size);
    z_stream zs{};
    if (inflateInit2(&zs, -15) != Z_OK) throw ClasspathError("inflate init failed");
    zs.next_in = const_cast<u1*>(data_.data() + start);
    zs.avail_in = c.comp_size;
    zs.next_out = out.data();
    zs.avail_out = static_cast<uInt>(out.size());
    int rc = inflate(&zs, Z_FINISH);
    inflateEnd(&zs);
    if (rc != Z_STREAM_END) throw ClasspathError("zip entry fails to inflate");
    return out;
  }

  u2 read_u2(std::size_t at) const { return static_cast<u2>(data_[at] | (data_[at + 1] << 8)); }
  u4 read_u4(std::size_t at) const {
    return static_cast<u4>(data_[at]) | (static_cast<u4>(data_[at + 1]) << 8) |
           (static_cast<u4>(data_[at + 2]) << 16) | (static_cast<u4>(data_[at + 3]) << 24);
  }

  std::vector<u1> data_;
  std::map<std::string, std::size_t> entries_;
  std::vector<Central> records_;
};

class ZipWriter {
 public:
  void add(const std::string& name, std::span<const u1> content, bool compress = false) {
    Entry e;
    e.name = name;
    e.uncomp_size = static_cast<u4>(content.size());
    e.crc = crc32(0, content.data(), static_cast<uInt>(content.size()));
    if (compress && !content.empty()) {
      uLongf bound = compressBound(static_cast<uLong>(content.size()));
      std::vector<u1> comp(bound);
      z_stream zs{};
      deflateInit2(&zs, Z_DEFAULT_COMPRESSION, Z_DEFLATED, -15, 8, Z_DEFAULT_STRATEGY);
      zs.next_in = const_cast<u1*>(content.data());
      zs.avail_in = static_cast<uInt>(content.size());
      zs.next_out = comp.data();
      zs.avail_out = static_cast<uInt>(comp.size());
      int rc = deflate(&zs, Z_FINISH);
      std::size_t written = comp.size() - zs.avail_out;
      deflateEnd(&zs);
      if (rc == Z_STREAM_END && written < content.size()) {
        comp.resize(written);
        e.method = 8;
        e.data = std::move(comp);
        entries_.push_back(std::move(e));
        return;
      }
    }
    e.method = 0;
    e.data.assign(content.begin(), content.end());
    entries_.push_back(std::move(e));
  }

  std::vector<u1> finish() const {
    std::vector<u1> out;
    auto put_u2 = [&](u2 v) {
      out.push_back(static_cast<u1>(v));
      out.push_back(static_cast<u1>(v >> 8));
    };
    auto put_u4 = [&](u4 v) {
      for (int i = 0; i < 4; ++i) out.push_back(static_cast<u1>(v >> (8 * i)));
    };
    std::vector<u4> offsets;
    for (const auto& e : entries_) {
      offsets.push_back(static_cast<u4>(out.size()));
      put_u4(0x04034b50);
      put_u2(20);
      put_u2(0);
      put_u2(e.method);
      put_u2(0);
      put_u2(0);
      put_u4(e.crc);
      put_u4(static_cast<u4>(e.data.size()));
      put_u4(e.uncomp_size);
      put_u2(static_cast<u2>(e.name.size()));
      put_u2(0);
      out.insert(out.end(), e.name.begin(), e.name.end());
      out.insert(out.end(), e.data.begin(), e.data.end());
    }
    u4 cd_start = static_cast<u4>(out.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) {
      const auto& e = entries_[i];
      put_u4(0x02014b50);
      put_u2(20);
      put_u2(20);
      put_u2(0);
      put_u2(e.method);
      put_u2(0);
      put_u2(0);
      put_u4(e.crc);
      put_u4(static_cast<u4>(e.data.size()));
      put_u4(e.uncomp_size);
      put_u2(static_cast<u2>(e.name.size()));
      put_u2(0);
      put_u2(0);
      put_u2(0);
      put_u2(0);
      put_u4(0);
      put_u4(offsets[i]);
      out.insert(out.end(), e.name.begin(), e.name.end());
    }
    u4 cd_size = static_cast<u4>(out.size()) - cd_start;
    put_u4(0x06054b50);
    put_u2(0);
    put_u2(0);
    put_u2(static_cast<u2>(entries_.size()));
    put_u2(static_cast<u2>(entries_.size()));
    put_u4(cd_size);
    put_u4(cd_start);
    put_u2(0);
    return out;
  }

 private:
  struct Entry {
    std::string name;
    u2 method = 0;
    u4 crc = 0;
    u4 uncomp_size = 0;
    std::vector<u1> data;
  };
  std::vector<Entry> entries_;
};

}  // namespace jbw
