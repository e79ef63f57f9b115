#pragma once

#include <cstdint>
#include <cstring>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace jbw {

using u1 = std::uint8_t;
using u2 = std::uint16_t;
using u4 = std::uint32_t;
using u8 = std::uint64_t;
using i1 = std::int8_t;
using i2 = std::int16_t;
using i4 = std::int32_t;
using i8 = std::int64_t;

// Base of the library's error hierarchy. Every throwing path uses one of the
// subclasses below so callers can distinguish failure stages.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed structural value handed to the interner (empty name, bad segment).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Byte-level .class parsing failure; carries the offset of the offending read.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, std::size_t offset)
      : Error(msg + " (at offset " + std::to_string(offset) + ")"), offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_ = 0;
};

// Structure exceeds class-file format limits on write.
class EncodeError : public Error {
 public:
  using Error::Error;
};

// Bytecode decoding failure inside a method body; carries the pc.
class DecodeError : public Error {
 public:
  DecodeError(const std::string& msg, u4 pc)
      : Error(msg + " (at pc " + std::to_string(pc) + ")"), pc_(pc) {}
  u4 pc() const { return pc_; }

 private:
  u4 pc_ = 0;
};

class ClasspathError : public Error {
 public:
  using Error::Error;
};

class HierarchyError : public Error {
 public:
  using Error::Error;
};

// Field/method resolution failure per the JVM lookup rules.
class ResolutionError : public Error {
 public:
  enum class Kind { NoSuchField, NoSuchMethod, UnknownClass };
  ResolutionError(Kind kind, const std::string& msg) : Error(msg), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// IR transformation failure; carries the bytecode pc where it occurred.
class TransformError : public Error {
 public:
  TransformError(const std::string& msg, u4 pc)
      : Error(msg + " (at pc " + std::to_string(pc) + ")"), pc_(pc) {}
  u4 pc() const { return pc_; }

 private:
  u4 pc_ = 0;
};

class EvalError : public Error {
 public:
  using Error::Error;
};

class EmitError : public Error {
 public:
  using Error::Error;
};

// Big-endian cursor over a byte buffer. All reads are bounds-checked and
// raise ParseError with the current offset.
class ByteReader {
 public:
  explicit ByteReader(std::span<const u1> data, std::size_t base_offset = 0)
      : data_(data), base_(base_offset) {}

  std::size_t offset() const { return pos_; }
  std::size_t remaining() const { return data_.size() - pos_; }
  bool at_end() const { return pos_ == data_.size(); }

  u1 read_u1() {
    need(1);
    return data_[pos_++];
  }
  u2 read_u2() {
    need(2);
    u2 v = static_cast<u2>((data_[pos_] << 8) | data_[pos_ + 1]);
    pos_ += 2;
    return v;
  }
  u4 read_u4() {
    need(4);
    u4 v = (static_cast<u4>(data_[pos_]) << 24) | (static_cast<u4>(data_[pos_ + 1]) << 16) |
           (static_cast<u4>(data_[pos_ + 2]) << 8) | static_cast<u4>(data_[pos_ + 3]);
    pos_ += 4;
    return v;
  }
  i1 read_i1() { return static_cast<i1>(read_u1()); }
  i2 read_i2() { return static_cast<i2>(read_u2()); }
  i4 read_i4() { return static_cast<i4>(read_u4()); }

  std::span<const u1> read_bytes(std::size_t n) {
    need(n);
    auto s = data_.subspan(pos_, n);
    pos_ += n;
    return s;
  }

  void skip(std::size_t n) { need(n), pos_ += n; }

 private:
  void need(std::size_t n) const {
    if (data_.size() - pos_ < n) throw ParseError("truncated stream", base_ + pos_);
  }
  std::span<const u1> data_;
  std::size_t pos_ = 0;
  std::size_t base_ = 0;
};

// Big-endian append-only buffer.
class ByteWriter {
 public:
  void write_u1(u1 v) { buf_.push_back(v); }
  void write_u2(u2 v) {
    buf_.push_back(static_cast<u1>(v >> 8));
    buf_.push_back(static_cast<u1>(v));
  }
  void write_u4(u4 v) {
    buf_.push_back(static_cast<u1>(v >> 24));
    buf_.push_back(static_cast<u1>(v >> 16));
    buf_.push_back(static_cast<u1>(v >> 8));
    buf_.push_back(static_cast<u1>(v));
  }
  void write_i1(i1 v) { write_u1(static_cast<u1>(v)); }
  void write_i2(i2 v) { write_u2(static_cast<u2>(v)); }
  void write_i4(i4 v) { write_u4(static_cast<u4>(v)); }
  void write_bytes(std::span<const u1> b) { buf_.insert(buf_.end(), b.begin(), b.end()); }
  void write_bytes(const std::vector<u1>& b) { buf_.insert(buf_.end(), b.begin(), b.end()); }

  // Patch a u2/u4 written earlier (used for back-filled lengths).
  void patch_u2(std::size_t at, u2 v) {
    buf_[at] = static_cast<u1>(v >> 8);
    buf_[at + 1] = static_cast<u1>(v);
  }
  void patch_u4(std::size_t at, u4 v) {
    buf_[at] = static_cast<u1>(v >> 24);
    buf_[at + 1] = static_cast<u1>(v >> 16);
    buf_[at + 2] = static_cast<u1>(v >> 8);
    buf_[at + 3] = static_cast<u1>(v);
  }

  std::size_t size() const { return buf_.size(); }
  const std::vector<u1>& bytes() const { return buf_; }
  std::vector<u1> take() { return std::move(buf_); }

 private:
  std::vector<u1> buf_;
};

}  // namespace jbw
