/* Copyright 2026 The Explore Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

// Little-endian primitives shared by the matrix and snapshot formats.

#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <istream>
#include <ostream>
#include <string>
#include <string_view>

#include "explore/error.hpp"

namespace explore::io {

class BinaryWriter {
 public:
  explicit BinaryWriter(std::ostream& out) : out_(out) {}

  void bytes(std::string_view data) { out_.write(data.data(), static_cast<std::streamsize>(data.size())); }
  void u8(std::uint8_t v) { put(v, 1); }
  void u16(std::uint16_t v) { put(v, 2); }
  void u32(std::uint32_t v) { put(v, 4); }
  void u64(std::uint64_t v) { put(v, 8); }
  void i64(std::int64_t v) { put(static_cast<std::uint64_t>(v), 8); }
  void f32(float v) { u32(std::bit_cast<std::uint32_t>(v)); }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  void boolean(bool v) { u8(v ? 1 : 0); }

  // u32 byte length, then UTF-8 bytes.
  void str(std::string_view s) {
    u32(static_cast<std::uint32_t>(s.size()));
    bytes(s);
  }

 private:
  void put(std::uint64_t v, int width) {
    std::array<char, 8> buf{};
    for (int i = 0; i < width; ++i) buf[i] = static_cast<char>((v >> (8 * i)) & 0xFFU);
    out_.write(buf.data(), width);
  }

  std::ostream& out_;
};

class BinaryReader {
 public:
  explicit BinaryReader(std::istream& in) : in_(in) {}

  std::string bytes(std::size_t n) {
    std::string s(n, '\0');
    in_.read(s.data(), static_cast<std::streamsize>(n));
    if (static_cast<std::size_t>(in_.gcount()) != n) truncated();
    return s;
  }
  std::uint8_t u8() { return static_cast<std::uint8_t>(get(1)); }
  std::uint16_t u16() { return static_cast<std::uint16_t>(get(2)); }
  std::uint32_t u32() { return static_cast<std::uint32_t>(get(4)); }
  std::uint64_t u64() { return get(8); }
  std::int64_t i64() { return static_cast<std::int64_t>(get(8)); }
  float f32() { return std::bit_cast<float>(u32()); }
  double f64() { return std::bit_cast<double>(u64()); }
  bool boolean() {
    const auto v = u8();
    if (v > 1) throw Error(ErrorCode::kCorruptFile, "invalid boolean byte");
    return v == 1;
  }

  std::string str(std::size_t max_len = 1U << 20) {
    const auto n = u32();
    if (n > max_len) throw Error(ErrorCode::kCorruptFile, "string length out of range");
    return bytes(n);
  }

  // Bounds an element count read from the file before anything is allocated.
  std::uint32_t count(std::uint64_t limit, const char* what) {
    const auto n = u32();
    if (n > limit) throw Error(ErrorCode::kCorruptFile, std::string("implausible ") + what + " count");
    return n;
  }

  void expect_end() {
    if (in_.peek() != std::char_traits<char>::eof()) {
      throw Error(ErrorCode::kCorruptFile, "trailing bytes after payload");
    }
  }

 private:
  std::uint64_t get(int width) {
    std::array<unsigned char, 8> buf{};
    in_.read(reinterpret_cast<char*>(buf.data()), width);
    if (in_.gcount() != width) truncated();
    std::uint64_t v = 0;
    for (int i = 0; i < width; ++i) v |= static_cast<std::uint64_t>(buf[i]) << (8 * i);
    return v;
  }

  [[noreturn]] static void truncated() { throw Error(ErrorCode::kCorruptFile, "unexpected end of file"); }

  std::istream& in_;
};

}  // namespace explore::io
