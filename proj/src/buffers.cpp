// Part of the gpuir project, under the Apache License v2.0.
// See LICENSE for license information.
// SPDX-License-Identifier: Apache-2.0

#include "gpuir/buffers.hpp"

#include <charconv>
#include <cstdlib>
#include <cstring>

namespace gpuir {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' ||
                        s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  size_t start = 0;
  while (true) {
    size_t p = s.find(sep, start);
    if (p == std::string_view::npos) {
      out.push_back(s.substr(start));
      return out;
    }
    out.push_back(s.substr(start, p - start));
    start = p + 1;
  }
}

bool parse_int(std::string_view s, int64_t &out) {
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && p == s.data() + s.size();
}

// Decimal, hex-float (0x1.8p3), inf and nan forms.
bool parse_float_text(std::string_view s, bool f32, uint64_t &bits) {
  std::string buf(s);
  char *end = nullptr;
  if (f32) {
    float v = std::strtof(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || buf.empty())
      return false;
    uint32_t u;
    std::memcpy(&u, &v, 4);
    bits = u;
    return true;
  }
  double v = std::strtod(buf.c_str(), &end);
  if (end != buf.c_str() + buf.size() || buf.empty())
    return false;
  std::memcpy(&bits, &v, 8);
  return true;
}

std::string float_text(uint64_t bits, bool f32) {
  char buf[64];
  std::to_chars_result r;
  if (f32) {
    uint32_t u = uint32_t(bits);
    float v;
    std::memcpy(&v, &u, 4);
    r = std::to_chars(buf, buf + sizeof buf, v);
  } else {
    double v;
    std::memcpy(&v, &bits, 8);
    r = std::to_chars(buf, buf + sizeof buf, v);
  }
  return std::string(buf, r.ptr);
}

} // namespace

BufferFileResult parse_buffer_file(std::string_view text) {
  BufferFileResult result;
  int line_no = 0;
  for (std::string_view line : split(text, '\n')) {
    ++line_no;
    line = trim(line);
    if (line.empty() || line.front() == '#')
      continue;
    auto fail = [&](std::string msg) {
      result.errors.push_back("line " + std::to_string(line_no) + ": " +
                              std::move(msg));
    };

    auto fields = split(line, ':');
    if (fields.size() != 3) {
      fail("expected name:elemtype:values");
      continue;
    }
    BufferBinding b;
    b.arg_name = std::string(trim(fields[0]));
    if (b.arg_name.empty()) {
      fail("empty binding name");
      continue;
    }
    std::string_view ty = trim(fields[1]);
    bool f32 = false, f64 = false;
    if (ty == "i32")
      b.elem_type = Type::int_ty(32);
    else if (ty == "i64")
      b.elem_type = Type::int_ty(64);
    else if (ty == "f32")
      b.elem_type = Type::float_ty(32), f32 = true;
    else if (ty == "f64")
      b.elem_type = Type::float_ty(64), f64 = true;
    else {
      fail("unknown element type '" + std::string(ty) +
           "' (use i32, i64, f32 or f64)");
      continue;
    }

    std::string_view values = trim(fields[2]);
    bool bad = false;
    if (!values.empty()) {
      for (std::string_view v : split(values, ',')) {
        v = trim(v);
        if (f32 || f64) {
          uint64_t bits;
          if (!parse_float_text(v, f32, bits)) {
            fail("malformed float '" + std::string(v) + "'");
            bad = true;
            break;
          }
          b.values.push_back(bits);
        } else {
          int64_t x;
          if (!parse_int(v, x)) {
            fail("malformed integer '" + std::string(v) + "'");
            bad = true;
            break;
          }
          b.values.push_back(b.elem_type->bits == 32
                                 ? uint64_t(uint32_t(x))
                                 : uint64_t(x));
        }
      }
    }
    if (!bad)
      result.bindings.push_back(std::move(b));
  }
  return result;
}

std::string print_buffers(const std::vector<BufferBinding> &bindings) {
  std::string out;
  for (const auto &b : bindings) {
    out += b.arg_name + ":";
    bool f32 = b.elem_type->is_float() && b.elem_type->bits == 32;
    bool f64 = b.elem_type->is_float() && b.elem_type->bits == 64;
    out += f32   ? "f32"
           : f64 ? "f64"
                 : (b.elem_type->bits == 64 ? "i64" : "i32");
    out += ":";
    for (size_t i = 0; i < b.values.size(); ++i) {
      if (i)
        out += ",";
      if (f32 || f64)
        out += float_text(b.values[i], f32);
      else if (b.elem_type->bits == 64)
        out += std::to_string(int64_t(b.values[i]));
      else
        out += std::to_string(int32_t(uint32_t(b.values[i])));
    }
    out += "\n";
  }
  return out;
}

} // namespace gpuir
