#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace spz {

using key32 = std::uint32_t;

// Reserved key value. Inside the sort/merge datapath it compares greater
// than every valid key, so matrices with cols == kInvalidKey are rejected
// at ingestion and the code point never collides with a real column index.
inline constexpr key32 kInvalidKey = 0xFFFFFFFFu;

class error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class dimension_error : public error {
 public:
  using error::error;
};

class parse_error : public error {
 public:
  parse_error(const std::string& what, std::size_t line)
      : error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

class mem_fault : public error {
 public:
  mem_fault(const std::string& what, std::uint64_t addr)
      : error(what + " (addr 0x" + to_hex(addr) + ")"), addr_(addr) {}
  std::uint64_t addr() const noexcept { return addr_; }

 private:
  static std::string to_hex(std::uint64_t v) {
    static const char* digits = "0123456789abcdef";
    std::string s;
    do {
      s.insert(s.begin(), digits[v & 0xf]);
      v >>= 4;
    } while (v != 0);
    return s;
  }
  std::uint64_t addr_;
};

class plan_error : public error {
 public:
  using error::error;
};

class precondition_error : public error {
 public:
  using error::error;
};

}  // namespace spz
