#pragma once

#include <stdexcept>
#include <string>

namespace splitree {

// Failure categories shared by the C++ core and the C API status codes.
enum class Errc {
  config = 1,
  domain = 2,
  out_of_table = 3,
  unsupported = 4,
  integrity = 5,
  not_identifiable = 6,
  empty = 7,
  io = 8,
  ambiguity = 9,
};

const char* errc_name(Errc c) noexcept;

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  auto code() const noexcept -> Errc { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what) {
  if (!cond) fail(code, what);
}

}  // namespace splitree
