#pragma once

#include <stdexcept>
#include <string>

namespace mosum {

// Error categories; the numeric values double as process exit codes.
enum class errc : int {
  config = 2,      // invalid option or parameter combination
  io = 3,          // file missing, unreadable, or unwritable
  numeric = 4,     // factorization / solver / overflow failure
  validation = 5,  // malformed or inconsistent input data
};

class error : public std::runtime_error {
 public:
  error(errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  errc code() const noexcept { return code_; }

 private:
  errc code_;
};

[[noreturn]] inline void fail(errc code, const std::string& what) { throw error(code, what); }

inline void require(bool ok, errc code, const std::string& what) {
  if (!ok) fail(code, what);
}

}  // namespace mosum
