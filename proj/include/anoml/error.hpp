#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace anoml {

// Every module reports failures as Error<ModuleErrc>; the code is what
// callers branch on, what() carries a human-readable detail.
template <typename Code>
class Error : public std::runtime_error {
 public:
  Error(Code code, const std::string& detail)
      : std::runtime_error(detail), code_(code) {}

  Code code() const noexcept { return code_; }

 private:
  Code code_;
};

}  // namespace anoml
