#pragma once

#include <stdexcept>
#include <string>

namespace ctrlhier {

// Base for every error raised by the library. Each module derives its own
// type carrying a module-specific code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctrlhier
