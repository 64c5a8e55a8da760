#pragma once

#include <stdexcept>
#include <string>

namespace coordlab {

// Errors carry a stable machine-readable code plus a class that decides the
// CLI exit status: config errors exit 2, data errors exit 3.
enum class ErrorClass { config, data };

class Error : public std::runtime_error {
public:
  Error(std::string code, ErrorClass cls, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)), cls_(cls) {}

  const std::string& code() const { return code_; }
  ErrorClass error_class() const { return cls_; }

private:
  std::string code_;
  ErrorClass cls_;
};

[[noreturn]] inline void throw_config(const std::string& code, const std::string& msg) {
  throw Error(code, ErrorClass::config, msg);
}

[[noreturn]] inline void throw_data(const std::string& code, const std::string& msg) {
  throw Error(code, ErrorClass::data, msg);
}

}  // namespace coordlab
