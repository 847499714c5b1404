#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tipping {

// Validation errors are caller mistakes (bad inputs, violated preconditions);
// numerical errors come from a solver that could not deliver.
enum class ErrorKind { validation, numerical };

class TippingError : public std::runtime_error {
 public:
  TippingError(ErrorKind kind, std::string code, const std::string& message,
               std::vector<std::string> details = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& code() const noexcept { return code_; }
  // Individual violations when several preconditions failed at once.
  const std::vector<std::string>& details() const noexcept { return details_; }

 private:
  ErrorKind kind_;
  std::string code_;
  std::vector<std::string> details_;
};

[[noreturn]] void fail_validation(const std::string& code, const std::string& message);
[[noreturn]] void fail_numerical(const std::string& code, const std::string& message);

// Collects every violated precondition before throwing, so a caller sees the
// full list instead of the first problem only.
class Violations {
 public:
  void check(bool ok, const std::string& what);
  bool empty() const { return items_.empty(); }
  const std::vector<std::string>& items() const { return items_; }
  void throw_if_any(const std::string& code = "invalid-input") const;

 private:
  std::vector<std::string> items_;
};

}  // namespace tipping
