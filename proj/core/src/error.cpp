#include "tipping/error.hpp"

namespace tipping {

TippingError::TippingError(ErrorKind kind, std::string code, const std::string& message,
                           std::vector<std::string> details)
    : std::runtime_error(code + ": " + message),
      kind_(kind),
      code_(std::move(code)),
      details_(std::move(details)) {}

void fail_validation(const std::string& code, const std::string& message) {
  throw TippingError(ErrorKind::validation, code, message);
}

void fail_numerical(const std::string& code, const std::string& message) {
  throw TippingError(ErrorKind::numerical, code, message);
}

void Violations::check(bool ok, const std::string& what) {
  if (!ok) items_.push_back(what);
}

void Violations::throw_if_any(const std::string& code) const {
  if (items_.empty()) return;
  std::string msg;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (i) msg += "; ";
    msg += items_[i];
  }
  throw TippingError(ErrorKind::validation, code, msg, items_);
}

}  // namespace tipping
