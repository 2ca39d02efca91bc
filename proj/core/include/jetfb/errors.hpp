#pragma once

#include <stdexcept>
#include <string>

namespace jetfb {

enum class error_kind {
  domain,
  supersonic_input,
  parameter,
  configuration,
  invalid_lambda,
  sonic_free_boundary,
  truncation_too_deep,
  resolution,
  qualitative_failure,
  non_convergence,
  property_violation,
  cavitation,
  fit_bracket,
};

const char* to_string(error_kind kind);

// Every failure raised by the library carries a kind so callers (the CLI in
// particular) can map it to an exit status without parsing messages.
class jetfb_error : public std::runtime_error {
 public:
  jetfb_error(error_kind kind, const std::string& what);
  error_kind kind() const noexcept { return kind_; }

 private:
  error_kind kind_;
};

[[noreturn]] void raise(error_kind kind, const std::string& what);

}  // namespace jetfb
