#include "jetfb/errors.hpp"

namespace jetfb {

const char* to_string(error_kind kind) {
  switch (kind) {
    case error_kind::domain: return "domain error";
    case error_kind::supersonic_input: return "supersonic input";
    case error_kind::parameter: return "parameter error";
    case error_kind::configuration: return "configuration error";
    case error_kind::invalid_lambda: return "invalid lambda";
    case error_kind::sonic_free_boundary: return "sonic free boundary";
    case error_kind::truncation_too_deep: return "truncation too deep";
    case error_kind::resolution: return "resolution error";
    case error_kind::qualitative_failure: return "qualitative failure";
    case error_kind::non_convergence: return "non-convergence";
    case error_kind::property_violation: return "property violation";
    case error_kind::cavitation: return "cavitation";
    case error_kind::fit_bracket: return "fit bracket failure";
  }
  return "unknown";
}

jetfb_error::jetfb_error(error_kind kind, const std::string& what)
    : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

void raise(error_kind kind, const std::string& what) { throw jetfb_error(kind, what); }

}  // namespace jetfb
