#include "fair/covmatrix.hpp"

#include <string>

#include "fair/errors.hpp"

namespace fair {

std::string_view to_string(CovMethod method) noexcept {
  switch (method) {
    case CovMethod::kFair: return "fair";
    case CovMethod::kRiemann: return "riemann";
    case CovMethod::kJh: return "jh";
  }
  return "unknown";
}

CovMethod parse_cov_method(std::string_view name) {
  if (name == "fair") return CovMethod::kFair;
  if (name == "riemann") return CovMethod::kRiemann;
  if (name == "jh") return CovMethod::kJh;
  throw ConfigError("unknown covariance method '" + std::string(name) + "'");
}

}  // namespace fair
