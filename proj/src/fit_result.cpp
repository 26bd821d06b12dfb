#include "betarestrict/fit_result.hpp"

#include "betarestrict/errors.hpp"

#include <algorithm>
#include <cctype>

namespace betarestrict {

std::string_view to_string(Method m) {
  switch (m) {
    case Method::BMLE: return "BMLE";
    case Method::BRE: return "BRE";
    case Method::BBUNE: return "BBUNE";
    case Method::BBIRE: return "BBIRE";
  }
  return "?";
}

Method parse_method(std::string_view label) {
  std::string upper(label);
  std::transform(upper.begin(), upper.end(), upper.begin(),
                 [](unsigned char c) { return static_cast<char>(std::toupper(c)); });
  for (Method m : kAllMethods) {
    if (to_string(m) == upper) return m;
  }
  throw DomainError("unknown estimator '" + std::string(label) + "' (expected bmle, bre, bbune or bbire)");
}

}  // namespace betarestrict
