#pragma once

#include "betarestrict/types.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace betarestrict {

enum class Method { BMLE, BRE, BBUNE, BBIRE };

inline constexpr std::array<Method, 4> kAllMethods{Method::BMLE, Method::BRE, Method::BBUNE,
                                                   Method::BBIRE};

std::string_view to_string(Method m);
/// Case-insensitive; throws DomainError on an unknown label.
Method parse_method(std::string_view label);

struct Diagnostics {
  std::optional<double> acceptance_rate;
  std::optional<VectorXd> rhat;
  std::optional<int> iterations;
  std::optional<double> ridge_k;
  std::vector<std::string> warnings;
};

/// Point estimates with per-coefficient standard deviations.
struct FitResult {
  VectorXd estimates;
  VectorXd sd;
  Method method = Method::BMLE;
  Diagnostics diagnostics;
};

}  // namespace betarestrict
