#pragma once

#include <json.hpp>

#include <map>
#include <string>

namespace helfrich {

inline constexpr const char* kVersion = "0.1.0";
inline constexpr int kReportSchema = 1;

/// lhs <= rhs checks. slack = rhs - lhs; pass iff slack >= -tol.
struct InequalityReport {
  std::string name;
  double lhs = 0, rhs = 0, slack = 0, tol = 0;
  bool pass = false;
};

/// lhs == rhs checks. pass iff |lhs - rhs| <= tol * scale.
struct IdentityReport {
  std::string name;
  double lhs = 0, rhs = 0, gap = 0, relative_gap = 0, tol = 0;
  bool pass = false;
  std::map<std::string, double> extra;
};

InequalityReport make_inequality(std::string name, double lhs, double rhs, double tol);
IdentityReport make_identity(std::string name, double lhs, double rhs, double tol, double scale);

void to_json(nlohmann::json& j, const InequalityReport& r);
void to_json(nlohmann::json& j, const IdentityReport& r);

/// Shared schema: {name, inputs, values, pass, tolerances}.
nlohmann::json report_envelope(const std::string& name, const nlohmann::json& inputs, const nlohmann::json& values,
                               bool pass, const nlohmann::json& tolerances);

}  // namespace helfrich
