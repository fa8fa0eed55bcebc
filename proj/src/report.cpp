#include "helfrich/report.hpp"

#include <algorithm>
#include <cmath>

namespace helfrich {

InequalityReport make_inequality(std::string name, double lhs, double rhs, double tol) {
  InequalityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.slack = rhs - lhs;
  r.tol = tol;
  r.pass = std::isfinite(r.slack) && r.slack >= -tol;
  return r;
}

IdentityReport make_identity(std::string name, double lhs, double rhs, double tol, double scale) {
  IdentityReport r;
  r.name = std::move(name);
  r.lhs = lhs;
  r.rhs = rhs;
  r.gap = lhs - rhs;
  double s = std::max({std::abs(lhs), std::abs(rhs), scale});
  r.relative_gap = s > 0 ? std::abs(r.gap) / s : 0.0;
  r.tol = tol;
  r.pass = std::isfinite(r.gap) && r.relative_gap <= tol;
  return r;
}

void to_json(nlohmann::json& j, const InequalityReport& r) {
  j = report_envelope(r.name, nlohmann::json::object(), {{"lhs", r.lhs}, {"rhs", r.rhs}, {"slack", r.slack}}, r.pass,
                      {{"slack_min", -r.tol}});
}

void to_json(nlohmann::json& j, const IdentityReport& r) {
  nlohmann::json values = {{"lhs", r.lhs}, {"rhs", r.rhs}, {"gap", r.gap}, {"relative_gap", r.relative_gap}};
  for (const auto& [k, v] : r.extra) values[k] = v;
  j = report_envelope(r.name, nlohmann::json::object(), values, r.pass, {{"relative_gap_max", r.tol}});
}

nlohmann::json report_envelope(const std::string& name, const nlohmann::json& inputs, const nlohmann::json& values,
                               bool pass, const nlohmann::json& tolerances) {
  return {{"name", name}, {"inputs", inputs}, {"values", values}, {"pass", pass}, {"tolerances", tolerances}};
}

}  // namespace helfrich
