#pragma once

#include "bianchi/lie_algebra.hpp"

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace bianchi {

using ParamMap = std::map<std::string, double>;

/// Linear condition sum(coef * param) op value.
struct Constraint {
  enum class Op { Eq, Ne, Lt, Le, Gt, Ge };
  std::map<std::string, double> expr;
  Op op = Op::Eq;
  double value = 0.0;

  double lhs(const ParamMap& p) const;
  bool holds(const ParamMap& p, double tol) const;
  bool near(const ParamMap& p, double tol) const { return std::abs(lhs(p) - value) <= tol; }
};

bool all_hold(const std::vector<Constraint>& cs, const ParamMap& p, double tol);

/// Metric template: constant part plus one matrix per parameter.
struct MetricTemplate {
  std::vector<std::pair<std::string, bool>> params;  // name, is_sign
  std::map<std::string, Mat3> terms;                 // key "1" is the constant part

  Mat3 evaluate(const ParamMap& p) const;
  /// Least-squares values of the continuous parameters for a given matrix,
  /// with sign parameters held at the values in `fixed`.
  ParamMap fit(const Mat3& m, const ParamMap& fixed) const;
  std::vector<ParamMap> sign_choices() const;
};

struct NormalFormSpec {
  std::string id;
  std::vector<Family> families;
  std::string display;
  MetricTemplate metric;
  std::vector<std::vector<Constraint>> domain;  // any clause; empty = unconstrained
  std::vector<ParamMap> samples;

  bool applies_to(Family f) const;
  bool in_domain(const ParamMap& p, double tol) const;
};

struct Table2Row {
  std::string id;
  Family family;
  std::string display;
  std::string form;
  std::vector<Constraint> where;
  int curvature_sign;  // -1, 0, +1
  ParamMap instance;
};

struct MatchClause {
  std::string form;
  std::vector<Constraint> where;
};

struct Table3Row {
  std::string id;
  Family family;
  std::string display;
  std::vector<MatchClause> match;
  std::string isotropy;  // elliptic | hyperbolic | nilpotent
  std::string derived;   // R2 | heis | sl2 | so3
  bool ideal;
  MetricTemplate metric;
  std::vector<ParamMap> samples;
  std::vector<ParamMap> excluded;
};

struct CompletenessFact {
  std::optional<std::vector<Family>> families;
  std::optional<std::string> form;
  std::vector<Constraint> where;
  bool definite_only = false;
  std::string value;  // complete | incomplete
  std::string reason;
};

struct Atlas {
  std::string schema_version;
  std::map<Family, std::vector<double>> family_samples;
  std::vector<NormalFormSpec> forms;
  std::vector<Table2Row> table2;
  std::vector<Table3Row> table3;
  std::vector<CompletenessFact> completeness;

  const NormalFormSpec& form(std::string_view id) const;
  std::vector<const NormalFormSpec*> forms_for(Family f) const;
  /// Parameter values used when a family has a continuous parameter.
  std::vector<double> params_for(Family f) const;
};

/// Parses an atlas document; throws Error(Schema) on malformed input.
Atlas parse_atlas(std::string_view json_text);

/// The atlas shipped with the library.
const Atlas& atlas();

}  // namespace bianchi
