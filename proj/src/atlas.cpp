#include "bianchi/atlas.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>

namespace bianchi {

namespace {

using nlohmann::json;

const char kAtlasText[] =
#include "bianchi/atlas_data.inc"
    ;

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::Schema, "atlas: " + what); }

Family family_of(const json& j) {
  auto f = family_from_name(j.get<std::string>());
  if (!f) schema("unknown family " + j.dump());
  return *f;
}

Mat3 matrix_of(const json& j) {
  Mat3 m;
  for (int r = 0; r < 3; ++r)
    for (int c = 0; c < 3; ++c) m(r, c) = j.at(r).at(c).get<double>();
  return m;
}

Constraint constraint_of(const json& j) {
  static const std::map<std::string, Constraint::Op> ops{
      {"==", Constraint::Op::Eq}, {"!=", Constraint::Op::Ne}, {"<", Constraint::Op::Lt},
      {"<=", Constraint::Op::Le}, {">", Constraint::Op::Gt}, {">=", Constraint::Op::Ge}};
  Constraint c;
  for (auto& [k, v] : j.at("expr").items()) c.expr[k] = v.get<double>();
  auto it = ops.find(j.at("op").get<std::string>());
  if (it == ops.end()) schema("bad operator " + j.at("op").dump());
  c.op = it->second;
  c.value = j.at("value").get<double>();
  return c;
}

std::vector<Constraint> constraints_of(const json& j) {
  std::vector<Constraint> out;
  for (const auto& c : j) out.push_back(constraint_of(c));
  return out;
}

ParamMap params_of(const json& j) {
  ParamMap p;
  for (auto& [k, v] : j.items()) p[k] = v.get<double>();
  return p;
}

std::vector<ParamMap> param_list(const json& j) {
  std::vector<ParamMap> out;
  for (const auto& p : j) out.push_back(params_of(p));
  return out;
}

MetricTemplate template_of(const json& params, const json& matrix) {
  MetricTemplate t;
  for (auto& [k, v] : params.items()) t.params.emplace_back(k, v.get<std::string>() == "sign");
  for (auto& [k, v] : matrix.items()) t.terms[k] = matrix_of(v);
  if (!t.terms.count("1")) t.terms["1"] = Mat3::Zero();
  for (const auto& [name, sign] : t.params)
    if (!t.terms.count(name)) schema("parameter without matrix: " + name);
  return t;
}

}  // namespace

double Constraint::lhs(const ParamMap& p) const {
  double s = 0.0;
  for (const auto& [k, c] : expr) {
    auto it = p.find(k);
    if (it == p.end()) return std::nan("");
    s += c * it->second;
  }
  return s;
}

bool Constraint::holds(const ParamMap& p, double tol) const {
  const double v = lhs(p);
  if (std::isnan(v)) return false;
  switch (op) {
    case Op::Eq: return std::abs(v - value) <= tol;
    case Op::Ne: return std::abs(v - value) > tol;
    case Op::Lt: return v < value - tol;
    case Op::Le: return v <= value + tol;
    case Op::Gt: return v > value + tol;
    case Op::Ge: return v >= value - tol;
  }
  return false;
}

bool all_hold(const std::vector<Constraint>& cs, const ParamMap& p, double tol) {
  for (const auto& c : cs)
    if (!c.holds(p, tol)) return false;
  return true;
}

Mat3 MetricTemplate::evaluate(const ParamMap& p) const {
  Mat3 m = terms.at("1");
  for (const auto& [name, sign] : params) m += p.at(name) * terms.at(name);
  return m;
}

ParamMap MetricTemplate::fit(const Mat3& m, const ParamMap& fixed) const {
  ParamMap out = fixed;
  Mat3 rest = m - terms.at("1");
  std::vector<std::string> free;
  for (const auto& [name, sign] : params) {
    if (sign)
      rest -= fixed.at(name) * terms.at(name);
    else
      free.push_back(name);
  }
  if (free.empty()) return out;
  Eigen::MatrixXd a(9, free.size());
  for (std::size_t k = 0; k < free.size(); ++k)
    a.col(k) = Eigen::Map<const Eigen::VectorXd>(terms.at(free[k]).data(), 9);
  Eigen::VectorXd x = a.colPivHouseholderQr().solve(Eigen::Map<const Eigen::VectorXd>(rest.data(), 9));
  for (std::size_t k = 0; k < free.size(); ++k) out[free[k]] = x(k);
  return out;
}

std::vector<ParamMap> MetricTemplate::sign_choices() const {
  std::vector<ParamMap> out{ParamMap{}};
  for (const auto& [name, sign] : params) {
    if (!sign) continue;
    std::vector<ParamMap> next;
    for (const auto& p : out)
      for (double s : {1.0, -1.0}) {
        ParamMap q = p;
        q[name] = s;
        next.push_back(q);
      }
    out = std::move(next);
  }
  return out;
}

bool NormalFormSpec::applies_to(Family f) const {
  return std::find(families.begin(), families.end(), f) != families.end();
}

bool NormalFormSpec::in_domain(const ParamMap& p, double tol) const {
  if (domain.empty()) return true;
  for (const auto& clause : domain)
    if (all_hold(clause, p, tol)) return true;
  return false;
}

const NormalFormSpec& Atlas::form(std::string_view id) const {
  for (const auto& f : forms)
    if (f.id == id) return f;
  throw Error(ErrorCode::Schema, "atlas: no normal form " + std::string(id));
}

std::vector<const NormalFormSpec*> Atlas::forms_for(Family f) const {
  std::vector<const NormalFormSpec*> out;
  for (const auto& s : forms)
    if (s.applies_to(f)) out.push_back(&s);
  return out;
}

std::vector<double> Atlas::params_for(Family f) const {
  auto it = family_samples.find(f);
  if (it == family_samples.end()) return {0.0};
  return it->second;
}

Atlas parse_atlas(std::string_view text) {
  Atlas a;
  try {
    json j = json::parse(text);
    a.schema_version = j.at("schema_version").get<std::string>();
    for (auto& [k, v] : j.at("family_samples").items())
      a.family_samples[family_of(json(k))] = v.get<std::vector<double>>();
    for (const auto& f : j.at("normal_forms")) {
      NormalFormSpec s;
      s.id = f.at("id").get<std::string>();
      for (const auto& fam : f.at("families")) s.families.push_back(family_of(fam));
      s.display = f.at("display").get<std::string>();
      s.metric = template_of(f.at("params"), f.at("matrix"));
      for (const auto& clause : f.at("domain")) s.domain.push_back(constraints_of(clause));
      s.samples = param_list(f.at("samples"));
      a.forms.push_back(std::move(s));
    }
    for (const auto& r : j.at("table2")) {
      Table2Row row;
      row.id = r.at("id").get<std::string>();
      row.family = family_of(r.at("family"));
      row.display = r.at("display").get<std::string>();
      row.form = r.at("form").get<std::string>();
      row.where = constraints_of(r.at("where"));
      const std::string sign = r.at("curvature").get<std::string>();
      row.curvature_sign = sign == "+" ? 1 : sign == "-" ? -1 : 0;
      row.instance = params_of(r.at("instance"));
      a.form(row.form);
      a.table2.push_back(std::move(row));
    }
    for (const auto& r : j.at("table3")) {
      Table3Row row;
      row.id = r.at("id").get<std::string>();
      row.family = family_of(r.at("family"));
      row.display = r.at("display").get<std::string>();
      for (const auto& m : r.at("match")) {
        row.match.push_back({m.at("form").get<std::string>(), constraints_of(m.at("where"))});
        a.form(row.match.back().form);
      }
      row.isotropy = r.at("isotropy").get<std::string>();
      row.derived = r.at("derived").get<std::string>();
      row.ideal = r.at("ideal").get<bool>();
      if (r.contains("metric_form"))
        row.metric = a.form(r.at("metric_form").get<std::string>()).metric;
      else
        row.metric = template_of(r.at("params"), r.at("metric"));
      row.samples = param_list(r.at("samples"));
      row.excluded = param_list(r.at("excluded"));
      a.table3.push_back(std::move(row));
    }
    for (const auto& c : j.at("completeness")) {
      CompletenessFact f;
      if (c.contains("families")) {
        f.families.emplace();
        for (const auto& fam : c.at("families")) f.families->push_back(family_of(fam));
      }
      if (c.contains("form")) f.form = c.at("form").get<std::string>();
      if (c.contains("where")) f.where = constraints_of(c.at("where"));
      f.definite_only = c.value("signature", "") == "definite";
      f.value = c.at("value").get<std::string>();
      f.reason = c.at("reason").get<std::string>();
      a.completeness.push_back(std::move(f));
    }
  } catch (const json::exception& e) {
    schema(e.what());
  }
  return a;
}

const Atlas& atlas() {
  static const Atlas a = parse_atlas(kAtlasText);
  return a;
}

}  // namespace bianchi
