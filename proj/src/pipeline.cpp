#include "bianchi/pipeline.hpp"

#include <atomic>
#include <charconv>
#include <cmath>
#include <functional>
#include <sstream>
#include <thread>

namespace bianchi {

namespace {

using nlohmann::json;

[[noreturn]] void schema(const std::string& what) { throw Error(ErrorCode::Schema, what); }

double parse_decimal(std::string_view s) {
  while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
  while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || end != s.data() + s.size()) schema("not a number: \"" + std::string(s) + "\"");
  return v;
}

Mat3 mat3_of(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 3) schema(std::string(what) + " must be a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) {
    if (!j[r].is_array() || j[r].size() != 3) schema(std::string(what) + " must be a 3x3 array");
    for (int c = 0; c < 3; ++c) m(r, c) = parse_number(j[r][c]);
  }
  return m;
}

json mat_json(const Mat3& m) {
  json out = json::array();
  for (int r = 0; r < 3; ++r) out.push_back({m(r, 0), m(r, 1), m(r, 2)});
  return out;
}

json vec_json(const Vec3& v) { return {v(0), v(1), v(2)}; }

template <typename T>
json opt_json(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

json params_json(const ParamMap& p) {
  json out = json::object();
  for (const auto& [k, v] : p) out[k] = v;
  return out;
}

std::string params_text(const ParamMap& p) {
  std::ostringstream os;
  bool first = true;
  for (const auto& [k, v] : p) {
    os << (first ? "" : ",") << k << "=" << v;
    first = false;
  }
  return first ? "-" : os.str();
}

int sign_of(double k, double tol) { return std::abs(k) <= tol ? 0 : (k > 0 ? 1 : -1); }

const char* sign_name(int s) { return s > 0 ? "+" : s < 0 ? "-" : "0"; }

json skew_json(const Analysis& an) {
  json types = json::array();
  for (const auto& e : an.skew_types)
    types.push_back({{"type", isotropy_name(e.type)},
                     {"causal", causal_name(e.causal)},
                     {"invariant_line", vec_json(e.invariant_line)}});
  json basis = json::array();
  for (const auto& u : an.skew.basis) basis.push_back(mat_json(u));
  return {{"dim", an.skew.dim()}, {"basis", basis}, {"types", types}};
}

json normal_form_json(const NormalFormMatch& m) {
  return {{"form_id", m.form_id},     {"display", m.display},     {"params", params_json(m.params)},
          {"canonical", mat_json(m.canonical)}, {"scale", m.scale}, {"witness", mat_json(m.witness)},
          {"residual", m.residual},   {"boundary", m.boundary},   {"fallback", m.fallback}};
}

json killing_json(const KillingReport& k) {
  return {{"killing_dim", k.killing_dim},
          {"isotropy_type", opt_json(k.isotropy_type)},
          {"g_ideal_in_L", opt_json(k.g_ideal_in_L)},
          {"derived_killing", opt_json(k.derived_killing)},
          {"completeness", completeness_name(k.completeness)},
          {"completeness_reason", k.completeness_reason},
          {"constant_k", opt_json(k.constant_k)},
          {"table_row", opt_json(k.table_row)}};
}

// Runs jobs on a small pool; each job owns its output slot.
void run_pool(std::vector<std::function<void()>>& jobs, unsigned threads) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(jobs.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) jobs[i]();
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
}

struct Slot {
  json row;
  std::vector<std::string> bad;
};

void table2_row(const Table2Row& r, const AnalysisOptions& opt, Slot& out) {
  const NormalFormSpec& spec = atlas().form(r.form);
  json results = json::array();
  for (double p : atlas().params_for(r.family)) {
    const std::string where = r.id + (has_param(r.family) ? " param=" + std::to_string(p) : "");
    try {
      const Analysis an = analyze(preferred_algebra(r.family, p), spec.metric.evaluate(r.instance), opt);
      const KillingReport& k = an.killing;
      const int sign = k.constant_k ? sign_of(*k.constant_k, 1e-9) : 2;
      json res = {{"killing_dim", k.killing_dim},
                  {"constant_k", opt_json(k.constant_k)},
                  {"curvature", k.constant_k ? json(sign_name(sign)) : json(nullptr)},
                  {"ricci_residual", an.curvature.ricci_residual},
                  {"completeness", completeness_name(k.completeness)},
                  {"table_row", opt_json(k.table_row)}};
      if (has_param(r.family)) res["family_param"] = p;
      results.push_back(res);
      if (k.killing_dim != 6) out.bad.push_back(where + ": killing_dim " + std::to_string(k.killing_dim) + ", expected 6");
      if (sign != r.curvature_sign)
        out.bad.push_back(where + ": curvature sign differs from " + sign_name(r.curvature_sign));
      if (an.curvature.ricci_residual > 1e-8) out.bad.push_back(where + ": Ricci not proportional to g");
      if (k.completeness != Completeness::Complete) out.bad.push_back(where + ": completeness not complete");
      if (k.table_row != r.id) out.bad.push_back(where + ": matched " + k.table_row.value_or("no row"));
    } catch (const Error& e) {
      out.bad.push_back(where + ": " + error_name(e.code()) + ": " + e.what());
    }
  }
  out.row = {{"id", r.id},
             {"family", family_name(r.family)},
             {"metric", r.display},
             {"form", r.form},
             {"params", params_json(r.instance)},
             {"curvature", sign_name(r.curvature_sign)},
             {"results", results}};
}

void table3_row(const Table3Row& r, const AnalysisOptions& opt, Slot& out) {
  json instances = json::array(), excluded = json::array();
  for (double p : atlas().params_for(r.family)) {
    const LieAlgebra a = preferred_algebra(r.family, p);
    const std::string fam = has_param(r.family) ? " param=" + std::to_string(p) : "";
    for (const auto& s : r.samples) {
      const std::string where = r.id + fam + " " + params_text(s);
      try {
        const Analysis an = analyze(a, r.metric.evaluate(s), opt);
        const KillingReport& k = an.killing;
        json inst = {{"params", params_json(s)},
                     {"form", an.normal_form.form_id},
                     {"normal_form_params", params_json(an.normal_form.params)},
                     {"killing_dim", k.killing_dim},
                     {"isotropy", opt_json(k.isotropy_type)},
                     {"derived", opt_json(k.derived_killing)},
                     {"ideal", opt_json(k.g_ideal_in_L)},
                     {"skew_dim", an.skew.dim()},
                     {"skew_type", an.skew_types.size() == 1 ? json(table_isotropy_name(an.skew_types[0].type))
                                                             : json(nullptr)},
                     {"completeness", completeness_name(k.completeness)}};
        if (has_param(r.family)) inst["family_param"] = p;
        instances.push_back(inst);
        if (k.killing_dim != 4) out.bad.push_back(where + ": killing_dim " + std::to_string(k.killing_dim));
        if (k.table_row != r.id) out.bad.push_back(where + ": matched " + k.table_row.value_or("no row"));
        if (k.isotropy_type != r.isotropy) out.bad.push_back(where + ": isotropy " + k.isotropy_type.value_or("-"));
        if (k.derived_killing != r.derived) out.bad.push_back(where + ": derived " + k.derived_killing.value_or("-"));
        if (k.g_ideal_in_L != r.ideal) out.bad.push_back(where + ": ideal flag");
        // The isotropy is an inner skew derivation exactly when g is an ideal.
        if (an.skew.dim() != (r.ideal ? 1 : 0))
          out.bad.push_back(where + ": skew derivations dim " + std::to_string(an.skew.dim()));
        else if (r.ideal && table_isotropy_name(an.skew_types[0].type) != r.isotropy)
          out.bad.push_back(where + ": skew derivation type " + isotropy_name(an.skew_types[0].type));
      } catch (const Error& e) {
        out.bad.push_back(where + ": " + error_name(e.code()) + ": " + e.what());
      }
    }
    for (const auto& s : r.excluded) {
      const std::string where = r.id + fam + " excluded " + params_text(s);
      json ex = {{"params", params_json(s)}};
      if (has_param(r.family)) ex["family_param"] = p;
      try {
        const Analysis an = analyze(a, r.metric.evaluate(s), opt);
        ex["killing_dim"] = an.killing.killing_dim;
        ex["table_row"] = opt_json(an.killing.table_row);
        if (an.killing.killing_dim == 4) out.bad.push_back(where + ": excluded value reports killing_dim 4");
      } catch (const Error& e) {
        if (e.code() != ErrorCode::DegenerateMetric) out.bad.push_back(where + ": " + error_name(e.code()));
        ex["killing_dim"] = nullptr;
        ex["error"] = error_name(e.code());
      }
      excluded.push_back(ex);
    }
  }
  out.row = {{"id", r.id},           {"family", family_name(r.family)}, {"metric", r.display},
             {"isotropy", r.isotropy}, {"ideal", r.ideal},               {"derived", r.derived},
             {"instances", instances}, {"excluded", excluded}};
}

void normal_form_row(const NormalFormSpec& f, const AnalysisOptions& opt, Slot& out) {
  json params = json::object();
  for (const auto& [name, sign] : f.metric.params) params[name] = sign ? "sign" : "real";
  json families = json::array(), instances = json::array();
  for (Family fam : f.families) {
    families.push_back(family_name(fam));
    for (double p : atlas().params_for(fam)) {
      for (const auto& s : f.samples) {
        const std::string where = f.id + " " + std::string(family_name(fam)) +
                                  (has_param(fam) ? "(" + std::to_string(p) + ")" : "") + " " + params_text(s);
        try {
          const Analysis an = analyze(preferred_algebra(fam, p), f.metric.evaluate(s), opt);
          json inst = {{"family", family_name(fam)},
                       {"params", params_json(s)},
                       {"killing_dim", an.killing.killing_dim},
                       {"table_row", opt_json(an.killing.table_row)},
                       {"completeness", completeness_name(an.killing.completeness)}};
          if (has_param(fam)) inst["family_param"] = p;
          instances.push_back(inst);
          bool same = an.normal_form.form_id == f.id && an.normal_form.params.size() == s.size();
          for (const auto& [k, v] : s)
            same = same && an.normal_form.params.count(k) && std::abs(an.normal_form.params.at(k) - v) <= opt.tol.param;
          if (!same) out.bad.push_back(where + ": reduces to " + an.normal_form.form_id + " " + params_text(an.normal_form.params));
        } catch (const Error& e) {
          out.bad.push_back(where + ": " + error_name(e.code()) + ": " + e.what());
        }
      }
    }
  }
  out.row = {{"id", f.id}, {"families", families}, {"display", f.display}, {"params", params}, {"instances", instances}};
}

}  // namespace

double parse_number(const json& j) {
  double v;
  if (j.is_number()) {
    v = j.get<double>();
  } else if (j.is_string()) {
    const std::string s = j.get<std::string>();
    const auto slash = s.find('/');
    if (slash == std::string::npos) {
      v = parse_decimal(s);
    } else {
      const double den = parse_decimal(std::string_view(s).substr(slash + 1));
      if (den == 0.0) schema("zero denominator in \"" + s + "\"");
      v = parse_decimal(std::string_view(s).substr(0, slash)) / den;
    }
  } else {
    schema("expected a number, got " + j.dump());
  }
  if (!std::isfinite(v)) schema("non-finite number " + j.dump());
  return v;
}

AnalysisRequest parse_request(const json& j, const AnalysisOptions& defaults) {
  AnalysisRequest req;
  req.options = defaults;
  if (!j.is_object()) schema("request must be a JSON object");
  for (auto& [k, v] : j.items())
    if (k != "algebra" && k != "metric" && k != "options") schema("unknown request field \"" + k + "\"");
  if (!j.contains("algebra") || !j.contains("metric")) schema("request needs \"algebra\" and \"metric\"");

  const json& alg = j.at("algebra");
  if (!alg.is_object()) schema("\"algebra\" must be an object");
  const bool by_family = alg.contains("family"), by_structure = alg.contains("structure");
  if (by_family == by_structure) schema("\"algebra\" needs exactly one of \"family\" or \"structure\"");
  if (by_family) {
    for (auto& [k, v] : alg.items())
      if (k != "family" && k != "param") schema("unknown algebra field \"" + k + "\"");
    if (!alg.at("family").is_string()) schema("\"family\" must be a string");
    const auto f = family_from_name(alg.at("family").get<std::string>());
    if (!f) schema("unknown family " + alg.at("family").dump());
    double p = 0.0;
    if (has_param(*f)) {
      if (!alg.contains("param")) schema(std::string(family_name(*f)) + " needs \"param\"");
      p = parse_number(alg.at("param"));
      if (*f == Family::h_lambda && !(std::abs(p) < 1.0 && p != 0.0)) schema("h_lambda needs 0 < |param| < 1");
      if (*f == Family::e_mu && !(p > 0.0)) schema("e_mu needs param > 0");
      req.family_param = p;
    } else if (alg.contains("param")) {
      schema(std::string(family_name(*f)) + " takes no \"param\"");
    }
    req.family = f;
    req.algebra = preferred_algebra(*f, p);
  } else {
    for (auto& [k, v] : alg.items())
      if (k != "structure") schema("unknown algebra field \"" + k + "\"");
    const json& c = alg.at("structure");
    LieAlgebra::Structure st;
    if (!c.is_array() || c.size() != 3) schema("\"structure\" must be a 3x3x3 array");
    for (int i = 0; i < 3; ++i) {
      if (!c[i].is_array() || c[i].size() != 3) schema("\"structure\" must be a 3x3x3 array");
      for (int k = 0; k < 3; ++k) {
        if (!c[i][k].is_array() || c[i][k].size() != 3) schema("\"structure\" must be a 3x3x3 array");
        for (int l = 0; l < 3; ++l) st[i][k][l] = parse_number(c[i][k][l]);
      }
    }
    req.algebra = LieAlgebra::from_structure(st);
  }

  req.metric = mat3_of(j.at("metric"), "\"metric\"");
  const double big = req.metric.cwiseAbs().maxCoeff();
  if ((req.metric - req.metric.transpose()).cwiseAbs().maxCoeff() > 1e-12 * big) schema("metric is not symmetric");

  if (j.contains("options")) {
    const json& o = j.at("options");
    if (!o.is_object()) schema("\"options\" must be an object");
    AnalysisOptions& opt = req.options;
    for (auto& [k, v] : o.items()) {
      if (k == "eps_jac") opt.tol.jacobi = parse_number(v);
      else if (k == "eps_rank") opt.tol.rank = parse_number(v);
      else if (k == "horizon") opt.probe.horizon = parse_number(v);
      else if (k == "tol") opt.probe.tol = parse_number(v);
      else if (k == "seed") {
        if (!v.is_number_unsigned()) schema("\"seed\" must be a non-negative integer");
        opt.seed = v.get<std::uint64_t>();
      } else schema("unknown option \"" + k + "\"");
    }
  }
  return req;
}

AnalysisRequest parse_request_text(const std::string& text, const AnalysisOptions& defaults) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    schema(std::string("invalid JSON: ") + e.what());
  }
  return parse_request(j, defaults);
}

Analysis analyze(const LieAlgebra& a, const Mat3& m, const AnalysisOptions& opt, bool probe) {
  require_jacobi(a, opt.tol.jacobi);
  const Metric g(m, opt.tol.rank);
  Analysis an;
  an.bianchi = classify(a, opt.tol);
  an.curvature = curvature_report(a, g, opt.seed, opt.tol.rank, opt.tol.ricci);
  an.skew = skew_derivations(a, g, opt.tol);
  for (const Mat3& u : an.skew.basis) an.skew_types.push_back(classify_type(u, g, opt.tol));
  ReduceOptions ro;
  ro.seed = opt.seed;
  ro.tol = opt.tol;
  an.normal_form = reduce(a, m, an.bianchi, ro);
  an.killing = match_tables(an.normal_form, an.curvature, opt.tol);
  if (probe) an.probe = sweep(a, g, opt.probe, opt.reach);
  return an;
}

json probe_json(const SweepResult& s, const AnalysisOptions& opt) {
  json verdicts = json::array();
  const auto& dirs = probe_directions();
  for (std::size_t i = 0; i < s.verdicts.size(); ++i) {
    const ProbeVerdict& v = s.verdicts[i];
    verdicts.push_back({{"direction", vec_json(dirs[i])},
                        {"outcome", outcome_name(v.outcome)},
                        {"max_speed", v.max_speed},
                        {"blowup_time", opt_json(v.blowup_time)},
                        {"energy_drift", v.energy_drift},
                        {"steps", v.steps}});
  }
  return {{"horizon", opt.probe.horizon},
          {"tol", opt.probe.tol},
          {"initial_speed", opt.reach / opt.probe.horizon},
          {"directions", s.verdicts.size()},
          {"bounded", s.bounded},
          {"blowup", s.blowups},
          {"inconclusive", s.inconclusive},
          {"outcome", outcome_name(s.overall())},
          {"verdicts", verdicts}};
}

json report_json(const AnalysisRequest& req, const Analysis& an) {
  json input = {{"metric", mat_json(req.metric)}};
  json structure = json::array();
  for (int i = 0; i < 3; ++i) {
    json plane = json::array();
    for (int j = 0; j < 3; ++j) plane.push_back(vec_json(req.algebra.bracket_basis(i, j)));
    structure.push_back(plane);
  }
  input["structure"] = structure;
  if (req.family) input["family"] = family_name(*req.family);
  if (req.family_param) input["param"] = *req.family_param;

  const BianchiClass& b = an.bianchi;
  json bianchi = {{"family", family_name(b.tag)},
                  {"param", opt_json(b.param)},
                  {"unimodular", unimodular(req.algebra, req.options.tol.rank)},
                  {"basis_change", mat_json(b.basis_change)},
                  {"boundary", b.boundary}};
  if (!b.note.empty()) bianchi["note"] = b.note;

  const CurvatureReport<double>& c = an.curvature;
  json curvature = {{"ricci", mat_json(c.ricci)},
                    {"scalar", c.scalar},
                    {"ricci_residual", c.ricci_residual},
                    {"constant_k", opt_json(c.constant_k)},
                    {"sectional_samples", c.sectional_samples.size()},
                    {"samples_agree", c.samples_agree}};

  json out = {{"schema_version", kSchemaVersion},
              {"input", input},
              {"bianchi", bianchi},
              {"curvature", curvature},
              {"skew_derivations", skew_json(an)},
              {"normal_form", normal_form_json(an.normal_form)},
              {"killing", killing_json(an.killing)},
              {"seed", req.options.seed}};
  if (an.probe) out["probe"] = probe_json(*an.probe, req.options);
  return out;
}

int exit_code(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema:
    case ErrorCode::InvalidAlpha: return 2;
    case ErrorCode::NotJacobi: return 3;
    case ErrorCode::DegenerateInput:
    case ErrorCode::DegenerateMetric:
    case ErrorCode::DegeneratePlane:
    case ErrorCode::NotSkew:
    case ErrorCode::ZeroMatrix: return 4;
    case ErrorCode::ReductionFailed: return 5;
    case ErrorCode::AtlasMismatch: return 6;
    case ErrorCode::ToleranceUnachievable: return 7;
    case ErrorCode::InconsistentCurvature: return 8;
  }
  return 1;
}

json error_json(ErrorCode code, const std::string& message) {
  return {{"schema_version", kSchemaVersion},
          {"error", {{"code", error_name(code)}, {"exit_code", exit_code(code)}, {"message", message}}}};
}

std::string table_isotropy_name(IsotropyType t) {
  return t == IsotropyType::Parabolic ? "nilpotent" : isotropy_name(t);
}

AtlasOutput build_atlas(const AnalysisOptions& opt, unsigned threads) {
  const Atlas& at = atlas();
  std::vector<Slot> t2(at.table2.size()), t3(at.table3.size()), nf(at.forms.size());
  std::vector<std::function<void()>> jobs;
  for (std::size_t i = 0; i < t2.size(); ++i) jobs.push_back([&, i] { table2_row(at.table2[i], opt, t2[i]); });
  for (std::size_t i = 0; i < t3.size(); ++i) jobs.push_back([&, i] { table3_row(at.table3[i], opt, t3[i]); });
  for (std::size_t i = 0; i < nf.size(); ++i) jobs.push_back([&, i] { normal_form_row(at.forms[i], opt, nf[i]); });
  run_pool(jobs, threads);

  AtlasOutput out;
  auto assemble = [&](std::vector<Slot>& slots) {
    json rows = json::array();
    for (auto& s : slots) {
      rows.push_back(std::move(s.row));
      out.mismatches.insert(out.mismatches.end(), s.bad.begin(), s.bad.end());
    }
    return json{{"schema_version", kSchemaVersion}, {"rows", rows}};
  };
  out.table2 = assemble(t2);
  out.table3 = assemble(t3);
  out.normal_forms = assemble(nf);
  return out;
}

}  // namespace bianchi
