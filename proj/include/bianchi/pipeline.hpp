#pragma once

#include "bianchi/geodesic_probe.hpp"
#include "bianchi/isotropy.hpp"
#include "bianchi/normal_form.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bianchi {

inline constexpr const char* kSchemaVersion = "1.0";

struct AnalysisOptions {
  Tolerances tol;
  std::uint64_t seed = 0x0b17ULL;
  ProbeOptions probe;
  double reach = 8.0;
};

/// Parsed analysis request. Numbers may be JSON numbers or strings such as "-3/4".
struct AnalysisRequest {
  LieAlgebra algebra;
  Mat3 metric = Mat3::Identity();
  std::optional<Family> family;
  std::optional<double> family_param;
  AnalysisOptions options;
};

/// Throws Error(Schema) on malformed input. Options in the request override `defaults`.
AnalysisRequest parse_request(const nlohmann::json& j, const AnalysisOptions& defaults = {});
AnalysisRequest parse_request_text(const std::string& text, const AnalysisOptions& defaults = {});

/// Accepts a JSON number or a decimal/rational string.
double parse_number(const nlohmann::json& j);

struct Analysis {
  BianchiClass bianchi;
  CurvatureReport<double> curvature;
  SkewDerivationSpace skew;
  std::vector<IsotropyElement> skew_types;
  NormalFormMatch normal_form;
  KillingReport killing;
  std::optional<SweepResult> probe;
};

Analysis analyze(const LieAlgebra& a, const Mat3& g, const AnalysisOptions& opt = {}, bool probe = false);
inline Analysis analyze(const AnalysisRequest& r, bool probe = false) {
  return analyze(r.algebra, r.metric, r.options, probe);
}

nlohmann::json report_json(const AnalysisRequest& req, const Analysis& an);
nlohmann::json probe_json(const SweepResult& s, const AnalysisOptions& opt);

int exit_code(ErrorCode code);
nlohmann::json error_json(ErrorCode code, const std::string& message);

/// Table 3 spells the parabolic type "nilpotent".
std::string table_isotropy_name(IsotropyType t);

struct AtlasOutput {
  nlohmann::json table2, table3, normal_forms;
  std::vector<std::string> mismatches;  // one line per offending row
};

/// Re-derives every table row by running the pipeline on its canonical
/// inputs and compares with the shipped expectations.
AtlasOutput build_atlas(const AnalysisOptions& opt = {}, unsigned threads = 0);

}  // namespace bianchi
