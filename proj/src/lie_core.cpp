#include "bianchi/lie_algebra.hpp"

namespace bianchi {

const char* error_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::Schema: return "SchemaError";
    case ErrorCode::NotJacobi: return "NotJacobi";
    case ErrorCode::DegenerateInput: return "DegenerateInput";
    case ErrorCode::DegenerateMetric: return "DegenerateMetric";
    case ErrorCode::DegeneratePlane: return "DegeneratePlane";
    case ErrorCode::NotSkew: return "NotSkew";
    case ErrorCode::ZeroMatrix: return "ZeroMatrix";
    case ErrorCode::ReductionFailed: return "ReductionFailed";
    case ErrorCode::InconsistentCurvature: return "InconsistentCurvature";
    case ErrorCode::InvalidAlpha: return "InvalidAlpha";
    case ErrorCode::ToleranceUnachievable: return "ToleranceUnachievable";
    case ErrorCode::AtlasMismatch: return "AtlasMismatch";
  }
  return "Unknown";
}

namespace {
constexpr std::array<std::string_view, 11> names{"R3",  "so3", "sl2", "heis", "euc2",    "sol",
                                                 "affR_plus_R", "h1", "psh", "h_lambda", "e_mu"};
}

std::string_view family_name(Family f) { return names[static_cast<std::size_t>(f)]; }

std::optional<Family> family_from_name(std::string_view name) {
  for (std::size_t i = 0; i < names.size(); ++i)
    if (names[i] == name) return static_cast<Family>(i);
  return std::nullopt;
}

}  // namespace bianchi
