// Command-line front end.
#include "bianchi/pipeline.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

using namespace bianchi;
using nlohmann::json;

namespace {

struct Globals {
  std::optional<std::uint64_t> seed;
  std::optional<double> eps_jac, eps_rank;
};

std::string read_input(const std::string& path) {
  if (path == "-") return {std::istreambuf_iterator<char>(std::cin), {}};
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Schema, "cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Command-line flags win over request options.
AnalysisRequest load(const std::string& path, const Globals& g) {
  AnalysisRequest req = parse_request_text(read_input(path));
  if (g.seed) req.options.seed = *g.seed;
  if (g.eps_jac) req.options.tol.jacobi = *g.eps_jac;
  if (g.eps_rank) req.options.tol.rank = *g.eps_rank;
  return req;
}

int fail(const Error& e) {
  std::cout << error_json(e.code(), e.what()).dump(2) << '\n';
  return exit_code(e.code());
}

int cmd_analyze(const std::string& path, const Globals& g) {
  const AnalysisRequest req = load(path, g);
  std::cout << report_json(req, analyze(req)).dump(2) << '\n';
  return 0;
}

int cmd_probe(const std::string& path, const Globals& g, std::optional<double> horizon, std::optional<double> tol,
              const std::string& csv) {
  AnalysisRequest req = load(path, g);
  if (horizon) req.options.probe.horizon = *horizon;
  if (tol) req.options.probe.tol = *tol;
  const Analysis an = analyze(req, true);
  json report = report_json(req, an);
  if (!csv.empty()) {
    // Export the first direction that blows up, or the first grid direction.
    const auto& v = an.probe->verdicts;
    std::size_t pick = 0;
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i].outcome == ProbeOutcome::Blowup) {
        pick = i;
        break;
      }
    ProbeOptions o = req.options.probe;
    o.record = true;
    const Vec3 v0 = (req.options.reach / o.horizon) * probe_directions()[pick];
    const ProbeRun run = integrate(req.algebra, Metric(req.metric, req.options.tol.rank), v0, o);
    std::ofstream out(csv);
    if (!out) throw Error(ErrorCode::Schema, "cannot write " + csv);
    write_csv(out, run.samples);
    report["probe"]["csv"] = {{"path", csv}, {"direction_index", pick}, {"rows", run.samples.size()}};
  }
  std::cout << report.dump(2) << '\n';
  return 0;
}

int cmd_atlas(const std::string& dir, const Globals& g) {
  AnalysisOptions opt;
  if (g.seed) opt.seed = *g.seed;
  if (g.eps_jac) opt.tol.jacobi = *g.eps_jac;
  if (g.eps_rank) opt.tol.rank = *g.eps_rank;
  const AtlasOutput at = build_atlas(opt);
  std::filesystem::create_directories(dir);
  for (const auto& [name, doc] : {std::pair{"table2.json", &at.table2}, std::pair{"table3.json", &at.table3},
                                  std::pair{"normal_forms.json", &at.normal_forms}}) {
    std::ofstream out(std::filesystem::path(dir) / name);
    if (!out) throw Error(ErrorCode::Schema, "cannot write " + (std::filesystem::path(dir) / name).string());
    out << doc->dump(2) << '\n';
  }
  json summary = {{"schema_version", kSchemaVersion},
                  {"out", dir},
                  {"table2_rows", at.table2["rows"].size()},
                  {"table3_rows", at.table3["rows"].size()},
                  {"normal_forms", at.normal_forms["rows"].size()}};
  if (!at.mismatches.empty()) {
    json e = error_json(ErrorCode::AtlasMismatch, std::to_string(at.mismatches.size()) + " mismatching rows");
    e["error"]["rows"] = at.mismatches;
    std::cout << e.dump(2) << '\n';
    return exit_code(ErrorCode::AtlasMismatch);
  }
  std::cout << summary.dump(2) << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Left-invariant metrics on 3-dimensional Lie groups"};
  app.require_subcommand(1);
  Globals g;
  std::uint64_t seed = 0;
  double eps_jac = 0, eps_rank = 0;
  auto* seed_opt = app.add_option("--seed", seed, "random seed")->check(CLI::NonNegativeNumber);
  auto* jac_opt = app.add_option("--eps-jac", eps_jac, "Jacobi residual tolerance")->check(CLI::PositiveNumber);
  auto* rank_opt = app.add_option("--eps-rank", eps_rank, "relative rank tolerance")->check(CLI::PositiveNumber);
  app.fallthrough();

  std::string file, out_dir = "atlas", csv;
  double horizon = 0, tol = 0;
  auto* analyze_cmd = app.add_subcommand("analyze", "analyze one request file");
  analyze_cmd->add_option("file", file, "request JSON, - for stdin")->required();
  auto* atlas_cmd = app.add_subcommand("atlas", "regenerate and check the tables");
  atlas_cmd->add_option("--out", out_dir, "output directory");
  auto* probe_cmd = app.add_subcommand("probe", "geodesic probe sweep");
  probe_cmd->add_option("file", file, "request JSON, - for stdin")->required();
  auto* horizon_opt = probe_cmd->add_option("--horizon", horizon, "time horizon")->check(CLI::PositiveNumber);
  auto* tol_opt = probe_cmd->add_option("--tol", tol, "integrator tolerance");
  probe_cmd->add_option("--csv", csv, "write one trajectory as CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cout << error_json(ErrorCode::Schema, e.what()).dump(2) << '\n';
    return exit_code(ErrorCode::Schema);
  }
  if (*seed_opt) g.seed = seed;
  if (*jac_opt) g.eps_jac = eps_jac;
  if (*rank_opt) g.eps_rank = eps_rank;

  try {
    if (*analyze_cmd) return cmd_analyze(file, g);
    if (*atlas_cmd) return cmd_atlas(out_dir, g);
    return cmd_probe(file, g, *horizon_opt ? std::optional(horizon) : std::nullopt,
                     *tol_opt ? std::optional(tol) : std::nullopt, csv);
  } catch (const Error& e) {
    return fail(e);
  } catch (const std::exception& e) {
    std::cout << json{{"schema_version", kSchemaVersion},
                      {"error", {{"code", "Internal"}, {"exit_code", 1}, {"message", e.what()}}}}
                     .dump(2)
              << '\n';
    return 1;
  }
}
