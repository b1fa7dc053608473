#pragma once

// Command implementations behind the `hspace` tool. Each returns an exit code and
// the formatted report so the CLI front end stays a thin argument parser.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "hspace/catalog.hpp"
#include "hspace/geodesic.hpp"
#include "hspace/geometry.hpp"
#include "hspace/pencil.hpp"
#include "hspace/spec_io.hpp"

namespace hspace {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFail = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitAmbiguous = 3;

struct RunConfig {
  std::string spec_path;
  int n = 200;
  std::uint64_t seed = 1;
  double pass_tol = 1e-7;
  double cluster_tol = 1e-6;
  double abs_tol = 1e-10;
  double rel_tol = 1e-10;
  double drift_tol = 1e-7;
  std::string format = "json";
  // geodesic
  std::optional<Point> x0;
  std::optional<Tangent> v0;
  double t_end = 1.0;
  std::string csv_path;  // trajectory CSV written alongside the report
  // sweep
  int geodesics = 20;
  int root_points = 100;
};

struct CommandResult {
  int exit_code = kExitOk;
  std::string output;
};

namespace detail {

inline Json point_json(const Point& p) { return Json(p.c); }

inline Json pattern_json(const RootPattern& pat) {
  Json arr = Json::array();
  for (const auto& c : pat) arr.push_back({{"value", c.value}, {"multiplicity", c.multiplicity}});
  return arr;
}

inline CommandResult input_error(const std::string& command, const std::exception& ex) {
  Json j{{"command", command}, {"error", ex.what()}};
  if (const auto* pe = dynamic_cast<const ParseError*>(&ex)) j["offset"] = pe->offset();
  return {kExitInput, format_report(j)};
}

// Runs body, mapping unusable input (bad JSON, bad expressions, schema errors,
// exhausted sampling) to exit code 2.
inline CommandResult guarded(const std::string& command, const std::function<CommandResult()>& body) {
  try {
    return body();
  } catch (const ParseError& ex) {
    return input_error(command, ex);
  } catch (const SpecError& ex) {
    return input_error(command, ex);
  } catch (const ExhaustionError& ex) {
    return input_error(command, ex);
  } catch (const Error& ex) {
    return input_error(command, ex);
  }
}

inline Json validation_json(const ValidationReport& rep) {
  Json v = Json::array();
  for (const auto& x : rep.violations) v.push_back({{"code", x.code}, {"message", x.message}});
  Json j{{"violations", v}, {"points_checked", rep.points_checked}, {"ok", rep.ok()}};
  if (rep.signature)
    j["signature"] = {{"plus", rep.signature->plus},
                      {"minus", rep.signature->minus},
                      {"degenerate", rep.signature->degenerate},
                      {"constant", rep.signature_constant}};
  return j;
}

inline void require_valid(const HSpaceSpec& spec, const RunConfig& cfg) {
  const ValidationReport rep = validate_spec(spec, 200, cfg.seed);
  if (!rep.ok())
    throw SpecError("spec fails validation: " + rep.violations.front().code + " (" + rep.violations.front().message + ")");
}

inline Json residual_json(const VariantReport& vr) {
  Json vars = Json::array();
  for (std::size_t k = 0; k < vr.variants.size(); ++k) {
    const auto& r = vr.variants[k];
    Json e{{"variant", r.variant}, {"max", r.max},     {"rms", r.rms},
           {"pass", static_cast<bool>(vr.pass[k])}, {"n_points", r.n_points}, {"worst_index", r.worst_index}};
    if (r.worst_point) e["worst_point"] = point_json(*r.worst_point);
    vars.push_back(e);
  }
  Json j{{"variants", vars}, {"verdict", std::string(verdict_name(vr.verdict))}, {"pass_tol", vr.pass_tol}};
  j["passer"] = vr.passer ? Json(*vr.passer) : Json(nullptr);
  if (!vr.note.empty()) j["note"] = vr.note;
  return j;
}

inline int residual_exit(const VariantReport& vr) {
  switch (vr.verdict) {
    case VariantVerdict::Unique:
    case VariantVerdict::Degenerate: return kExitOk;
    case VariantVerdict::NonePass: return kExitFail;
    case VariantVerdict::Ambiguous: return kExitAmbiguous;
  }
  return kExitFail;
}

inline Json conservation_json(const ConservationReport& r) {
  return {{"I0", r.I0},         {"max_dI", r.max_dI}, {"rel_drift_I", r.rel_drift_I},
          {"N0", r.N0},         {"max_dN", r.max_dN}, {"rel_drift_N", r.rel_drift_N},
          {"steps", r.steps},   {"rejected", r.rejected}, {"status", std::string(status_name(r.status))}};
}

struct ConserveSummary {
  Json geodesics = Json::array();
  double worst_I = 0.0;
  double worst_N = 0.0;
  bool all_completed = true;
};

inline ConserveSummary run_conserve(const HSpaceSpec& spec, int n, std::uint64_t seed, const AdaptiveOptions& opt) {
  ConserveSummary s;
  for (int k = 0; k < n; ++k) {
    const RandomGeodesic g = random_geodesic(spec, k, seed, 1.0, opt);
    const ConservationReport r = conservation_check(g.trajectory);
    Json e = conservation_json(r);
    e["index"] = k;
    e["redraws"] = g.redraws;
    e["x0"] = point_json(g.start.x);
    e["v0"] = Json(g.start.v.c);
    s.geodesics.push_back(e);
    s.all_completed = s.all_completed && g.trajectory.ok();
    s.worst_I = std::max(s.worst_I, r.rel_drift_I);
    s.worst_N = std::max(s.worst_N, r.rel_drift_N);
  }
  return s;
}

inline AdaptiveOptions adaptive_options(const RunConfig& cfg) {
  AdaptiveOptions opt;
  opt.abs_tol = cfg.abs_tol;
  opt.rel_tol = cfg.rel_tol;
  return opt;
}

inline Json header(const std::string& command, const HSpaceSpec& spec) {
  return {{"command", command}, {"spec", spec.name}, {"type", std::string(type_tag(spec.type))},
          {"variant", std::string(spec.effective_variant())}};
}

}  // namespace detail

inline CommandResult cmd_validate(const RunConfig& cfg) {
  return detail::guarded("validate", [&] {
    const HSpaceSpec spec = load_spec(cfg.spec_path);
    const ValidationReport rep = validate_spec(spec, cfg.n, cfg.seed);
    Json j = detail::header("validate", spec);
    j.update(detail::validation_json(rep));
    j["seed"] = cfg.seed;
    return CommandResult{rep.ok() ? kExitOk : kExitFail, format_report(j)};
  });
}

inline CommandResult cmd_residual(const RunConfig& cfg) {
  return detail::guarded("residual", [&] {
    const HSpaceSpec spec = load_spec(cfg.spec_path);
    detail::require_valid(spec, cfg);
    const VariantReport vr = discriminate_variants(spec, cfg.n, cfg.seed, cfg.pass_tol);
    Json j = detail::header("residual", spec);
    j.update(detail::residual_json(vr));
    j["n"] = cfg.n;
    j["seed"] = cfg.seed;
    return CommandResult{detail::residual_exit(vr), format_report(j)};
  });
}

inline CommandResult cmd_roots(const RunConfig& cfg) {
  return detail::guarded("roots", [&] {
    const HSpaceSpec spec = load_spec(cfg.spec_path);
    detail::require_valid(spec, cfg);
    const PencilReport pr = check_pencil(spec, cfg.n, cfg.seed, cfg.cluster_tol);
    Json pts = Json::array();
    for (const auto& p : pr.points) {
      Json e{{"at", detail::point_json(p.at)},
             {"computed", detail::pattern_json(p.computed)},
             {"expected", detail::pattern_json(p.expected)},
             {"match", p.match},
             {"deviation", p.deviation},
             {"shift_deviation", p.shift_deviation}};
      if (!p.error.empty()) e["error"] = p.error;
      pts.push_back(e);
    }
    Json j = detail::header("roots", spec);
    j["all_match"] = pr.all_match;
    j["max_deviation"] = pr.max_deviation;
    j["max_shift_deviation"] = pr.max_shift_deviation;
    j["points"] = pts;
    j["n"] = cfg.n;
    j["seed"] = cfg.seed;
    return CommandResult{pr.all_match ? kExitOk : kExitFail, format_report(j)};
  });
}

inline CommandResult cmd_geodesic(const RunConfig& cfg) {
  return detail::guarded("geodesic", [&] {
    const HSpaceSpec spec = load_spec(cfg.spec_path);
    detail::require_valid(spec, cfg);
    const AdaptiveOptions opt = detail::adaptive_options(cfg);
    GeodesicState s0;
    Trajectory tr;
    if (cfg.x0 && cfg.v0) {
      s0.x = *cfg.x0;
      s0.v = *cfg.v0;
      tr = integrate_adaptive(spec, s0, cfg.t_end, opt);
    } else if (cfg.x0 || cfg.v0) {
      throw SpecError("--x0 and --v0 must be given together");
    } else {
      const RandomGeodesic g = random_geodesic(spec, 0, cfg.seed, cfg.t_end, opt);
      s0 = g.start;
      tr = g.trajectory;
    }
    const ConservationReport r = conservation_check(tr);
    const bool ok = tr.ok() && r.rel_drift_I <= cfg.drift_tol && r.rel_drift_N <= cfg.drift_tol;
    if (!cfg.csv_path.empty()) {
      std::ofstream f(cfg.csv_path, std::ios::binary);
      if (!f) throw SpecError("cannot write '" + cfg.csv_path + "'");
      write_trajectory_csv(f, tr);
    }
    if (cfg.format == "csv") {
      std::ostringstream os;
      write_trajectory_csv(os, tr);
      return CommandResult{ok ? kExitOk : kExitFail, os.str()};
    }
    Json j = detail::header("geodesic", spec);
    j.update(detail::conservation_json(r));
    j["x0"] = detail::point_json(s0.x);
    j["v0"] = Json(s0.v.c);
    j["t_end"] = cfg.t_end;
    j["samples"] = tr.samples.size();
    if (!tr.message.empty()) j["message"] = tr.message;
    return CommandResult{ok ? kExitOk : kExitFail, format_report(j)};
  });
}

inline CommandResult cmd_conserve(const RunConfig& cfg) {
  return detail::guarded("conserve", [&] {
    const HSpaceSpec spec = load_spec(cfg.spec_path);
    detail::require_valid(spec, cfg);
    const auto s = detail::run_conserve(spec, cfg.n, cfg.seed, detail::adaptive_options(cfg));
    const bool ok = s.all_completed && s.worst_I <= cfg.drift_tol && s.worst_N <= cfg.drift_tol;
    Json j = detail::header("conserve", spec);
    j["geodesics"] = s.geodesics;
    j["max_rel_drift_I"] = s.worst_I;
    j["max_rel_drift_N"] = s.worst_N;
    j["all_completed"] = s.all_completed;
    j["drift_tol"] = cfg.drift_tol;
    j["n"] = cfg.n;
    j["seed"] = cfg.seed;
    j["ok"] = ok;
    return CommandResult{ok ? kExitOk : kExitFail, format_report(j)};
  });
}

/// One summary row per *.json spec in the directory (sorted by file name).
inline CommandResult cmd_sweep(const RunConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::vector<fs::path> files;
  std::error_code ec;
  for (const auto& e : fs::directory_iterator(dir, ec))
    if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
  if (ec) return detail::input_error("sweep", SpecError("cannot read directory '" + dir + "'"));
  std::sort(files.begin(), files.end());

  Json rows = Json::array();
  int worst = kExitOk;
  for (const auto& f : files) {
    Json row{{"file", f.filename().string()}};
    int code = kExitOk;
    try {
      HSpaceSpec spec = load_spec(f.string());
      row["type"] = std::string(type_tag(spec.type));
      const ValidationReport val = validate_spec(spec, 200, cfg.seed);
      if (!val.ok()) {
        row["status"] = "invalid";
        row["violation"] = val.violations.front().code;
        code = kExitFail;
      } else {
        const VariantReport vr = discriminate_variants(spec, cfg.n, cfg.seed, cfg.pass_tol);
        row["variant_verdict"] = std::string(verdict_name(vr.verdict));
        row["passer"] = vr.passer ? Json(*vr.passer) : Json(nullptr);
        double best = INFINITY;
        for (const auto& r : vr.variants) best = std::min(best, r.max);
        row["residual_max"] = best;
        code = std::max(code, detail::residual_exit(vr));
        if (vr.passer) spec.variant = *vr.passer;
        const PencilReport pr = check_pencil(spec, cfg.root_points, cfg.seed, cfg.cluster_tol);
        row["pencil_match"] = pr.all_match;
        if (!pr.all_match) code = std::max(code, kExitFail);
        const auto cs = detail::run_conserve(spec, cfg.geodesics, cfg.seed, detail::adaptive_options(cfg));
        row["worst_drift"] = std::max(cs.worst_I, cs.worst_N);
        if (!cs.all_completed || cs.worst_I > cfg.drift_tol || cs.worst_N > cfg.drift_tol)
          code = std::max(code, kExitFail);
        row["status"] = code == kExitOk ? "ok" : code == kExitAmbiguous ? "ambiguous" : "fail";
      }
    } catch (const Error& ex) {
      row["status"] = "input_error";
      row["error"] = ex.what();
      code = kExitInput;
    }
    row["exit"] = code;
    worst = std::max(worst, code);
    rows.push_back(row);
  }

  if (cfg.format == "csv") {
    std::ostringstream os;
    os << "file,type,variant_verdict,passer,residual_max,pencil_match,worst_drift,status\n";
    auto field = [](const Json& row, const char* key) -> std::string {
      auto it = row.find(key);
      if (it == row.end() || it->is_null()) return "";
      if (it->is_string()) return it->get<std::string>();
      if (it->is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.17g", it->get<double>());
        return buf;
      }
      return it->dump();
    };
    for (const auto& r : rows)
      os << field(r, "file") << ',' << field(r, "type") << ',' << field(r, "variant_verdict") << ','
         << field(r, "passer") << ',' << field(r, "residual_max") << ',' << field(r, "pencil_match") << ','
         << field(r, "worst_drift") << ',' << field(r, "status") << '\n';
    return {worst, os.str()};
  }
  Json j{{"command", "sweep"}, {"dir", dir}, {"rows", rows}, {"n", cfg.n}, {"seed", cfg.seed}};
  return {worst, format_report(j)};
}

}  // namespace hspace
