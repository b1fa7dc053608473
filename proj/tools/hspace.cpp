// hspace: verify six-dimensional h-space specs from the command line.
//
//   hspace validate --spec S.json
//   hspace residual --spec S.json --n 200 --seed 1
//   hspace roots    --spec S.json --n 100
//   hspace geodesic --spec S.json [--x0 ... --v0 ...] --t-end 1 --csv traj.csv
//   hspace conserve --spec S.json --n 20
//   hspace sweep    --dir specs/golden --format csv
//
// Exit codes: 0 success, 1 verification failure, 2 input error, 3 ambiguity.

#include <fstream>
#include <iostream>
#include <vector>

#include "CLI11.hpp"

#include "hspace/commands.hpp"

namespace {

struct Options {
  hspace::RunConfig cfg;
  std::string out;
  std::string dir;
  std::vector<double> x0, v0;
  int n = -1;
};

void add_common(CLI::App* sub, Options& o, bool needs_spec) {
  if (needs_spec) sub->add_option("--spec", o.cfg.spec_path, "spec JSON file")->required()->check(CLI::ExistingFile);
  sub->add_option("--n", o.n, "sample points (or geodesics for conserve)")->check(CLI::NonNegativeNumber);
  sub->add_option("--seed", o.cfg.seed, "sampling seed");
  sub->add_option("--out", o.out, "write the report here instead of stdout");
  sub->add_option("--format", o.cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
  sub->add_option("--tol-pass", o.cfg.pass_tol, "Eisenhart residual pass tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--tol-cluster", o.cfg.cluster_tol, "root clustering tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--tol-abs", o.cfg.abs_tol, "ODE absolute tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--tol-rel", o.cfg.rel_tol, "ODE relative tolerance")->check(CLI::PositiveNumber);
  sub->add_option("--tol-drift", o.cfg.drift_tol, "allowed relative drift of I and N")->check(CLI::PositiveNumber);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Verification lab for six-dimensional h-spaces"};
  app.require_subcommand(1);
  Options o;

  auto* validate = app.add_subcommand("validate", "check a spec's side conditions");
  add_common(validate, o, true);
  auto* residual = app.add_subcommand("residual", "Eisenhart residual over all convention variants");
  add_common(residual, o, true);
  auto* roots = app.add_subcommand("roots", "characteristic roots and multiplicity pattern");
  add_common(roots, o, true);
  auto* geodesic = app.add_subcommand("geodesic", "integrate one geodesic and monitor I and N");
  add_common(geodesic, o, true);
  geodesic->add_option("--x0", o.x0, "initial point (6 values)")->expected(6);
  geodesic->add_option("--v0", o.v0, "initial velocity (6 values)")->expected(6);
  geodesic->add_option("--t-end", o.cfg.t_end, "affine parameter span")->check(CLI::PositiveNumber);
  geodesic->add_option("--csv", o.cfg.csv_path, "also write the trajectory CSV here");
  auto* conserve = app.add_subcommand("conserve", "conservation over random geodesics");
  add_common(conserve, o, true);
  auto* sweep = app.add_subcommand("sweep", "summary row per spec file in a directory");
  add_common(sweep, o, false);
  sweep->add_option("--dir", o.dir, "directory of spec files")->required()->check(CLI::ExistingDirectory);
  sweep->add_option("--geodesics", o.cfg.geodesics, "geodesics per spec")->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : hspace::kExitInput;
  }

  if (o.x0.size() == 6) o.cfg.x0 = hspace::Point{{o.x0[0], o.x0[1], o.x0[2], o.x0[3], o.x0[4], o.x0[5]}};
  if (o.v0.size() == 6) o.cfg.v0 = hspace::Tangent{{o.v0[0], o.v0[1], o.v0[2], o.v0[3], o.v0[4], o.v0[5]}};

  hspace::CommandResult res;
  if (*validate) {
    o.cfg.n = o.n < 0 ? 200 : o.n;
    res = hspace::cmd_validate(o.cfg);
  } else if (*residual) {
    o.cfg.n = o.n < 0 ? 200 : o.n;
    res = hspace::cmd_residual(o.cfg);
  } else if (*roots) {
    o.cfg.n = o.n < 0 ? 100 : o.n;
    res = hspace::cmd_roots(o.cfg);
  } else if (*geodesic) {
    o.cfg.n = o.n < 0 ? 200 : o.n;
    res = hspace::cmd_geodesic(o.cfg);
  } else if (*conserve) {
    o.cfg.n = o.n < 0 ? 20 : o.n;
    res = hspace::cmd_conserve(o.cfg);
  } else if (*sweep) {
    o.cfg.n = o.n < 0 ? 200 : o.n;
    res = hspace::cmd_sweep(o.cfg, o.dir);
  }

  if (o.out.empty()) {
    std::cout << res.output;
  } else {
    std::ofstream f(o.out, std::ios::binary);
    if (!f) {
      std::cerr << "cannot write " << o.out << "\n";
      return hspace::kExitInput;
    }
    f << res.output;
  }
  return res.exit_code;
}
