// mplp: partition parametric LPs, evaluate solutions, emit plot data and
// metabolic mode reports.

#include "mplp/io.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

using namespace mplp;

namespace {

std::vector<double> parse_list(const std::string& s, const std::string& what) {
  std::vector<double> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kFormat, what + ": cannot read '" + tok + "' as a number");
    }
  }
  return out;
}

Vector to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Vector>(v.data(), static_cast<Index>(v.size()));
}

// "lo:hi,lo:hi,..."
std::pair<Vector, Vector> parse_box(const std::string& s) {
  std::vector<double> lo, hi;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos) throw Error(ErrorCode::kFormat, "--box: expected lo:hi per coordinate");
    lo.push_back(parse_list(tok.substr(0, colon), "--box").at(0));
    hi.push_back(parse_list(tok.substr(colon + 1), "--box").at(0));
  }
  return {to_vector(lo), to_vector(hi)};
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path + "'");
  out << text;
}

struct PartitionArgs {
  std::string input;
  std::string kind = "auto";
  std::string resolve = "eqcost";
  std::vector<std::string> lex_costs;
  std::uint64_t seed = 0;
  std::string box;
  double tol_zero = 0.0;
  int workers = 1;
  std::string qp_norm = "decision";
  std::string out;
};

int cmd_partition(const PartitionArgs& a) {
  json doc = parse_json_file(a.input);
  std::string kind = a.kind;
  if (kind == "auto") kind = doc.contains("metabolites") ? "fba" : "general";
  GeneralLP g;
  if (kind == "fba") {
    g = to_parametric_lp(parse_model(doc)).general;
  } else if (kind == "general") {
    g = parse_general_lp(doc);
  } else {
    throw Error(ErrorCode::kFormat, "--kind must be auto, general or fba");
  }
  if (!a.box.empty()) {
    auto [lo, hi] = parse_box(a.box);
    if (lo.size() != g.q) throw Error(ErrorCode::kFormat, "--box has " + std::to_string(lo.size()) + " coordinates, problem has " + std::to_string(g.q));
    g.box_lo = lo;
    g.box_hi = hi;
  }
  for (Index i = 0; i < g.q; ++i) {
    if (!(g.box_lo(i) < g.box_hi(i))) throw Error(ErrorCode::kDomain, "degenerate parameter box");
  }
  StandardFormLP lp = to_standard_form(g);
  check_well_conditioned(lp);

  PartitionConfig cfg;
  cfg.resolution = resolution_from_string(a.resolve);
  cfg.seed = a.seed;
  cfg.workers = std::max(1, a.workers);
  cfg.qp_norm = a.qp_norm == "full" ? QpNorm::kFull : QpNorm::kDecision;
  if (a.tol_zero > 0.0) cfg.tol.zero_rel = a.tol_zero;
  for (const auto& s : a.lex_costs) {
    Vector d = to_vector(parse_list(s, "--lex-cost"));
    if (d.size() != g.num_vars()) throw Error(ErrorCode::kFormat, "--lex-cost needs one entry per variable");
    cfg.lex_costs.push_back(auxiliary_cost_to_standard(lp, d));
  }
  if (cfg.resolution == Resolution::kLex && cfg.lex_costs.empty()) throw Error(ErrorCode::kFormat, "--resolve lex needs at least one --lex-cost");

  Partition p = partition(lp, HPolyhedron::box(lp.box_lo, lp.box_hi), cfg);
  write_output(a.out, to_json(p, lp).dump(1) + "\n");
  std::cerr << p.regions.size() << " regions, " << p.merged_count() << " after merging, " << p.infeasible.size()
            << " infeasible, " << p.unresolved.size() << " unresolved\n";
  return p.complete() ? 0 : 2;
}

int cmd_eval(const std::string& file, const std::string& theta_text) {
  PartitionFile pf = load_partition(file);
  const Vector theta = to_vector(parse_list(theta_text, "--theta"));
  if (theta.size() != pf.lp.q()) throw Error(ErrorCode::kFormat, "--theta needs " + std::to_string(pf.lp.q()) + " entries");
  const IndexList ids = pf.partition.locate(theta);
  std::cout.precision(12);
  if (ids.empty()) {
    for (std::size_t i = 0; i < pf.partition.infeasible.size(); ++i) {
      if (pf.partition.infeasible[i].contains(theta)) {
        std::cout << "theta lies in infeasible region " << i << "\n";
        return 0;
      }
    }
    Index best = -1;
    double dist = std::numeric_limits<double>::infinity();
    for (const auto& cr : pf.partition.regions) {
      const double d = distance_to(cr.region, theta);
      if (d < dist) {
        dist = d;
        best = cr.id;
      }
    }
    std::cout << "uncovered; nearest region " << best << " at distance " << dist << "\n";
    return 0;
  }
  for (Index id : ids) {
    const CriticalRegion& cr = pf.partition.regions[static_cast<std::size_t>(id)];
    const Vector xs = cr.solution.primal(theta);
    const Vector x = pf.lp.recover(xs, theta);
    const double z = pf.lp.original_objective(pf.lp.c.dot(xs), theta);
    std::cout << "region " << cr.id << " mode " << cr.mode_key << " (" << to_string(cr.tag) << ")\n";
    const Eigen::IOFormat tuple(Eigen::FullPrecision, Eigen::DontAlignCols, ", ", ", ", "", "", "(", ")");
    std::cout << "  x* = " << x.transpose().format(tuple) << "\n";
    std::cout << "  objective = " << z << "\n";
    std::cout << "  lambda = " << cr.solution.lambda(theta).transpose().format(tuple) << "\n";
    std::cout << "  mu = " << cr.solution.mu(theta).transpose().format(tuple) << "\n";
  }
  return 0;
}

int cmd_plot(const std::string& file, const std::string& out) {
  PartitionFile pf = load_partition(file);
  std::ostringstream os;
  write_plot_data(os, pf.partition);
  write_output(out, os.str());
  return 0;
}

int cmd_modes(const std::string& file, const std::string& model_path, const std::string& out) {
  PartitionFile pf = load_partition(file);
  MetabolicModel model = load_model(model_path);
  FbaProblem fba = to_parametric_lp(model);
  ModeReport rep = metabolic_modes(pf.partition, model, fba.lp);
  write_output(out, to_json(rep).dump(1) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiparametric LP partitioning"};
  app.require_subcommand(1);

  PartitionArgs pa;
  auto* part = app.add_subcommand("partition", "Partition the parameter box into critical regions");
  part->add_option("input", pa.input, "problem or metabolic model JSON")->required();
  part->add_option("--kind", pa.kind, "auto, general or fba");
  part->add_option("--resolve", pa.resolve, "none, lex, eqcost or qp");
  part->add_option("--lex-cost", pa.lex_costs, "auxiliary cost in original variables, comma separated (repeatable)");
  part->add_option("--seed", pa.seed, "seed for the equivalent cost vector");
  part->add_option("--box", pa.box, "parameter box as lo:hi,lo:hi,...");
  part->add_option("--tol-zero", pa.tol_zero, "relative zero threshold");
  part->add_option("--workers", pa.workers, "worker threads");
  part->add_option("--qp-norm", pa.qp_norm, "decision or full");
  part->add_option("--out", pa.out, "output file (stdout if omitted)");

  std::string file, theta, out, model;
  auto* eval = app.add_subcommand("eval", "Evaluate the parametric solution at a point");
  eval->add_option("partition", file)->required();
  eval->add_option("--theta", theta, "comma-separated parameter values")->required();

  auto* plot = app.add_subcommand("plot-data", "Region polygons for two-parameter partitions");
  plot->add_option("partition", file)->required();
  plot->add_option("--out", out);

  auto* modes = app.add_subcommand("modes", "Metabolic mode report");
  modes->add_option("partition", file)->required();
  modes->add_option("model", model)->required();
  modes->add_option("--out", out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return e.get_exit_code() == 0 ? 0 : 1;
  }
  try {
    if (*part) return cmd_partition(pa);
    if (*eval) return cmd_eval(file, theta);
    if (*plot) return cmd_plot(file, out);
    if (*modes) return cmd_modes(file, model, out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
