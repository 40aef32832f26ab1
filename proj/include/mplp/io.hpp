#pragma once

// JSON for problems and partitions, point evaluation and 2-D polygon output.

#include "mplp/fba_adapter.hpp"
#include "mplp/mpp_core.hpp"

#include <json.hpp>

#include <cmath>
#include <ostream>

namespace mplp {

using json = nlohmann::json;

namespace detail {

inline Vector vector_from_json(const json& j, const std::string& where) {
  if (!j.is_array()) throw Error(ErrorCode::kFormat, where + ": expected an array of numbers");
  Vector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    if (!j[i].is_number()) throw Error(ErrorCode::kFormat, where + "[" + std::to_string(i) + "]: expected a number");
    v(static_cast<Index>(i)) = j[i].get<double>();
  }
  return v;
}

inline json vector_to_json(const Vector& v) {
  json j = json::array();
  for (Index i = 0; i < v.size(); ++i) j.push_back(v(i));
  return j;
}

inline json index_list_to_json(const IndexList& l) {
  json j = json::array();
  for (Index i : l) j.push_back(i);
  return j;
}

inline IndexList index_list_from_json(const json& j) {
  IndexList l;
  for (const auto& e : j) l.push_back(e.get<Index>());
  return l;
}

inline json matrix_to_json(const Matrix& m) {
  json j;
  j["rows"] = m.rows();
  j["cols"] = m.cols();
  j["entries"] = json::array();
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index r = 0; r < m.rows(); ++r) {
      if (m(r, c) != 0.0) j["entries"].push_back(json::array({r, c, m(r, c)}));
    }
  }
  return j;
}

inline Matrix matrix_from_json(const json& j, const std::string& where) {
  if (!j.is_object() || !j.contains("rows") || !j.contains("cols") || !j.contains("entries")) {
    throw Error(ErrorCode::kFormat, where + ": expected {rows, cols, entries}");
  }
  Matrix m = Matrix::Zero(j["rows"].get<Index>(), j["cols"].get<Index>());
  for (const auto& e : j["entries"]) {
    const Index r = e.at(0).get<Index>();
    const Index c = e.at(1).get<Index>();
    if (r < 0 || r >= m.rows() || c < 0 || c >= m.cols()) throw Error(ErrorCode::kFormat, where + ": entry out of range");
    m(r, c) = e.at(2).get<double>();
  }
  return m;
}

inline json poly_to_json(const HPolyhedron& p) {
  return json{{"M", matrix_to_json(p.M)}, {"t", vector_to_json(p.t)}, {"empty", p.empty}};
}

inline HPolyhedron poly_from_json(const json& j, const std::string& where) {
  HPolyhedron p(matrix_from_json(j.at("M"), where + ".M"), vector_from_json(j.at("t"), where + ".t"));
  p.empty = j.value("empty", false);
  p.minimal = true;
  return p;
}

inline json map_to_json(const AffineMap& m) { return json{{"E", matrix_to_json(m.E)}, {"e", vector_to_json(m.e)}}; }

inline AffineMap map_from_json(const json& j, const std::string& where) {
  return AffineMap{matrix_from_json(j.at("E"), where + ".E"), vector_from_json(j.at("e"), where + ".e")};
}

inline ParamRow row_from_json(const json& j, Index q, const std::string& where) {
  if (!j.is_object() || !j.contains("a")) throw Error(ErrorCode::kFormat, where + ": expected {a, w, f}");
  ParamRow r;
  r.a = vector_from_json(j["a"], where + ".a");
  r.w = j.value("w", 0.0);
  r.f = j.contains("f") ? vector_from_json(j["f"], where + ".f") : Vector::Zero(q);
  if (r.f.size() != q) throw Error(ErrorCode::kFormat, where + ".f: expected " + std::to_string(q) + " entries");
  return r;
}

}  // namespace detail

/// General parametric LP in the documented JSON layout.
inline GeneralLP parse_general_lp(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "problem: expected a JSON object");
  for (const char* key : {"c", "box"}) {
    if (!j.contains(key)) throw Error(ErrorCode::kFormat, std::string("problem: missing field '") + key + "'");
  }
  GeneralLP g;
  const std::string sense = j.value("sense", std::string("max"));
  if (sense == "max") g.sense = Sense::kMax;
  else if (sense == "min") g.sense = Sense::kMin;
  else throw Error(ErrorCode::kFormat, "sense: expected \"max\" or \"min\"");
  g.c = detail::vector_from_json(j["c"], "c");
  g.box_lo = detail::vector_from_json(j["box"].at("lo"), "box.lo");
  g.box_hi = detail::vector_from_json(j["box"].at("hi"), "box.hi");
  if (g.box_lo.size() != g.box_hi.size()) throw Error(ErrorCode::kFormat, "box: lo and hi differ in length");
  g.q = g.box_lo.size();
  if (j.contains("ineq")) {
    for (std::size_t i = 0; i < j["ineq"].size(); ++i) g.ineq.push_back(detail::row_from_json(j["ineq"][i], g.q, "ineq[" + std::to_string(i) + "]"));
  }
  if (j.contains("eq")) {
    for (std::size_t i = 0; i < j["eq"].size(); ++i) g.eq.push_back(detail::row_from_json(j["eq"][i], g.q, "eq[" + std::to_string(i) + "]"));
  }
  if (j.contains("bounds")) {
    for (std::size_t i = 0; i < j["bounds"].size(); ++i) {
      const auto& e = j["bounds"][i];
      const std::string where = "bounds[" + std::to_string(i) + "]";
      if (!e.contains("var")) throw Error(ErrorCode::kFormat, where + ": missing var");
      VarBound b;
      b.var = e["var"].get<Index>();
      b.lo = detail::opt_number(e, "lo", where);
      b.hi = detail::opt_number(e, "hi", where);
      if (e.contains("lo_param") && !e["lo_param"].is_null()) {
        b.lo_param = ParamLink{e["lo_param"].at("index").get<Index>(), e["lo_param"].at("scale").get<double>()};
      }
      g.bounds.push_back(b);
    }
  }
  return g;
}

inline json to_json(const StandardFormLP& lp) {
  json j;
  j["A"] = detail::matrix_to_json(lp.A.dense());
  j["w"] = detail::vector_to_json(lp.w);
  j["F"] = detail::matrix_to_json(lp.F.dense());
  j["c"] = detail::vector_to_json(lp.c);
  j["R"] = detail::matrix_to_json(lp.R);
  j["r"] = detail::vector_to_json(lp.r);
  j["T"] = detail::matrix_to_json(lp.T);
  j["objective_sign"] = lp.objective_sign;
  j["objective_offset"] = lp.objective_offset;
  j["objective_theta"] = detail::vector_to_json(lp.objective_theta);
  json cols = json::array();
  for (const auto& c : lp.columns) cols.push_back(json::array({static_cast<int>(c.kind), c.index}));
  j["columns"] = cols;
  j["box"] = {{"lo", detail::vector_to_json(lp.box_lo)}, {"hi", detail::vector_to_json(lp.box_hi)}};
  return j;
}

inline StandardFormLP standard_lp_from_json(const json& j) {
  StandardFormLP lp;
  lp.A = SparseMatrix::from_dense(detail::matrix_from_json(j.at("A"), "problem.A"));
  lp.w = detail::vector_from_json(j.at("w"), "problem.w");
  lp.F = SparseMatrix::from_dense(detail::matrix_from_json(j.at("F"), "problem.F"));
  lp.c = detail::vector_from_json(j.at("c"), "problem.c");
  lp.R = detail::matrix_from_json(j.at("R"), "problem.R");
  lp.r = detail::vector_from_json(j.at("r"), "problem.r");
  lp.T = detail::matrix_from_json(j.at("T"), "problem.T");
  lp.objective_sign = j.at("objective_sign").get<double>();
  lp.objective_offset = j.at("objective_offset").get<double>();
  lp.objective_theta = detail::vector_from_json(j.at("objective_theta"), "problem.objective_theta");
  for (const auto& c : j.at("columns")) lp.columns.push_back({static_cast<ColumnKind>(c.at(0).get<int>()), c.at(1).get<Index>()});
  lp.box_lo = detail::vector_from_json(j.at("box").at("lo"), "problem.box.lo");
  lp.box_hi = detail::vector_from_json(j.at("box").at("hi"), "problem.box.hi");
  return lp;
}

inline const char* to_string(QpNorm n) { return n == QpNorm::kDecision ? "decision" : "full"; }

/// Partition plus the problem it was computed for.
struct PartitionFile {
  Partition partition;
  StandardFormLP lp;
};

inline json to_json(const Partition& p, const StandardFormLP& lp) {
  json j;
  j["problem_hash"] = p.fingerprint;
  json cfg;
  cfg["resolution"] = to_string(p.config.resolution);
  cfg["seed"] = p.config.seed;
  cfg["U"] = p.config.U;
  cfg["qp_norm"] = to_string(p.config.qp_norm);
  cfg["tol_zero"] = p.config.tol.zero_rel;
  cfg["lex_costs"] = json::array();
  for (const auto& d : p.config.lex_costs) cfg["lex_costs"].push_back(detail::vector_to_json(d));
  j["config"] = cfg;
  j["problem"] = to_json(lp);
  j["box"] = detail::poly_to_json(p.box);
  j["eq_cost"] = detail::vector_to_json(p.eq_cost);
  j["pops"] = p.pops;
  j["regions"] = json::array();
  for (const auto& cr : p.regions) {
    json r;
    r["id"] = cr.id;
    r["mode_key"] = cr.mode_key;
    r["case"] = to_string(cr.tag);
    r["method"] = to_string(cr.method);
    r["H"] = detail::poly_to_json(cr.region);
    r["primal_map"] = detail::map_to_json(cr.solution.primal);
    r["dual"] = {{"lambda_p", detail::map_to_json(cr.solution.lambda)},
                 {"Z", detail::matrix_to_json(cr.solution.Z)},
                 {"Z_cols", cr.solution.Z.cols()},
                 {"mu", detail::map_to_json(cr.solution.mu)}};
    r["J1"] = detail::index_list_to_json(cr.partition.J1);
    r["J11"] = detail::index_list_to_json(cr.partition.J11);
    r["zero_set"] = detail::index_list_to_json(cr.zero_set);
    r["never_active"] = detail::index_list_to_json(cr.optimal_active);
    r["probe"] = detail::vector_to_json(cr.probe);
    j["regions"].push_back(r);
  }
  j["infeasible"] = json::array();
  for (const auto& h : p.infeasible) j["infeasible"].push_back(detail::poly_to_json(h));
  j["unresolved"] = json::array();
  for (const auto& h : p.unresolved) j["unresolved"].push_back(detail::poly_to_json(h));
  return j;
}

inline PartitionFile partition_from_json(const json& j) {
  PartitionFile out;
  Partition& p = out.partition;
  try {
    p.fingerprint = j.at("problem_hash").get<std::string>();
    const json& cfg = j.at("config");
    p.config.resolution = resolution_from_string(cfg.at("resolution").get<std::string>());
    p.config.seed = cfg.at("seed").get<std::uint64_t>();
    p.config.U = cfg.at("U").get<double>();
    p.config.qp_norm = cfg.at("qp_norm").get<std::string>() == "full" ? QpNorm::kFull : QpNorm::kDecision;
    p.config.tol.zero_rel = cfg.at("tol_zero").get<double>();
    for (const auto& d : cfg.at("lex_costs")) p.config.lex_costs.push_back(detail::vector_from_json(d, "config.lex_costs"));
    out.lp = standard_lp_from_json(j.at("problem"));
    p.box = detail::poly_from_json(j.at("box"), "box");
    p.eq_cost = detail::vector_from_json(j.at("eq_cost"), "eq_cost");
    p.pops = j.at("pops").get<Index>();
    for (std::size_t i = 0; i < j.at("regions").size(); ++i) {
      const json& r = j["regions"][i];
      const std::string where = "regions[" + std::to_string(i) + "]";
      CriticalRegion cr;
      cr.id = r.at("id").get<Index>();
      cr.mode_key = r.at("mode_key").get<std::string>();
      cr.tag = case_tag_from_string(r.at("case").get<std::string>());
      cr.method = resolution_from_string(r.at("method").get<std::string>());
      cr.region = detail::poly_from_json(r.at("H"), where + ".H");
      cr.solution.primal = detail::map_from_json(r.at("primal_map"), where + ".primal_map");
      cr.solution.lambda = detail::map_from_json(r.at("dual").at("lambda_p"), where + ".dual.lambda_p");
      cr.solution.Z = detail::matrix_from_json(r.at("dual").at("Z"), where + ".dual.Z");
      cr.solution.mu = detail::map_from_json(r.at("dual").at("mu"), where + ".dual.mu");
      cr.partition = make_partition(detail::index_list_from_json(r.at("J1")), out.lp.n());
      cr.partition.J11 = detail::index_list_from_json(r.at("J11"));
      cr.zero_set = detail::index_list_from_json(r.at("zero_set"));
      cr.optimal_active = detail::index_list_from_json(r.at("never_active"));
      cr.probe = detail::vector_from_json(r.at("probe"), where + ".probe");
      p.regions.push_back(std::move(cr));
    }
    for (const auto& h : j.at("infeasible")) p.infeasible.push_back(detail::poly_from_json(h, "infeasible"));
    for (const auto& h : j.at("unresolved")) p.unresolved.push_back(detail::poly_from_json(h, "unresolved"));
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kFormat, std::string("partition file: ") + e.what());
  }
  return out;
}

inline PartitionFile load_partition(const std::string& path) { return partition_from_json(parse_json_file(path)); }

/// Infinity-norm distance from theta to p (0 inside).
inline double distance_to(const HPolyhedron& p, const Vector& theta) {
  if (p.empty) return std::numeric_limits<double>::infinity();
  const Index q = p.dim();
  Matrix g = Matrix::Zero(p.rows() + 2 * q, q + 1);
  Vector h(p.rows() + 2 * q);
  g.topLeftCorner(p.rows(), q) = p.M;
  h.head(p.rows()) = p.t;
  g.block(p.rows(), 0, q, q) = Matrix::Identity(q, q);
  g.block(p.rows(), q, q, 1).setConstant(-1.0);
  h.segment(p.rows(), q) = theta;
  g.block(p.rows() + q, 0, q, q) = -Matrix::Identity(q, q);
  g.block(p.rows() + q, q, q, 1).setConstant(-1.0);
  h.tail(q) = -theta;
  Vector c = Vector::Zero(q + 1);
  c(q) = 1.0;
  InequalityLpResult r = solve_inequality_lp(c, g, h);
  if (r.status != LpStatus::kOptimal) return std::numeric_limits<double>::infinity();
  return std::max(0.0, r.z(q));
}

/// Vertices of a bounded 2-D polyhedron, counterclockwise.
inline std::vector<Eigen::Vector2d> polygon_vertices(const HPolyhedron& p, double tol = 1e-9) {
  std::vector<Eigen::Vector2d> pts;
  if (p.empty || p.dim() != 2) return pts;
  for (Index i = 0; i < p.rows(); ++i) {
    for (Index k = i + 1; k < p.rows(); ++k) {
      Eigen::Matrix2d a;
      a << p.M(i, 0), p.M(i, 1), p.M(k, 0), p.M(k, 1);
      if (std::abs(a.determinant()) < 1e-12 * std::max(1.0, a.cwiseAbs().maxCoeff())) continue;
      Eigen::Vector2d x = a.partialPivLu().solve(Eigen::Vector2d(p.t(i), p.t(k)));
      const double scale = std::max(1.0, x.cwiseAbs().maxCoeff());
      if (!p.contains(x, tol * scale * 10)) continue;
      bool dup = false;
      for (const auto& y : pts) {
        if ((y - x).norm() <= 1e-9 * scale) dup = true;
      }
      if (!dup) pts.push_back(x);
    }
  }
  if (pts.size() < 3) return pts;
  Eigen::Vector2d ctr = Eigen::Vector2d::Zero();
  for (const auto& x : pts) ctr += x;
  ctr /= static_cast<double>(pts.size());
  std::sort(pts.begin(), pts.end(), [&](const Eigen::Vector2d& a, const Eigen::Vector2d& b) {
    return std::atan2(a.y() - ctr.y(), a.x() - ctr.x()) < std::atan2(b.y() - ctr.y(), b.x() - ctr.x());
  });
  return pts;
}

inline double polygon_area(const std::vector<Eigen::Vector2d>& v) {
  double a = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& p = v[i];
    const auto& q = v[(i + 1) % v.size()];
    a += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * a;
}

/// One polygon per line: id mode_key x1 y1 x2 y2 ...
inline void write_plot_data(std::ostream& os, const Partition& p) {
  if (p.box.dim() != 2) throw Error(ErrorCode::kDomain, "plot data requires two parameters");
  os.precision(17);
  auto line = [&](const std::string& id, const std::string& key, const HPolyhedron& h) {
    os << id << ' ' << key;
    for (const auto& v : polygon_vertices(h)) os << ' ' << v.x() + 0.0 << ' ' << v.y() + 0.0;  // no -0
    os << '\n';
  };
  for (const auto& cr : p.regions) line(std::to_string(cr.id), cr.mode_key, cr.region);
  for (std::size_t i = 0; i < p.infeasible.size(); ++i) line("infeasible-" + std::to_string(i), "infeasible", p.infeasible[i]);
  for (std::size_t i = 0; i < p.unresolved.size(); ++i) line("unresolved-" + std::to_string(i), "unresolved", p.unresolved[i]);
}

}  // namespace mplp
