#pragma once

// Stoichiometric models as parametric LPs, and partitions read back as
// metabolic modes.

#include "mplp/mpp_core.hpp"

#include <json.hpp>

#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace mplp {

struct ReactionParam {
  Index index = 0;
  double vmax = 0.0;
};

struct Reaction {
  std::string id;
  bool reversible = false;
  std::optional<double> lb;
  std::optional<double> ub;
  std::optional<ReactionParam> param;
};

struct MetabolicModel {
  std::vector<std::string> metabolites;
  std::vector<Reaction> reactions;
  SparseMatrix S;
  std::string objective;

  Index num_metabolites() const { return static_cast<Index>(metabolites.size()); }
  Index num_reactions() const { return static_cast<Index>(reactions.size()); }
  Index num_params() const {
    std::set<Index> p;
    for (const auto& r : reactions) {
      if (r.param) p.insert(r.param->index);
    }
    return static_cast<Index>(p.size());
  }
  Index reaction_index(const std::string& id) const {
    for (std::size_t j = 0; j < reactions.size(); ++j) {
      if (reactions[j].id == id) return static_cast<Index>(j);
    }
    return -1;
  }
};

struct KineticParams {
  double vmax = 0.0;
  double Km = 0.0;
  double C = 0.0;
};

/// Maximum uptake rate (negative) under Michaelis-Menten kinetics.
inline double michaelis_menten_lb(const KineticParams& k) {
  if (!(k.vmax > 0.0)) throw Error(ErrorCode::kDomain, "v_max must be positive");
  if (!(k.Km > 0.0)) throw Error(ErrorCode::kDomain, "K_m must be positive");
  if (!(k.C >= 0.0)) throw Error(ErrorCode::kDomain, "concentration must be nonnegative");
  return -k.vmax * k.C / (k.Km + k.C);
}

namespace detail {

inline std::optional<double> opt_number(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number()) throw Error(ErrorCode::kFormat, where + "." + key + ": expected a number");
  return j[key].get<double>();
}

}  // namespace detail

/// Validates the model invariants: known ids, contiguous parameter indices,
/// an existing objective.
inline void validate_model(const MetabolicModel& m) {
  std::set<std::string> seen;
  for (const auto& id : m.metabolites) {
    if (!seen.insert(id).second) throw Error(ErrorCode::kFormat, "duplicate metabolite id '" + id + "'");
  }
  seen.clear();
  std::set<Index> params;
  for (const auto& r : m.reactions) {
    if (!seen.insert(r.id).second) throw Error(ErrorCode::kFormat, "duplicate reaction id '" + r.id + "'");
    if (r.lb && r.ub && *r.lb > *r.ub) throw Error(ErrorCode::kFormat, "reaction '" + r.id + "': lb above ub");
    if (r.param) {
      if (r.param->index < 0) throw Error(ErrorCode::kFormat, "reaction '" + r.id + "': negative parameter index");
      if (!(r.param->vmax > 0.0)) throw Error(ErrorCode::kDomain, "reaction '" + r.id + "': vmax must be positive");
      params.insert(r.param->index);
    }
  }
  Index expect = 0;
  for (Index p : params) {
    if (p != expect++) throw Error(ErrorCode::kFormat, "parameter indices must be 0..q-1 with each used");
  }
  if (m.reaction_index(m.objective) < 0) throw Error(ErrorCode::kFormat, "objective reaction '" + m.objective + "' not found");
  if (m.S.rows() != m.num_metabolites() || m.S.cols() != m.num_reactions()) {
    throw Error(ErrorCode::kFormat, "stoichiometry has the wrong shape");
  }
}

inline MetabolicModel parse_model(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::kFormat, "model: expected a JSON object");
  for (const char* key : {"metabolites", "reactions", "stoich", "objective"}) {
    if (!j.contains(key)) throw Error(ErrorCode::kFormat, std::string("model: missing field '") + key + "'");
  }
  MetabolicModel m;
  for (std::size_t i = 0; i < j["metabolites"].size(); ++i) {
    const auto& e = j["metabolites"][i];
    if (!e.is_string()) throw Error(ErrorCode::kFormat, "metabolites[" + std::to_string(i) + "]: expected a string");
    m.metabolites.push_back(e.get<std::string>());
  }
  for (std::size_t i = 0; i < j["reactions"].size(); ++i) {
    const auto& e = j["reactions"][i];
    const std::string where = "reactions[" + std::to_string(i) + "]";
    if (!e.is_object() || !e.contains("id") || !e["id"].is_string()) throw Error(ErrorCode::kFormat, where + ".id: expected a string");
    Reaction r;
    r.id = e["id"].get<std::string>();
    if (e.contains("reversible")) {
      if (!e["reversible"].is_boolean()) throw Error(ErrorCode::kFormat, where + ".reversible: expected a boolean");
      r.reversible = e["reversible"].get<bool>();
    }
    r.lb = detail::opt_number(e, "lb", where);
    r.ub = detail::opt_number(e, "ub", where);
    if (e.contains("param") && !e["param"].is_null()) {
      const auto& p = e["param"];
      if (!p.contains("index") || !p["index"].is_number_integer()) throw Error(ErrorCode::kFormat, where + ".param.index: expected an integer");
      auto vmax = detail::opt_number(p, "vmax", where + ".param");
      if (!vmax) throw Error(ErrorCode::kFormat, where + ".param.vmax: missing");
      r.param = ReactionParam{p["index"].get<Index>(), *vmax};
    }
    m.reactions.push_back(std::move(r));
  }
  std::map<std::string, Index> met_idx, rxn_idx;
  for (std::size_t i = 0; i < m.metabolites.size(); ++i) met_idx[m.metabolites[i]] = static_cast<Index>(i);
  for (std::size_t i = 0; i < m.reactions.size(); ++i) rxn_idx[m.reactions[i].id] = static_cast<Index>(i);
  std::vector<Triplet> trips;
  for (std::size_t i = 0; i < j["stoich"].size(); ++i) {
    const auto& e = j["stoich"][i];
    const std::string where = "stoich[" + std::to_string(i) + "]";
    if (!e.is_array() || e.size() != 3 || !e[0].is_string() || !e[1].is_string() || !e[2].is_number()) {
      throw Error(ErrorCode::kFormat, where + ": expected [metabolite, reaction, coeff]");
    }
    auto mi = met_idx.find(e[0].get<std::string>());
    if (mi == met_idx.end()) throw Error(ErrorCode::kFormat, where + ": unknown metabolite '" + e[0].get<std::string>() + "'");
    auto ri = rxn_idx.find(e[1].get<std::string>());
    if (ri == rxn_idx.end()) throw Error(ErrorCode::kFormat, where + ": unknown reaction '" + e[1].get<std::string>() + "'");
    trips.push_back({mi->second, ri->second, e[2].get<double>()});
  }
  if (!j["objective"].is_string()) throw Error(ErrorCode::kFormat, "objective: expected a reaction id");
  m.objective = j["objective"].get<std::string>();
  m.S = SparseMatrix::from_triplets(m.num_metabolites(), m.num_reactions(), trips);
  validate_model(m);
  return m;
}

inline nlohmann::json parse_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::kFormat, path + ": " + e.what());
  }
}

inline MetabolicModel load_model(const std::string& path) { return parse_model(parse_json_file(path)); }

struct LegendEntry {
  Index param = 0;
  std::string reaction;
  double vmax = 0.0;
};

struct FbaProblem {
  GeneralLP general;
  StandardFormLP lp;
  std::vector<LegendEntry> legend;
};

/// max v_obj s.t. S v = 0, model bounds, v_j >= -theta_p vmax_j.
inline FbaProblem to_parametric_lp(const MetabolicModel& model) {
  validate_model(model);
  const Index n = model.num_reactions();
  const Index q = model.num_params();
  FbaProblem out;
  GeneralLP& g = out.general;
  g.sense = Sense::kMax;
  g.q = q;
  g.c = Vector::Zero(n);
  g.c(model.reaction_index(model.objective)) = 1.0;
  const Matrix s = model.S.dense();
  for (Index i = 0; i < s.rows(); ++i) {
    ParamRow row;
    row.a = s.row(i).transpose();
    g.eq.push_back(std::move(row));
  }
  for (Index j = 0; j < n; ++j) {
    const Reaction& r = model.reactions[static_cast<std::size_t>(j)];
    VarBound b;
    b.var = j;
    if (r.param) {
      b.lo = 0.0;
      b.lo_param = ParamLink{r.param->index, -r.param->vmax};
      out.legend.push_back({r.param->index, r.id, r.param->vmax});
    } else if (r.lb) {
      b.lo = r.reversible ? *r.lb : std::max(0.0, *r.lb);
    } else if (!r.reversible) {
      b.lo = 0.0;
    }
    b.hi = r.ub;
    if (b.lo || b.hi || b.lo_param) g.bounds.push_back(b);
  }
  std::sort(out.legend.begin(), out.legend.end(), [](const LegendEntry& a, const LegendEntry& b) { return a.param < b.param; });
  g.box_lo = Vector::Zero(q);
  g.box_hi = Vector::Ones(q);
  out.lp = to_standard_form(g);
  check_well_conditioned(out.lp);
  return out;
}

struct ReactionFlux {
  std::string id;
  int sign = 0;
  double value = 0.0;
};

struct MetabolicMode {
  std::string mode_key;
  IndexList regions;
  std::vector<ReactionFlux> active;
  std::vector<std::string> never_active;
};

struct ModeAdjacency {
  std::string a, b;  // mode keys
  std::vector<std::string> changed;
};

struct ModeReport {
  std::string fingerprint;
  std::vector<MetabolicMode> modes;
  std::vector<ModeAdjacency> adjacency;
};

/// Reactions whose flux is zero everywhere on the optimal face described by
/// the optimal active set.
inline std::vector<std::string> never_active_reactions(const MetabolicModel& model, const StandardFormLP& lp,
                                                       const IndexList& optimal_active) {
  std::set<Index> act(optimal_active.begin(), optimal_active.end());
  std::vector<std::string> out;
  for (Index j = 0; j < model.num_reactions(); ++j) {
    if (std::abs(lp.r(j)) > 0.0 || (lp.T.cols() && lp.T.row(j).cwiseAbs().maxCoeff() > 0.0)) continue;
    bool zero = true;
    for (Index k = 0; k < lp.n(); ++k) {
      if (lp.R(j, k) != 0.0 && !act.count(k)) zero = false;
    }
    if (zero) out.push_back(model.reactions[static_cast<std::size_t>(j)].id);
  }
  return out;
}

inline ModeReport metabolic_modes(const Partition& p, const MetabolicModel& model, const StandardFormLP& lp,
                                  double tz = 1e-9) {
  if (p.fingerprint != problem_fingerprint(lp)) throw Error(ErrorCode::kMismatch, "partition was not produced from this model");
  ModeReport rep;
  rep.fingerprint = p.fingerprint;
  std::map<std::string, std::size_t> where;
  std::vector<std::vector<int>> signs;
  for (const auto& cr : p.regions) {
    auto it = where.find(cr.mode_key);
    if (it != where.end()) {
      rep.modes[it->second].regions.push_back(cr.id);
      continue;
    }
    MetabolicMode mode;
    mode.mode_key = cr.mode_key;
    mode.regions.push_back(cr.id);
    const Vector v = lp.recover(cr.solution.primal(cr.probe), cr.probe);
    std::vector<int> sg(static_cast<std::size_t>(v.size()), 0);
    for (Index j = 0; j < v.size(); ++j) {
      if (std::abs(v(j)) <= tz) continue;
      sg[static_cast<std::size_t>(j)] = v(j) > 0 ? 1 : -1;
      mode.active.push_back({model.reactions[static_cast<std::size_t>(j)].id, sg[static_cast<std::size_t>(j)], v(j)});
    }
    mode.never_active = never_active_reactions(model, lp, cr.optimal_active);
    where[cr.mode_key] = rep.modes.size();
    rep.modes.push_back(std::move(mode));
    signs.push_back(std::move(sg));
  }
  std::set<std::pair<std::size_t, std::size_t>> done;
  for (std::size_t i = 0; i < p.regions.size(); ++i) {
    for (std::size_t k = i + 1; k < p.regions.size(); ++k) {
      std::size_t a = where[p.regions[i].mode_key], b = where[p.regions[k].mode_key];
      if (a == b) continue;
      if (a > b) std::swap(a, b);
      if (done.count({a, b})) continue;
      if (!shared_facet(p.regions[i].region, p.regions[k].region, 1e-9)) continue;
      done.insert({a, b});
      ModeAdjacency adj{rep.modes[a].mode_key, rep.modes[b].mode_key, {}};
      for (std::size_t j = 0; j < signs[a].size(); ++j) {
        if (signs[a][j] != signs[b][j]) adj.changed.push_back(model.reactions[j].id);
      }
      rep.adjacency.push_back(std::move(adj));
    }
  }
  return rep;
}

inline nlohmann::json to_json(const ModeReport& rep) {
  nlohmann::json j;
  j["problem_hash"] = rep.fingerprint;
  j["modes"] = nlohmann::json::array();
  for (const auto& m : rep.modes) {
    nlohmann::json e;
    e["mode_key"] = m.mode_key;
    e["regions"] = m.regions;
    e["active"] = nlohmann::json::array();
    for (const auto& f : m.active) e["active"].push_back({{"id", f.id}, {"sign", f.sign}, {"flux", f.value}});
    e["never_active"] = m.never_active;
    j["modes"].push_back(e);
  }
  j["adjacency"] = nlohmann::json::array();
  for (const auto& a : rep.adjacency) j["adjacency"].push_back({{"a", a.a}, {"b", a.b}, {"changed", a.changed}});
  return j;
}

}  // namespace mplp
