#pragma once

// Helpers shared by the unit tests and the acceptance runner.

#include "mplp/io.hpp"

#include <random>
#include <string>

#ifndef MPLP_DATA_DIR
#define MPLP_DATA_DIR "data"
#endif

namespace mplp::testing {

inline std::string data_path(const std::string& name) { return std::string(MPLP_DATA_DIR) + "/" + name; }

inline GeneralLP load_general(const std::string& name) { return parse_general_lp(parse_json_file(data_path(name))); }

inline StandardFormLP load_standard(const std::string& name) {
  StandardFormLP lp = to_standard_form(load_general(name));
  check_well_conditioned(lp);
  return lp;
}

inline HPolyhedron box_of(const StandardFormLP& lp) { return HPolyhedron::box(lp.box_lo, lp.box_hi); }

inline Partition run(const StandardFormLP& lp, Resolution res, std::uint64_t seed = 0) {
  PartitionConfig cfg;
  cfg.resolution = res;
  cfg.seed = seed;
  return partition(lp, box_of(lp), cfg);
}

/// Original-variable solution of region cr at theta.
inline Vector original_solution(const StandardFormLP& lp, const CriticalRegion& cr, const Vector& theta) {
  return lp.recover(cr.solution.primal(theta), theta);
}

inline Vector uniform_in_box(std::mt19937_64& rng, const Vector& lo, const Vector& hi) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Vector t(lo.size());
  for (Index i = 0; i < t.size(); ++i) t(i) = lo(i) + (hi(i) - lo(i)) * u(rng);
  return t;
}

/// Largest disagreement between regions that contain the same point of the
/// segment a -> b, over `samples` points plus every crossing of a region
/// boundary. `pick` selects the compared components of the original solution.
template <class Pick>
double max_path_jump(const StandardFormLP& lp, const Partition& p, const Vector& a, const Vector& b, int samples, Pick pick) {
  std::vector<double> ss;
  for (int k = 0; k < samples; ++k) ss.push_back(static_cast<double>(k) / (samples - 1));
  // region boundaries along the segment
  const Vector dir = b - a;
  for (const auto& cr : p.regions) {
    for (Index i = 0; i < cr.region.rows(); ++i) {
      const double slope = cr.region.M.row(i).dot(dir);
      if (std::abs(slope) < 1e-12) continue;
      const double s = (cr.region.t(i) - cr.region.M.row(i).dot(a)) / slope;
      if (s > 0.0 && s < 1.0) ss.push_back(s);
    }
  }
  double worst = 0.0;
  for (double s : ss) {
    const Vector th = a + s * dir;
    const IndexList ids = p.locate(th, 1e-9);
    for (std::size_t i = 0; i < ids.size(); ++i) {
      for (std::size_t k = i + 1; k < ids.size(); ++k) {
        const Vector xi = pick(original_solution(lp, p.regions[static_cast<std::size_t>(ids[i])], th));
        const Vector xk = pick(original_solution(lp, p.regions[static_cast<std::size_t>(ids[k])], th));
        worst = std::max(worst, (xi - xk).cwiseAbs().maxCoeff());
      }
    }
  }
  return worst;
}

/// Standard-form LP from max c'x, G x <= w + F theta, x >= 0 in general form.
inline GeneralLP inequality_lp(const Matrix& g, const Vector& w, const Matrix& f, const Vector& c, const Vector& lo,
                               const Vector& hi) {
  GeneralLP lp;
  lp.sense = Sense::kMax;
  lp.c = c;
  lp.q = f.cols();
  for (Index i = 0; i < g.rows(); ++i) {
    ParamRow r;
    r.a = g.row(i).transpose();
    r.w = w(i);
    r.f = f.row(i).transpose();
    lp.ineq.push_back(r);
  }
  for (Index j = 0; j < g.cols(); ++j) {
    VarBound b;
    b.var = j;
    b.lo = 0.0;
    lp.bounds.push_back(b);
  }
  lp.box_lo = lo;
  lp.box_hi = hi;
  return lp;
}

/// Positive constraint matrix (bounded, feasible near theta = 0) with
/// `dup` rows repeated, so vertices on those rows are primal degenerate.
inline GeneralLP random_degenerate_lp(std::mt19937_64& rng, Index nvar, Index nrow, Index dup) {
  std::uniform_real_distribution<double> pos(0.1, 1.0);
  std::uniform_real_distribution<double> sym(-0.3, 0.3);
  std::uniform_int_distribution<Index> pick(0, nrow - 1);
  Matrix g(nrow + dup, nvar);
  Vector w(nrow + dup);
  Matrix f(nrow + dup, 2);
  for (Index i = 0; i < nrow; ++i) {
    for (Index j = 0; j < nvar; ++j) g(i, j) = pos(rng);
    w(i) = 1.0 + pos(rng);
    f(i, 0) = sym(rng);
    f(i, 1) = sym(rng);
  }
  for (Index k = 0; k < dup; ++k) {
    const Index src = pick(rng);
    g.row(nrow + k) = g.row(src);
    w(nrow + k) = w(src);
    f.row(nrow + k) = f.row(src);
  }
  Vector c(nvar);
  for (Index j = 0; j < nvar; ++j) c(j) = pos(rng);
  return inequality_lp(g, w, f, c, Vector::Zero(2), Vector::Ones(2));
}

/// Cost parallel to one constraint row, so a whole edge or facet is optimal
/// whenever that row is active.
inline GeneralLP random_multiple_lp(std::mt19937_64& rng, Index nvar, Index nrow) {
  std::uniform_real_distribution<double> pos(0.1, 1.0);
  std::uniform_real_distribution<double> sym(-0.3, 0.3);
  Matrix g(nrow, nvar);
  Vector w(nrow);
  Matrix f(nrow, 2);
  for (Index i = 0; i < nrow; ++i) {
    for (Index j = 0; j < nvar; ++j) g(i, j) = pos(rng);
    w(i) = 1.0 + pos(rng);
    f(i, 0) = sym(rng);
    f(i, 1) = sym(rng);
  }
  // row 0 is binding; the others cut its facet only partly
  w(0) = 0.5;
  f.row(0).setZero();
  for (Index i = 1; i < nrow; ++i) {
    const double reach = 0.5 * (g.row(i).array() / g.row(0).array()).maxCoeff();
    w(i) = reach * (0.7 + 0.6 * (pos(rng) - 0.1) / 0.9);
    f.row(i) *= reach;
  }
  return inequality_lp(g, w, f, g.row(0).transpose(), Vector::Zero(2), Vector::Ones(2));
}

}  // namespace mplp::testing
