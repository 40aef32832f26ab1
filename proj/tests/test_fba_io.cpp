// Metabolic models, JSON round trips, plot data and the command-line tool.

#include "support.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace mplp;
using namespace mplp::testing;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector x(static_cast<Index>(v.size()));
  Index i = 0;
  for (double d : v) x(i++) = d;
  return x;
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("mplp_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) { std::ofstream(path) << text; }

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

int cli(const std::string& args) {
  const int rc = std::system((std::string(MPLP_CLI) + " " + args + " 2>" + temp_path("stderr.txt")).c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

}  // namespace

TEST(Kinetics, MichaelisMenten) {
  EXPECT_DOUBLE_EQ(michaelis_menten_lb({2.0, 0.5, 0.0}), 0.0);
  EXPECT_DOUBLE_EQ(michaelis_menten_lb({2.0, 0.5, 0.5}), -1.0);
  EXPECT_NEAR(michaelis_menten_lb({2.0, 0.5, 0.5e9}), -2.0, 1e-8 * 2.0);
  EXPECT_GT(michaelis_menten_lb({2.0, 0.5, 0.1}), michaelis_menten_lb({2.0, 0.5, 0.2}));
  EXPECT_THROW(michaelis_menten_lb({0.0, 0.5, 1.0}), Error);
  EXPECT_THROW(michaelis_menten_lb({1.0, -0.5, 1.0}), Error);
}

TEST(Model, LoadsMinimalFile) {
  const MetabolicModel m = load_model(data_path("toy_min.json"));
  EXPECT_EQ(m.num_metabolites(), 1);
  EXPECT_EQ(m.num_reactions(), 2);
}

TEST(Model, RejectsBadFiles) {
  const std::string path = temp_path("bad_model.json");
  write_file(path, R"({"metabolites": ["a"], "reactions": [{"id": "r"}, {"id": "r"}], "stoich": [], "objective": "r"})");
  EXPECT_THROW(load_model(path), Error);
  write_file(path, R"({"metabolites": ["a"], "reactions": [{"id": "r"}], "stoich": [["b", "r", 1]], "objective": "r"})");
  EXPECT_THROW(load_model(path), Error);
  write_file(path, R"({"metabolites": ["a"], "reactions": [{"id": "r"}], "stoich": [], "objective": "s"})");
  EXPECT_THROW(load_model(path), Error);
  write_file(path, R"({"metabolites": ["a"], "reactions": [{"id": "r", "param": {"index": 1, "vmax": 1}}], "stoich": [], "objective": "r"})");
  EXPECT_THROW(load_model(path), Error);  // index 0 unused
  write_file(path, "{\"metabolites\": [\"a\",\n");
  try {
    load_model(path);
    FAIL() << "truncated file accepted";
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("line"), std::string::npos);
  }
  EXPECT_THROW(load_model(temp_path("does_not_exist.json")), Error);
}

TEST(Model, ParametricLpRoundTrip) {
  const MetabolicModel m = load_model(data_path("toy_fba.json"));
  const FbaProblem fba = to_parametric_lp(m);
  EXPECT_EQ(fba.lp.q(), 2);
  ASSERT_EQ(fba.legend.size(), 2u);
  EXPECT_EQ(fba.legend[0].reaction, "EX_glc");
  EXPECT_DOUBLE_EQ(fba.legend[1].vmax, 5.0);
  const Matrix S = m.S.dense();
  for (const Vector th : {vec({0.5, 0.5}), vec({1.0, 0.0}), vec({0.2, 1.0})}) {
    const VertexSolution s = solve_lp(fba.lp, th);
    ASSERT_EQ(s.status, LpStatus::kOptimal);
    const Vector v = fba.lp.recover(s.x, th);
    EXPECT_LT((S * v).cwiseAbs().maxCoeff(), 1e-8);
    EXPECT_GE(v(0), -10.0 * th(0) - 1e-9);
    EXPECT_GE(v(1), -5.0 * th(1) - 1e-9);
    EXPECT_NEAR(v(7), 1.0, 1e-12);   // fixed maintenance flux
    EXPECT_LE(v(8), 8.0 + 1e-9);
    for (Index j : {2, 3, 4, 5}) EXPECT_GE(v(j), -1e-9);
  }
}

TEST(Model, NoParametersGivesSingleRegion) {
  const FbaProblem fba = to_parametric_lp(load_model(data_path("toy_min.json")));
  EXPECT_EQ(fba.lp.q(), 0);
  EXPECT_EQ(fba.lp.F.dense().size(), 0);
  const VertexSolution s = solve_lp(fba.lp, Vector(0));
  ASSERT_EQ(s.status, LpStatus::kOptimal);
  EXPECT_NEAR(s.z, 2.0, 1e-12);
}

TEST(Modes, ToyModelReport) {
  const MetabolicModel m = load_model(data_path("toy_fba.json"));
  const FbaProblem fba = to_parametric_lp(m);
  const Partition p = run(fba.lp, Resolution::kNone);
  const ModeReport rep = metabolic_modes(p, m, fba.lp);
  ASSERT_EQ(rep.modes.size(), p.merged_count());
  for (const auto& mode : rep.modes) {
    // ldh is fixed at zero, so it never carries flux
    EXPECT_NE(std::find(mode.never_active.begin(), mode.never_active.end(), "ldh"), mode.never_active.end());
    for (const auto& f : mode.active) {
      EXPECT_EQ(std::find(mode.never_active.begin(), mode.never_active.end(), f.id), mode.never_active.end());
    }
  }
  EXPECT_FALSE(rep.adjacency.empty());
  const FbaProblem other = to_parametric_lp(load_model(data_path("toy_min.json")));
  EXPECT_THROW(metabolic_modes(p, load_model(data_path("toy_min.json")), other.lp), Error);
}

TEST(Json, PartitionRoundTrip) {
  const StandardFormLP lp = load_standard("threevar.json");
  const Partition p = run(lp, Resolution::kEqCost, 0);
  const json first = to_json(p, lp);
  const PartitionFile back = partition_from_json(json::parse(first.dump()));
  EXPECT_EQ(to_json(back.partition, back.lp).dump(), first.dump());
  EXPECT_EQ(problem_fingerprint(back.lp), p.fingerprint);
}

TEST(Json, GeneralLpErrors) {
  EXPECT_THROW(parse_general_lp(json::parse(R"({"c": [1]})")), Error);
  EXPECT_THROW(parse_general_lp(json::parse(R"({"c": [1], "box": {"lo": [0], "hi": [1]}, "sense": "up"})")), Error);
  EXPECT_THROW(parse_general_lp(json::parse(R"({"c": [1], "box": {"lo": [0], "hi": [1]}, "ineq": [{"a": [1], "w": 1, "f": [1, 2]}]})")),
               Error);
}

TEST(PlotData, UnitSquareAndTiling) {
  const auto sq = polygon_vertices(HPolyhedron::box(vec({0, 0}), vec({1, 1})));
  EXPECT_EQ(sq.size(), 4u);
  EXPECT_NEAR(polygon_area(sq), 1.0, 1e-12);  // positive: counterclockwise

  const StandardFormLP lp = load_standard("twovar.json");
  const Partition p = run(lp, Resolution::kQp);
  double area = 0.0;
  for (const auto& cr : p.regions) area += polygon_area(polygon_vertices(cr.region));
  EXPECT_NEAR(area, 1.0, 1e-6);

  std::ostringstream os;
  write_plot_data(os, p);
  std::istringstream lines(os.str());
  std::string line;
  int count = 0;
  while (std::getline(lines, line)) ++count;
  EXPECT_EQ(count, 3);
}

TEST(PlotData, InfeasibleFlagged) {
  const FbaProblem fba = to_parametric_lp(load_model(data_path("toy_fba.json")));
  std::ostringstream os;
  write_plot_data(os, run(fba.lp, Resolution::kNone));
  EXPECT_NE(os.str().find("infeasible-0 infeasible "), std::string::npos);
}

TEST(Cli, PartitionEvalPlot) {
  const std::string out = temp_path("twovar_qp.json");
  ASSERT_EQ(cli("partition " + data_path("twovar.json") + " --resolve qp --out " + out), 0);
  EXPECT_EQ(partition_from_json(json::parse(read_file(out))).partition.merged_count(), 3u);

  const std::string eval = temp_path("eval.txt");
  ASSERT_EQ(cli("eval " + out + " --theta 0.25,0 >" + eval), 0);
  EXPECT_NE(read_file(eval).find("x* = (1, 1.25)"), std::string::npos) << read_file(eval);
  ASSERT_EQ(cli("eval " + out + " --theta 3,3 >" + eval), 0);
  EXPECT_NE(read_file(eval).find("uncovered"), std::string::npos);
  EXPECT_EQ(cli("eval " + out + " --theta 0.2,x"), 1);

  const std::string plot = temp_path("plot.txt");
  ASSERT_EQ(cli("plot-data " + out + " --out " + plot), 0);
  EXPECT_FALSE(read_file(plot).empty());
}

TEST(Cli, SharedFacetListsBothRegions) {
  const std::string out = temp_path("twovar_qp2.json");
  ASSERT_EQ(cli("partition " + data_path("twovar.json") + " --resolve qp --out " + out), 0);
  const PartitionFile pf = partition_from_json(json::parse(read_file(out)));
  const Partition& p = pf.partition;
  bool found = false;
  for (std::size_t i = 0; i < p.regions.size() && !found; ++i) {
    for (std::size_t k = i + 1; k < p.regions.size() && !found; ++k) {
      const auto seg = polygon_vertices(intersect(p.regions[i].region, p.regions[k].region), 1e-8);
      if (seg.size() != 2) continue;
      found = true;
      const Eigen::Vector2d mid = 0.5 * (seg[0] + seg[1]);
      const IndexList ids = p.locate(mid);
      EXPECT_GE(ids.size(), 2u);
      const Vector a = original_solution(pf.lp, p.regions[i], mid);
      const Vector b = original_solution(pf.lp, p.regions[k], mid);
      EXPECT_LT((a - b).cwiseAbs().maxCoeff(), 1e-6);
    }
  }
  EXPECT_TRUE(found);
}

TEST(Cli, ErrorsAndExitCodes) {
  EXPECT_EQ(cli("partition " + data_path("threevar.json") + " --box 1:1,0:1 --out " + temp_path("x.json")), 1);
  EXPECT_NE(read_file(temp_path("stderr.txt")).find("degenerate parameter box"), std::string::npos);
  EXPECT_EQ(cli("partition " + temp_path("missing.json")), 1);
  EXPECT_EQ(cli("partition " + data_path("twovar.json") + " --resolve sideways"), 1);

  // a one-parameter problem cannot be plotted
  const std::string one = temp_path("one_param.json");
  write_file(one, R"({"sense": "max", "c": [1], "ineq": [{"a": [1], "w": 1, "f": [1]}],
                      "bounds": [{"var": 0, "lo": 0}], "box": {"lo": [0], "hi": [1]}})");
  const std::string out = temp_path("one_param_out.json");
  ASSERT_EQ(cli("partition " + one + " --out " + out), 0);
  EXPECT_EQ(cli("plot-data " + out), 1);
  EXPECT_NE(read_file(temp_path("stderr.txt")).find("plot data requires two parameters"), std::string::npos);
}

TEST(Cli, ModesAndDeterminism) {
  const std::string a = temp_path("toy_w1.json"), b = temp_path("toy_w3.json");
  ASSERT_EQ(cli("partition " + data_path("toy_fba.json") + " --resolve none --workers 1 --out " + a), 0);
  ASSERT_EQ(cli("partition " + data_path("toy_fba.json") + " --resolve none --workers 3 --out " + b), 0);
  EXPECT_EQ(read_file(a), read_file(b));
  const std::string report = temp_path("modes.json");
  ASSERT_EQ(cli("modes " + a + " " + data_path("toy_fba.json") + " --out " + report), 0);
  const json j = json::parse(read_file(report));
  EXPECT_EQ(j["modes"].size(), 2u);
  EXPECT_EQ(cli("modes " + a + " " + data_path("toy_min.json")), 1);
}
