#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "homsim/entanglement.hpp"
#include "homsim/error.hpp"
#include "homsim/sweep.hpp"

using namespace homsim;

namespace {

Experiment base_experiment() {
  Experiment e;
  e.pump_nu_fwhm_nm = 5.0;
  e.filter_fwhm_nm = 2.0;
  return e;
}

Experiment gate_experiment() {
  Experiment e = base_experiment();
  e.transmittance = 1.0 / 3.0;
  return e;
}

std::vector<double> v0_curve(const Experiment& base, SweepVariable var,
                             const std::vector<double>& grid) {
  SweepPlan plan{var, grid, base};
  const SweepResult r = run_sweep(plan, 4);
  std::vector<double> out;
  for (const auto& row : r.rows) {
    EXPECT_TRUE(row.result) << row.error;
    out.push_back(row.result ? row.result->v0 : std::nan(""));
  }
  return out;
}

std::vector<std::string> lines(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string l; std::getline(in, l);) out.push_back(l);
  return out;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) out.push_back(cell);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

}  // namespace

TEST(Sweep, SinglePointEqualsDirectCall) {
  const Experiment e = base_experiment();
  const SweepResult r = run_sweep({SweepVariable::FilterFwhmNm, {2.0}, e});
  ASSERT_EQ(r.rows.size(), 1u);
  ASSERT_TRUE(r.rows[0].result);
  const VisibilityReport direct = visibility(AmplitudeContext::thin(e.source()));
  EXPECT_EQ(r.rows[0].result->v0, direct.v0);
  EXPECT_EQ(r.rows[0].result->v, direct.v);
  EXPECT_EQ(r.rows[0].result->tau0, direct.tau0);
}

TEST(Sweep, WorkerCountDoesNotChangeRows) {
  const SweepPlan plan{SweepVariable::FilterFwhmNm, {0.5, 1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0},
                       base_experiment()};
  const SweepResult a = run_sweep(plan, 1);
  const SweepResult b = run_sweep(plan, 8);
  ASSERT_EQ(a.rows.size(), b.rows.size());
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    ASSERT_TRUE(a.rows[i].result && b.rows[i].result);
    EXPECT_EQ(a.rows[i].value, b.rows[i].value);
    EXPECT_EQ(a.rows[i].result->v0, b.rows[i].result->v0);
    EXPECT_EQ(a.rows[i].result->i_s, b.rows[i].result->i_s);
    EXPECT_EQ(a.rows[i].result->tau0, b.rows[i].result->tau0);
  }
}

TEST(Sweep, DeterministicBytesApartFromTimestamp) {
  const SweepPlan plan{SweepVariable::PumpNuFwhmNm, {2.0, 4.0, 6.0}, base_experiment()};
  SweepResult a = run_sweep(plan, 2);
  SweepResult b = run_sweep(plan, 3);
  a.timestamp = b.timestamp = "t";
  std::ostringstream sa;
  std::ostringstream sb;
  write_csv(sa, a);
  write_csv(sb, b);
  EXPECT_EQ(sa.str(), sb.str());
}

TEST(Sweep, FailingPointBecomesErrorRow) {
  const SweepResult r = run_sweep({SweepVariable::CrystalLengthMm, {0.0, 1.0}, base_experiment()});
  ASSERT_EQ(r.rows.size(), 2u);
  EXPECT_TRUE(r.rows[0].result);
  EXPECT_TRUE(r.rows[0].error.empty());
  EXPECT_FALSE(r.rows[1].result);
  EXPECT_NE(r.rows[1].error.find("InvalidArgument"), std::string::npos);
}

TEST(Sweep, RejectsBadGrids) {
  for (const std::vector<double>& g :
       {std::vector<double>{}, std::vector<double>{1.0, 1.0}, std::vector<double>{1.0, 3.0, 2.0},
        std::vector<double>{1.0, std::nan("")}}) {
    try {
      run_sweep({SweepVariable::FilterFwhmNm, g, base_experiment()});
      FAIL() << "expected Config";
    } catch (const Error& e) {
      EXPECT_EQ(e.kind(), ErrorKind::Config);
    }
  }
  EXPECT_NO_THROW(SweepPlan({SweepVariable::FilterFwhmNm, {3.0, 2.0, 1.0}, base_experiment()})
                      .validate());
}

TEST(Sweep, CsvLayout) {
  SweepPlan plan{SweepVariable::FilterFwhmNm, {1.0, 2.0}, gate_experiment()};
  SweepResult r = run_sweep(plan);
  r.config_echo = {"source:", "  filter_fwhm_nm: 2"};
  std::ostringstream s;
  write_csv(s, r);
  const auto ls = lines(s.str());
  ASSERT_EQ(ls.size(), 7u);
  EXPECT_EQ(ls[0], std::string("# homsim ") + kVersion);
  EXPECT_EQ(ls[1].rfind("# timestamp: ", 0), 0u);
  EXPECT_EQ(ls[2], "# source:");
  EXPECT_EQ(ls[3], "#   filter_fwhm_nm: 2");
  EXPECT_EQ(ls[4], "filter_fwhm_nm,v0,v,tangle,i_s_re,i_s_im,i_n,tau0,error");
  for (std::size_t i = 0; i < 2; ++i) {
    const auto cells = split(ls[5 + i]);
    ASSERT_EQ(cells.size(), 9u);
    const PointResult& p = *r.rows[i].result;
    EXPECT_EQ(std::strtod(cells[0].c_str(), nullptr), r.rows[i].value);
    EXPECT_EQ(std::strtod(cells[1].c_str(), nullptr), p.v0);
    EXPECT_EQ(std::strtod(cells[2].c_str(), nullptr), p.v);
    EXPECT_EQ(std::strtod(cells[3].c_str(), nullptr), *p.tangle);
    EXPECT_EQ(std::strtod(cells[4].c_str(), nullptr), p.i_s.real());
    EXPECT_EQ(std::strtod(cells[6].c_str(), nullptr), p.i_n);
    EXPECT_NE(cells[1].find('e'), std::string::npos);
    EXPECT_EQ(cells[8], "");
  }
}

TEST(Sweep, CsvSelectedOutputsAndErrors) {
  SweepPlan plan{SweepVariable::CrystalLengthMm, {0.0, 1.0}, base_experiment(),
                 {SweepOutput::V0, SweepOutput::Tau0}};
  const SweepResult r = run_sweep(plan);
  std::ostringstream s;
  write_csv(s, r);
  const auto ls = lines(s.str());
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[2], "crystal_length_mm,v0,tau0,error");
  const auto bad = split(ls[4]);
  ASSERT_GE(bad.size(), 4u);
  EXPECT_EQ(bad[1], "");
  EXPECT_EQ(bad[2], "");
  EXPECT_EQ(bad[3].rfind("InvalidArgument: ", 0), 0u);
}

TEST(Sweep, VisibilityBounded) {
  const SweepPlan plan{SweepVariable::FilterFwhmNm, {0.2, 1.0, 5.0, 20.0, 50.0},
                       base_experiment()};
  for (const auto& row : run_sweep(plan, 4).rows) {
    ASSERT_TRUE(row.result);
    EXPECT_GE(row.result->v0, 0.0);
    EXPECT_LE(row.result->v0, 1.0 + 1e-6);
  }
}

TEST(Sweep, FilterTrendOrderedByPumpBandwidth) {
  const std::vector<double> filters{0.5, 1.0, 2.0, 4.0, 8.0};
  std::vector<std::vector<double>> curves;
  for (double pump : {1.0, 3.0, 5.0}) {
    Experiment e = base_experiment();
    e.pump_nu_fwhm_nm = pump;
    curves.push_back(v0_curve(e, SweepVariable::FilterFwhmNm, filters));
  }
  for (const auto& c : curves) {
    for (std::size_t i = 1; i < c.size(); ++i) EXPECT_LT(c[i], c[i - 1]);
  }
  for (std::size_t i = 0; i < filters.size(); ++i) {
    EXPECT_LT(curves[0][i], curves[1][i]);
    EXPECT_LT(curves[1][i], curves[2][i]);
  }
}

TEST(Sweep, NarrowerPumpDominates) {
  const std::vector<double> filters{1.0, 2.0, 4.0, 8.0};
  std::vector<std::vector<double>> curves;
  for (double ratio : {1.0, 2.0, 4.0}) {
    Experiment e = base_experiment();
    e.pump_nu_fwhm_nm = 3.0;
    e.pump_mu_ratio = ratio;
    curves.push_back(v0_curve(e, SweepVariable::FilterFwhmNm, filters));
  }
  for (std::size_t i = 0; i < filters.size(); ++i) {
    EXPECT_LT(std::abs(curves[2][i] - curves[1][i]), std::abs(curves[1][i] - curves[0][i]))
        << "filter " << filters[i];
  }
}

TEST(Sweep, JitterLowersVisibility) {
  Experiment e = base_experiment();
  const SweepResult r = run_sweep({SweepVariable::JitterRmsPs, {0.0, 0.05, 0.1, 0.2, 0.4}, e}, 4);
  for (std::size_t i = 1; i < r.rows.size(); ++i) {
    ASSERT_TRUE(r.rows[i].result);
    EXPECT_LT(r.rows[i].result->v, r.rows[i - 1].result->v);
  }
}

TEST(Sweep, TangleColumnRule) {
  const BeamSplitter gate = BeamSplitter::from_transmittance(1.0 / 3.0);
  const BeamSplitter balanced = BeamSplitter::from_transmittance(0.5);
  EXPECT_NEAR(*tangle_for(gate, 0.4, 0.5), tangle_closed_form(0.4), 1e-15);
  EXPECT_EQ(*tangle_for(gate, 0.8 + 1e-12, 1.0), 1.0);
  EXPECT_FALSE(tangle_for(gate, 0.81, 1.0));
  EXPECT_FALSE(tangle_for(gate, -0.1, 0.0));
  EXPECT_NEAR(*tangle_for(balanced, 0.7, 0.7), tangle_closed_form(0.7), 1e-15);
  EXPECT_FALSE(tangle_for(balanced, 0.95, 0.95));
  EXPECT_FALSE(tangle_for(balanced, 0.8 + 1e-12, 0.8 + 1e-12));

  const SweepResult g = run_sweep({SweepVariable::FilterFwhmNm, {2.0}, gate_experiment()});
  ASSERT_TRUE(g.rows[0].result && g.rows[0].result->tangle);
  EXPECT_NEAR(*g.rows[0].result->tangle, tangle_closed_form(g.rows[0].result->v), 1e-15);
  const SweepResult b = run_sweep({SweepVariable::FilterFwhmNm, {2.0}, base_experiment()});
  EXPECT_FALSE(b.rows[0].result->tangle);
}

TEST(Sweep, VariableNames) {
  for (auto v : {SweepVariable::FilterFwhmNm, SweepVariable::PumpNuFwhmNm,
                 SweepVariable::PumpMuRatio, SweepVariable::CrystalLengthMm,
                 SweepVariable::ChirpPhi2, SweepVariable::JitterRmsPs}) {
    EXPECT_EQ(parse_sweep_variable(to_string(v)), v);
  }
  EXPECT_THROW(parse_sweep_variable("filter"), Error);
  EXPECT_THROW(parse_sweep_output("visibility"), Error);
}

TEST(Sweep, WithVariable) {
  const Experiment e = base_experiment();
  const Experiment c = with_variable(e, SweepVariable::ChirpPhi2, 0.01);
  EXPECT_EQ(c.pump_nu.phi2_ps2, 0.01);
  EXPECT_EQ(c.pump_mu.phi2_ps2, 0.01);
  Experiment r = e;
  r.pump_mu_ratio = 2.0;
  EXPECT_EQ(with_variable(r, SweepVariable::PumpNuFwhmNm, 3.0).pump_mu_ratio, 2.0);
  Experiment t = e;
  std::vector<Complex> samples(33);
  for (int i = 0; i < 33; ++i) samples[i] = std::exp(-0.05 * (i - 16) * (i - 16));
  t.pump_nu.tabulated = TabulatedSpectrum(-16.0, 1.0, samples);
  try {
    with_variable(t, SweepVariable::ChirpPhi2, 0.01);
    FAIL() << "expected InvalidArgument";
  } catch (const Error& err) {
    EXPECT_EQ(err.kind(), ErrorKind::InvalidArgument);
  }
}

TEST(Maximize, TangleFavoursNarrowFilters) {
  const MaximizeResult m =
      maximize(Objective::Tangle, SweepVariable::FilterFwhmNm, 0.5, 4.0, gate_experiment());
  EXPECT_NEAR(m.argmax, 0.5, 1e-3 * 3.5);
  EXPECT_FALSE(m.non_unimodal);
}

TEST(Maximize, VisibilityFavoursBroadPumps) {
  const MaximizeResult m =
      maximize(Objective::V0, SweepVariable::PumpNuFwhmNm, 1.0, 10.0, base_experiment());
  EXPECT_NEAR(m.argmax, 10.0, 1e-3 * 9.0);
  EXPECT_FALSE(m.non_unimodal);
}

TEST(Maximize, ConstantObjective) {
  const MaximizeResult m = maximize_function([](double) { return 0.25; }, 1.0, 2.0);
  EXPECT_TRUE(m.argmax == 1.0 || m.argmax == 2.0);
  EXPECT_EQ(m.value, 0.25);
  EXPECT_FALSE(m.non_unimodal);
}

TEST(Maximize, InteriorPeak) {
  const MaximizeResult m =
      maximize_function([](double x) { return -(x - 0.37) * (x - 0.37); }, 0.0, 1.0);
  EXPECT_NEAR(m.argmax, 0.37, 1e-3);
  EXPECT_FALSE(m.non_unimodal);
}

TEST(Maximize, BimodalObjectiveFlagged) {
  auto f = [](double x) {
    return std::exp(-std::pow((x - 0.2) / 0.05, 2)) + 1.2 * std::exp(-std::pow((x - 0.8) / 0.05, 2));
  };
  const MaximizeResult m = maximize_function(f, 0.0, 1.0, 21);
  EXPECT_TRUE(m.non_unimodal);
  EXPECT_NEAR(m.argmax, 0.8, 1e-3);
}

TEST(Maximize, RejectsBadBounds) {
  EXPECT_THROW(maximize_function([](double x) { return x; }, 1.0, 1.0), Error);
  EXPECT_THROW(maximize_function([](double x) { return x; }, 0.0, INFINITY), Error);
}

TEST(Target, FilterForTangle) {
  const Experiment e = gate_experiment();
  const TargetResult t = solve_target(Objective::Tangle, SweepVariable::FilterFwhmNm, 0.5, 8.0,
                                      0.98, e);
  EXPECT_NEAR(t.value, 0.98, 1e-4);
  const PointResult p = evaluate_point(with_variable(e, SweepVariable::FilterFwhmNm, t.x));
  EXPECT_NEAR(*p.tangle, 0.98, 1e-4);
}

TEST(Target, LinearRoot) {
  const TargetResult t = solve_target_function([](double x) { return 2.0 * x; }, 0.0, 1.0, 0.5);
  EXPECT_NEAR(t.x, 0.25, 1e-6);
  try {
    solve_target_function([](double x) { return x; }, 0.0, 1.0, 2.0);
    FAIL() << "expected OutOfRange";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::OutOfRange);
  }
}
