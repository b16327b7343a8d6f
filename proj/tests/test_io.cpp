#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "polyak_rates/io/config.hpp"
#include "polyak_rates/io/csv.hpp"
#include "polyak_rates/io/report.hpp"
#include "polyak_rates/io/svg.hpp"
#include "polyak_rates/models/mlr.hpp"

using namespace polyak;
using namespace polyak::io;

namespace {

ExperimentConfig from_text(const std::string& s) { return config_from_json(parse_json_text(s)); }

std::string error_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const std::exception& e) {
    return e.what();
  }
  return "";
}

PlotSeries power_series(const std::string& label, double slope) {
  PlotSeries s{label, {}};
  for (double x = 1e3; x <= 1e5 * 1.001; x *= std::sqrt(10.0)) s.points.emplace_back(x, 3.0 * std::pow(x, slope));
  return s;
}

}  // namespace

TEST(Config, MinimalDocumentTakesDefaults) {
  const auto cfg = from_text(R"({"schema_version": 1, "model": "gmm", "regime": "low_snr"})");
  const auto def = default_config(ModelKind::Gmm, Regime::LowSnr);
  EXPECT_EQ(cfg.n_grid, def.n_grid);
  EXPECT_EQ(cfg.trials, 20);
  EXPECT_EQ(cfg.methods, def.methods);
  EXPECT_EQ(cfg.resolved_sigma(), 1.0);
}

TEST(Config, RoundTripThroughJson) {
  auto cfg = default_config(ModelKind::Glm, Regime::StrongSnr);
  cfg.p = 3;
  cfg.sigma = 0.3;
  cfg.seed = 99;
  cfg.trials = 4;
  cfg.n_grid = {100, 300};
  cfg.theta_star = ParamVector::Constant(2, 0.7);
  cfg.methods = {Method::Polyak};
  const auto back = config_from_json(config_to_json(cfg));
  EXPECT_EQ(config_to_json(back), config_to_json(cfg));
  EXPECT_EQ(back.theta_star.value(), cfg.theta_star.value());
}

TEST(Config, MalformedJsonReportsLineAndColumn) {
  const std::string msg = error_of([] { parse_json_text("{\n  \"model\": \"gmm\",\n  oops\n}", "cfg.json"); });
  EXPECT_NE(msg.find("cfg.json: malformed JSON at line 3, column"), std::string::npos) << msg;
}

TEST(Config, UnknownKeyAndMissingFieldsAreNamed) {
  EXPECT_NE(error_of([] { from_text(R"({"schema_version": 1, "model": "gmm", "regime": "low_snr", "sigmaa": 2})"); })
                .find("sigmaa"),
            std::string::npos);
  EXPECT_NE(error_of([] { from_text(R"({"schema_version": 1, "regime": "low_snr"})"); }).find("model"),
            std::string::npos);
  EXPECT_THROW(from_text(R"({"schema_version": 2, "model": "gmm", "regime": "low_snr"})"), ConfigError);
  EXPECT_THROW(from_text(R"({"schema_version": 1, "model": "gmm", "regime": "low_snr", "trials": "x"})"),
               ConfigError);
  EXPECT_THROW(from_text(R"({"schema_version": 1, "model": "gmm", "regime": "low_snr", "n_grid": [10, 5]})"),
               ConfigError);
}

TEST(Config, MissingFileIsIoError) { EXPECT_THROW(load_config("/nonexistent/dir/cfg.json"), IoError); }

TEST(SweepCsv, EmptyResultIsHeaderOnly) {
  std::ostringstream out;
  write_sweep_csv(out, {});
  EXPECT_EQ(out.str(), std::string(kSweepHeader) + "\n");
  std::istringstream in(out.str());
  EXPECT_TRUE(read_sweep_csv(in).empty());
}

TEST(SweepCsv, RandomRowsRoundTripBitwise) {
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  const Method methods[] = {Method::FixedGd, Method::Polyak, Method::AdaptivePolyak, Method::EmUnitStep};
  std::vector<SweepRow> rows(10000);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    r.n = gen() % 1000000 + 1;
    r.trial = static_cast<int>(gen() % 50);
    r.method = methods[gen() % 4];
    r.min_dist = std::exp(u(gen));
    r.argmin_k = gen() % 10000;
    if (gen() % 3) r.iters_to_radius = gen() % 10000;
    r.last_dist = std::exp(u(gen));
    r.wall_ms = std::exp(u(gen));
    r.failed = gen() % 7 == 0;
  }
  std::stringstream buf;
  write_sweep_csv(buf, rows);
  const auto back = read_sweep_csv(buf);
  ASSERT_EQ(back.size(), rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) ASSERT_TRUE(same_row(rows[i], back[i], true)) << "row " << i;
}

TEST(SweepCsv, FailedRowWithoutIterations) {
  SweepRow r;
  r.n = 10;
  r.failed = true;
  r.min_dist = r.last_dist = std::numeric_limits<double>::infinity();
  std::stringstream buf;
  write_sweep_csv(buf, {r});
  EXPECT_NE(buf.str().find("10,0,polyak,inf,0,,inf,0,true"), std::string::npos) << buf.str();
  const auto back = read_sweep_csv(buf);
  EXPECT_FALSE(back[0].iters_to_radius.has_value());
  EXPECT_TRUE(back[0].failed);
}

TEST(SweepCsv, ParseErrorsCarryRowNumber) {
  std::istringstream in(std::string(kSweepHeader) + "\n10,0,polyak,0.1,3,4,0.2,1,false\n10,1,polyak,abc,3,4,0.2,1,false\n");
  try {
    read_sweep_csv(in);
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.row(), 3u);
    EXPECT_NE(std::string(e.what()).find("min_dist"), std::string::npos);
  }
  std::istringstream bad_header("n,trial\n");
  EXPECT_THROW(read_sweep_csv(bad_header), ParseError);
  std::istringstream short_row(std::string(kSweepHeader) + "\n1,2,3\n");
  EXPECT_THROW(read_sweep_csv(short_row), ParseError);
}

TEST(SweepCsv, UnwritablePathIsIoError) {
  EXPECT_THROW(write_sweep_csv("/nonexistent/dir/rows.csv", {}), IoError);
}

TEST(DatasetCsv, RoundTripWithResponses) {
  const auto data = mlr_generate({2, ParamVector::Constant(2, 1.0), 1.0, 50, 4});
  std::stringstream buf;
  write_dataset_csv(buf, data.X, &data.Y);
  const auto back = read_dataset_csv(buf);
  EXPECT_EQ(back.X, data.X);
  ASSERT_TRUE(back.Y.has_value());
  EXPECT_EQ(*back.Y, data.Y);
}

TEST(Svg, SlopeAnnotations) {
  PlotSpec spec{PlotKind::RadiusVsN, "radius", {power_series("adaptive", -0.25), power_series("em", -0.5)}};
  const std::string svg = render_svg(spec);
  EXPECT_NE(svg.find("slope=-0.25"), std::string::npos);
  EXPECT_NE(svg.find("slope=-0.50"), std::string::npos);
  EXPECT_EQ(svg.rfind("<svg", 0), 0u);
  EXPECT_EQ(render_svg(spec), svg);
}

TEST(Svg, UndrawableSeriesNamed) {
  PlotSpec one{PlotKind::ItersVsN, "t", {{"lonely", {{10.0, 1.0}}}}};
  EXPECT_THROW(render_svg(one), DomainError);
  PlotSpec neg{PlotKind::ItersVsN, "t", {{"negative", {{10.0, 1.0}, {100.0, -1.0}}}}};
  EXPECT_NE(error_of([&] { render_svg(neg); }).find("negative"), std::string::npos);
  EXPECT_THROW(parse_plot_kind("pie"), ConfigError);
}

TEST(Svg, TitleIsEscaped) {
  PlotSpec spec{PlotKind::PopulationConvergence, "a<b & c", {power_series("s", -1.0)}};
  const std::string svg = render_svg(spec);
  EXPECT_NE(svg.find("a&lt;b &amp; c"), std::string::npos);
}

TEST(Report, VerdictTableAndJson) {
  VerdictReport rep;
  rep.model = ModelKind::Mlr;
  rep.regime = Regime::LowSnr;
  rep.checks.push_back({"polyak", "radius_slope", "-0.250", "-0.262", 0.08, 0.97, true});
  rep.checks.push_back({"em_unit_step", "iter_exponent", "0.500", "0.200", 0.15, 0.99, false});
  const std::string table = format_verdict_table(rep);
  EXPECT_NE(table.find("PASS"), std::string::npos);
  EXPECT_NE(table.find("FAIL"), std::string::npos);
  EXPECT_NE(table.find("some checks FAILED"), std::string::npos);
  const auto j = verdict_to_json(rep);
  EXPECT_EQ(j["model"], "mlr");
  EXPECT_EQ(j["all_pass"], false);
  EXPECT_EQ(j["checks"].size(), 2u);
  EXPECT_EQ(j["checks"][1]["fitted"], "0.200");
}

TEST(Report, ProbeJsonFields) {
  const SlopeFit f = fit_loglog({1, 2, 4}, {1, 4, 16});
  const auto j = probe_to_json("alpha", f, {1, 2, 4});
  for (const char* k : {"exponent_name", "slope", "r_squared", "radii", "points"}) EXPECT_TRUE(j.contains(k)) << k;
  EXPECT_NEAR(j["slope"].get<double>(), 2.0, 1e-12);
  EXPECT_EQ(j["points"].size(), 3u);
}
