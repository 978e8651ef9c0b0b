#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "hyperloss/io.hpp"

using namespace hyperloss;

namespace {

const char* kNetwork = R"({
  "schema": 1,
  "modes": [{"label": "FM", "order": 0}, {"label": "HOM", "order": 2}],
  "input": {"mode": "FM", "sqz_db": 15},
  "readout": "FM",
  "external_loss": 0.1,
  "frequency_grid": {"start_hz": 0, "stop_hz": 1000, "points": 3},
  "components": [
    {"kind": "coupler", "from": "FM", "to": "HOM", "eps": 0.08},
    {"kind": "gouy", "mode": "HOM", "psi": "pi/4", "free": true},
    {"kind": "cavity", "mode": "FM", "delta_hz": 5, "gamma_hz": 100},
    {"kind": "cavity", "mode": "HOM", "resonant": false},
    {"kind": "loss", "mode": "HOM", "lambda": 0.5},
    {"kind": "squeezer", "mode": "HOM", "r": 0.1, "angle": "pi"}
  ]
})";

std::string config_error_where(const std::string& text) {
  try {
    network_from_json(parse_document(text));
  } catch (const ConfigError& e) {
    return e.where();
  }
  return "<no error>";
}

}  // namespace

TEST(Io, ParseAngle) {
  EXPECT_DOUBLE_EQ(parse_angle("pi"), kPi);
  EXPECT_DOUBLE_EQ(parse_angle("pi/2"), kPi / 2);
  EXPECT_DOUBLE_EQ(parse_angle("-pi/4"), -kPi / 4);
  EXPECT_DOUBLE_EQ(parse_angle("3pi/2"), 1.5 * kPi);
  EXPECT_DOUBLE_EQ(parse_angle("2*pi"), kTwoPi);
  EXPECT_DOUBLE_EQ(parse_angle("0.25"), 0.25);
  EXPECT_THROW(parse_angle("pie"), InvalidArgument);
  EXPECT_THROW(parse_angle("1.0x"), InvalidArgument);
  EXPECT_THROW(parse_angle(""), InvalidArgument);
}

TEST(Io, NetworkFields) {
  const NetworkSpec net = network_from_json(parse_document(kNetwork));
  EXPECT_EQ(net.n_modes(), 2u);
  EXPECT_NEAR(net.input.r, db_to_r(15.0), 1e-15);
  EXPECT_DOUBLE_EQ(net.external_loss, 0.1);
  ASSERT_EQ(net.frequency_grid.size(), 3u);
  EXPECT_DOUBLE_EQ(net.frequency_grid[1], kTwoPi * 500.0);
  const auto& g = std::get<Gouy>(net.components[1]);
  EXPECT_EQ(g.mode_order, 2);
  EXPECT_TRUE(g.free);
  EXPECT_DOUBLE_EQ(g.psi, kPi / 4);
  const auto& cav = std::get<Cavity>(net.components[2]);
  EXPECT_DOUBLE_EQ(cav.gamma, kTwoPi * 100.0);
  EXPECT_DOUBLE_EQ(cav.delta, kTwoPi * 5.0);
  EXPECT_FALSE(std::get<Cavity>(net.components[3]).resonant);
  EXPECT_DOUBLE_EQ(std::get<Squeezer>(net.components[5]).angle, kPi);
}

TEST(Io, RoundTrip) {
  const NetworkSpec a = network_from_json(parse_document(kNetwork));
  const json canonical = to_json(a);
  const NetworkSpec b = network_from_json(canonical);
  EXPECT_EQ(to_json(b).dump(), canonical.dump());
  for (double w : a.frequency_grid) EXPECT_DOUBLE_EQ(readout_at(a, w).v_min, readout_at(b, w).v_min);

  ChainSpec c;
  c.n_nodes = 4;
  c.eps = 0.02;
  c.phi = {0.1, 0.2, 0.3, 0.4};
  c.r_in = 1.7;
  c.policy = HomPolicy::refreshed;
  c.order = PhaseOrder::before_coupler;
  c.readout = Readout::optimal;
  const ChainSpec d = chain_from_json(to_json(c));
  EXPECT_EQ(to_json(d).dump(), to_json(c).dump());
}

TEST(Io, ErrorsNameTheField) {
  std::string text = kNetwork;
  EXPECT_EQ(config_error_where(std::string(text).replace(text.find("\"eps\": 0.08"), 11, "\"eps\": 1.5")),
            "components[0].eps");
  EXPECT_EQ(config_error_where(std::string(text).replace(text.find("\"to\": \"HOM\""), 11, "\"to\": \"LG9\"")),
            "components[0].to");
  EXPECT_EQ(config_error_where(std::string(text).replace(text.find("\"lambda\""), 8, "\"lamda\"")), "components[4].lamda");
  EXPECT_EQ(config_error_where(std::string(text).replace(text.find("\"schema\": 1"), 11, "\"schema\": 2")), "schema");
  EXPECT_EQ(config_error_where(std::string(text).replace(text.find("\"kind\": \"loss\""), 14, "\"kind\": \"lens\"")),
            "components[4].kind");
  EXPECT_EQ(config_error_where(std::string(text).replace(text.find(", \"gamma_hz\": 100"), 17, "")),
            "components[2]");
}

TEST(Io, SyntaxErrorReportsLine) {
  try {
    parse_document("{\n  \"schema\": 1,\n  \"modes\": [,\n}", "bad.json");
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.where(), "bad.json:3");
  }
}

TEST(Io, Overrides) {
  json doc = parse_document(kNetwork);
  apply_overrides(doc, {"components.0.eps=0.02", "input.sqz_db=10", "components.1.psi=pi"});
  const NetworkSpec net = network_from_json(doc);
  EXPECT_DOUBLE_EQ(std::get<Coupler>(net.components[0]).eps, 0.02);
  EXPECT_NEAR(net.input.r, db_to_r(10.0), 1e-15);
  EXPECT_DOUBLE_EQ(std::get<Gouy>(net.components[1]).psi, kPi);
  EXPECT_THROW(apply_overrides(doc, {"input.nonexistent=1"}), ConfigError);
  EXPECT_THROW(apply_overrides(doc, {"components.9.eps=1"}), ConfigError);
  EXPECT_THROW(apply_overrides(doc, {"noequals"}), ConfigError);
}

TEST(Io, ChainDocument) {
  const ChainSpec c = chain_from_json(parse_document(
      R"({"schema": 1, "chain": {"nodes": 10, "eps": 0.01, "phi": "pi", "sqz_db": 15, "phase_order": "before"}})"));
  EXPECT_EQ(c.n_nodes, 10);
  EXPECT_DOUBLE_EQ(c.phi[0], kPi);
  EXPECT_EQ(c.order, PhaseOrder::before_coupler);
  EXPECT_EQ(c.readout, Readout::locked);
  EXPECT_THROW(chain_from_json(parse_document(R"({"schema": 1, "chain": {"nodes": 2, "eps": 0.01, "r": 1, "policy": "x"}})")),
               ConfigError);
  EXPECT_TRUE(std::holds_alternative<ChainSpec>(spec_from_json(to_json(c))));
}

TEST(Io, AtomicWriteReplacesFile) {
  const auto path = std::filesystem::temp_directory_path() / "hyperloss_io_test.txt";
  write_file_atomic(path, "first");
  write_file_atomic(path, "second");
  std::ifstream in(path);
  std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  EXPECT_EQ(content, "second");
  EXPECT_FALSE(std::filesystem::exists(path.string() + ".tmp"));
  std::filesystem::remove(path);
}

TEST(Io, WrapPhase) {
  EXPECT_DOUBLE_EQ(wrap_phase(kTwoPi + 0.5), 0.5);
  EXPECT_NEAR(wrap_phase(-0.5), kTwoPi - 0.5, 1e-15);
  EXPECT_GE(wrap_phase(-1e-18), 0.0);
  EXPECT_LT(wrap_phase(-1e-18), kTwoPi);
}
