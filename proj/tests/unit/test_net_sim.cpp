#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "consroute/error.hpp"
#include "consroute/net_sim.hpp"

using namespace consroute;

namespace {

void expect_link(const LinkProfile& l, double down, double up, double loss, double d_ms, double u_ms,
                 double dns) {
  EXPECT_EQ(l.downlink_kbps, down);
  EXPECT_EQ(l.uplink_kbps, up);
  EXPECT_EQ(l.loss_rate, loss);
  EXPECT_EQ(l.oneway_down_ms, d_ms);
  EXPECT_EQ(l.oneway_up_ms, u_ms);
  EXPECT_EQ(l.dns_ms, dns);
}

// Independent reference in SI units.
double reference_latency(const LinkProfile& l, double req, double resp) {
  const double up_bps = l.uplink_kbps * 1000.0, down_bps = l.downlink_kbps * 1000.0;
  return (l.dns_ms + l.oneway_up_ms + l.oneway_down_ms) / 1000.0 +
         req * 8.0 / (up_bps * (1.0 - l.loss_rate)) + resp * 8.0 / (down_bps * (1.0 - l.loss_rate));
}

}  // namespace

TEST(NetSim, BuiltinProfiles) {
  const auto all = builtin_profiles();
  ASSERT_EQ(all.size(), 3u);
  const auto& good = all.at("good");
  const auto& bad = all.at("bad");
  expect_link(good.links.edge, 10000, 5000, 0.001, 40, 20, 50);
  expect_link(good.links.cloud, 8000, 4000, 0.001, 80, 40, 70);
  expect_link(bad.links.edge, 2000, 500, 0.01, 120, 80, 200);
  expect_link(bad.links.cloud, 800, 200, 0.03, 250, 200, 400);
  EXPECT_FALSE(good.switch_at.has_value());
  const auto& b2g = all.at("bad2good");
  EXPECT_EQ(b2g.switch_at, 7u);
  EXPECT_EQ(b2g.links, bad.links);
  EXPECT_EQ(*b2g.after, good.links);
}

TEST(NetSim, ZeroPayloadGoodEdge) {
  EXPECT_NEAR(round_trip_latency(good_links().edge, 0, 0), 0.110, 1e-15);
  const LinkProfile& c = good_links().cloud;
  EXPECT_EQ(round_trip_latency(c, 0, 0), (c.dns_ms + c.oneway_up_ms + c.oneway_down_ms) / 1000.0);
}

TEST(NetSim, BadCloudWithPayload) {
  const double lat = round_trip_latency(bad_links().cloud, 1000, 4000);
  EXPECT_NEAR(lat, 0.850 + 8000.0 / (200000 * 0.97) + 32000.0 / (800000 * 0.97), 1e-12);
  EXPECT_NEAR(lat, 0.9325, 5e-4);
}

TEST(NetSim, ZeroLossDropsDivisor) {
  LinkProfile l{1000, 500, 0.0, 10, 5, 3};
  EXPECT_NEAR(round_trip_latency(l, 250, 1000), 0.018 + 2000.0 / 500000 + 8000.0 / 1000000, 1e-15);
}

TEST(NetSim, MatchesReferenceOnGrid) {
  for (const auto& pair : {good_links(), bad_links()}) {
    for (const LinkProfile& l : {pair.edge, pair.cloud}) {
      for (std::uint64_t req : {0u, 1u, 320u, 4096u, 100000u}) {
        for (std::uint64_t resp : {0u, 7u, 2048u, 65536u}) {
          EXPECT_NEAR(round_trip_latency(l, req, resp), reference_latency(l, req, resp), 1e-12);
        }
      }
    }
  }
}

TEST(NetSim, Monotonicity) {
  const LinkProfile base{3000, 1000, 0.02, 30, 20, 10};
  const double at = round_trip_latency(base, 500, 500);
  EXPECT_LE(at, round_trip_latency(base, 600, 500));
  EXPECT_LE(at, round_trip_latency(base, 500, 600));
  auto bumped = [&](auto field, double delta) {
    LinkProfile l = base;
    l.*field += delta;
    return round_trip_latency(l, 500, 500);
  };
  EXPECT_LE(at, bumped(&LinkProfile::loss_rate, 0.1));
  EXPECT_LE(at, bumped(&LinkProfile::oneway_down_ms, 1));
  EXPECT_LE(at, bumped(&LinkProfile::oneway_up_ms, 1));
  EXPECT_LE(at, bumped(&LinkProfile::dns_ms, 1));
  EXPECT_GE(at, bumped(&LinkProfile::downlink_kbps, 100));
  EXPECT_GE(at, bumped(&LinkProfile::uplink_kbps, 100));
}

TEST(NetSim, BadDominatesGood) {
  for (std::uint64_t req = 0; req <= 20000; req += 2500) {
    for (std::uint64_t resp = 0; resp <= 20000; resp += 2500) {
      EXPECT_GE(round_trip_latency(bad_links().edge, req, resp), round_trip_latency(good_links().edge, req, resp));
      EXPECT_GE(round_trip_latency(bad_links().cloud, req, resp),
                round_trip_latency(good_links().cloud, req, resp));
    }
  }
}

TEST(NetSim, ScenarioLink) {
  const auto b2g = builtin_scenario("bad2good");
  EXPECT_EQ(scenario_link(b2g, TierId::edge, 3), bad_links().edge);
  EXPECT_EQ(scenario_link(b2g, TierId::edge, 6), bad_links().edge);
  EXPECT_EQ(scenario_link(b2g, TierId::edge, 7), good_links().edge);
  EXPECT_EQ(scenario_link(b2g, TierId::cloud, 9), good_links().cloud);
  const auto good = builtin_scenario("good");
  for (std::size_t w : {0u, 7u, 1000u}) EXPECT_EQ(scenario_link(good, TierId::cloud, w), good_links().cloud);
  try {
    scenario_link(good, TierId::device, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::invalid_config);
  }
  EXPECT_EQ(scenario_link(builtin_scenario("bad2good", 2), TierId::cloud, 2), good_links().cloud);
  EXPECT_THROW(builtin_scenario("good", 3), Error);
  EXPECT_THROW(builtin_scenario("lunar"), Error);
}

TEST(NetSim, Validation) {
  LinkProfile l = good_links().edge;
  l.loss_rate = 1.0;
  EXPECT_THROW(l.validate(), Error);
  l = good_links().edge;
  l.uplink_kbps = 0.0;
  EXPECT_THROW(l.validate(), Error);
  l = good_links().edge;
  l.dns_ms = -1.0;
  EXPECT_THROW(l.validate(), Error);
  NetworkScenario s{"x", good_links(), 3, std::nullopt};
  EXPECT_THROW(s.validate(), Error);
}

TEST(NetSim, LoadScenarioFile) {
  const auto dir = std::filesystem::temp_directory_path() / "consroute_net_test";
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "lab.jsonl");
    out << R"({"name":"lab","edge":{"downlink_kbps":1000,"uplink_kbps":100,"loss_rate":0.5,"oneway_down_ms":1,"oneway_up_ms":2,"dns_ms":3}})" << "\n";
    out << R"({"switch_at":4,"after_cloud":{"dns_ms":0}})" << "\n";
  }
  const auto s = load_scenario(dir / "lab.jsonl");
  EXPECT_EQ(s.name, "lab");
  EXPECT_EQ(s.links.edge, (LinkProfile{1000, 100, 0.5, 1, 2, 3}));
  EXPECT_EQ(s.links.cloud, good_links().cloud);
  EXPECT_EQ(scenario_link(s, TierId::cloud, 4).dns_ms, 0.0);
  EXPECT_EQ(scenario_link(s, TierId::cloud, 3).dns_ms, 70.0);
  {
    std::ofstream out(dir / "bad.jsonl");
    out << R"({"name":"x"})" << "\n" << "{oops\n";
  }
  try {
    load_scenario(dir / "bad.jsonl");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  {
    std::ofstream out(dir / "neg.jsonl");
    out << R"({"edge":{"uplink_kbps":-5}})" << "\n";
  }
  EXPECT_THROW(load_scenario(dir / "neg.jsonl"), Error);
  EXPECT_THROW(load_scenario(dir / "none.jsonl"), Error);
  std::filesystem::remove_all(dir);
}
