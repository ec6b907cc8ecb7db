#include <gtest/gtest.h>

#include <numbers>

#include "drivelab/env.hpp"
#include "drivelab/errors.hpp"
#include "drivelab/image_codec.hpp"
#include "drivelab/observer.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace drivelab;
using namespace drivelab::testing;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

WorldState empty_world() { return make_world(nullptr, 1); }

WorldState random_scene(Rng& rng, int actors, double extent = 60) {
  WorldState w = empty_world();
  for (int i = 0; i < actors; ++i) put(w, {rng.uniform(-extent, extent), rng.uniform(-extent, extent)}, rng.uniform(-kPi, kPi));
  return w;
}

std::set<ActorId> all_ids(const WorldState& w) {
  std::set<ActorId> out;
  for (const auto& [id, _] : w.actors) out.insert(id);
  return out;
}

VisibilityConfig mode(VisibilityMode m) {
  VisibilityConfig c;
  c.mode = m;
  return c;
}

}  // namespace

TEST(Observer, RegisterAndCollect) {
  Observer obs;
  obs.register_handler("bev", make_builtin_handler("bev"));
  EXPECT_THROW(obs.register_handler("bev", make_builtin_handler("bev")), ConfigError);
  obs.register_handler("count", [](const HandlerInput& in) -> Payload {
    return ScalarMap{{"actors", static_cast<double>(in.world.actors.size())}};
  });
  WorldState w = empty_world();
  const ActorId ego = put(w, {0, 0}, 0);
  put(w, {10, 0}, 0);
  put(w, {-10, 0}, 0);
  const ObservationBundle b = obs.collect(w, ego, {}, {});
  EXPECT_EQ(b.names(), (std::vector<std::string>{"bev", "count"}));
  EXPECT_EQ(std::get<ScalarMap>(b.at("count")).at("actors"), 3.0);
}

TEST(Observer, BuiltinsExactlyThreeKeysAndDeterministic) {
  Observer obs;
  for (const char* n : {"bev", "lidar", "state_vector"}) obs.register_handler(n, make_builtin_handler(n));
  Rng rng(2);
  WorldState w = random_scene(rng, 8, 20);
  const ObservationBundle a = obs.collect(w, ActorId{1}, {}, {});
  EXPECT_EQ(a.names(), (std::vector<std::string>{"bev", "lidar", "state_vector"}));
  EXPECT_EQ(a, obs.collect(w, ActorId{1}, {}, {}));
}

TEST(Observer, HandlerErrorNamesHandler) {
  Observer obs;
  obs.register_handler("broken", [](const HandlerInput&) -> Payload { throw std::runtime_error("boom"); });
  WorldState w = empty_world();
  const ActorId ego = put(w, {0, 0}, 0);
  try {
    obs.collect(w, ego, {}, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("broken"), std::string::npos);
    EXPECT_NE(std::string(e.what()).find("boom"), std::string::npos);
  }
}

TEST(Visibility, FullReturnsEveryActor) {
  Rng rng(1);
  WorldState w = random_scene(rng, 7);
  EXPECT_EQ(visible_set(w, ActorId{1}, mode(VisibilityMode::full)).size(), 7u);
  EXPECT_THROW(visible_set(w, ActorId{99}, {}), SimulationError);
}

TEST(Visibility, ConeExamples) {
  WorldState w = empty_world();
  const ActorId ego = put(w, {0, 0}, 0);
  const ActorId ahead = put(w, {10, 0}, 0);
  const ActorId side = put(w, {0, 10}, 0);
  const ActorId far = put(w, {31, 0}, 0);
  const auto v = visible_set(w, ego, mode(VisibilityMode::fov));
  EXPECT_TRUE(v.contains(ego));
  EXPECT_TRUE(v.contains(ahead));
  EXPECT_FALSE(v.contains(side));
  EXPECT_FALSE(v.contains(far));
}

TEST(Visibility, InclusionAndTwoHopOracle) {
  Rng rng(8);
  for (int scene = 0; scene < 200; ++scene) {
    WorldState w = random_scene(rng, 2 + static_cast<int>(rng.index(12)), 40);
    const ActorId ego{1};
    const auto f = visible_set(w, ego, mode(VisibilityMode::fov));
    const auto s = visible_set(w, ego, mode(VisibilityMode::sfov));
    const auto full = visible_set(w, ego, mode(VisibilityMode::full));
    EXPECT_TRUE(std::includes(s.begin(), s.end(), f.begin(), f.end()));
    EXPECT_TRUE(std::includes(full.begin(), full.end(), s.begin(), s.end()));
    EXPECT_EQ(f, oracle::fov(w, ego, kPi / 3, 30));
    EXPECT_EQ(s, oracle::two_hop(w, ego, kPi / 3, 30));
  }
}

TEST(Intentions, TruncationAndScope) {
  WorldState w = empty_world();
  const ActorId ego = put(w, {0, 0}, 0);
  const ActorId a = put(w, {10, 0}, 0);
  const ActorId b = put(w, {12, 6}, 0);
  Route ra, rb;
  for (int i = 0; i < 12; ++i) ra.waypoints.push_back({10.0 + i, 0});
  ra.cursor = 2;
  rb.waypoints = {{1, 1}, {2, 2}, {3, 3}};
  rb.cursor = 1;
  const std::map<ActorId, Route> routes{{ego, ra}, {a, ra}, {b, rb}};
  const std::set<ActorId> vis{ego, a, b};

  EXPECT_TRUE(collect_intentions(w, ego, {}, routes, vis).empty());
  IntentionConfig cfg{true, 3, IntentionScope::visible_only};
  auto got = collect_intentions(w, ego, cfg, routes, vis);
  EXPECT_EQ(got.at(a), (std::vector<Vec2>{{12, 0}, {13, 0}, {14, 0}}));
  EXPECT_FALSE(got.contains(ego));
  cfg.shared_waypoints = 10;
  got = collect_intentions(w, ego, cfg, routes, vis);
  EXPECT_EQ(got.at(b).size(), 2u);
  EXPECT_EQ(got.at(a).size(), 10u);
  got = collect_intentions(w, ego, cfg, routes, {ego, a});
  EXPECT_FALSE(got.contains(b));
  cfg.scope = IntentionScope::all;
  got = collect_intentions(w, ego, cfg, routes, {ego, a});
  EXPECT_TRUE(got.contains(b));
}

TEST(Bev, EgoOnlyAtAnchor) {
  WorldState w = empty_world();
  const ActorId ego = put(w, {5, -3}, 0.4);
  const BevSpec spec;
  const Image img = render_bev(w, ego, spec, {ego}, {});
  ASSERT_EQ(img.height, 128);
  ASSERT_EQ(img.width, 128);
  EXPECT_EQ(img.at(spec.anchor_row(), spec.anchor_col()), spec.palette.ego);
  int ego_px = 0;
  for (int r = 0; r < img.height; ++r)
    for (int c = 0; c < img.width; ++c) {
      const std::uint8_t v = img.at(r, c);
      if (v == spec.palette.ego) {
        ++ego_px;
        const Vec2 local = bev_pixel_center(spec, r, c);
        EXPECT_LE(std::abs(local.x), 2.25);
        EXPECT_LE(std::abs(local.y), 1.0);
      } else {
        EXPECT_EQ(v, spec.palette.background);
      }
    }
  EXPECT_EQ(ego_px, 18 * 8);
}

TEST(Bev, VehicleFiveMetersAhead) {
  for (double heading : {0.0, 1.1, -2.5}) {
    WorldState w = empty_world();
    const ActorId ego = put(w, {3, 4}, heading);
    const ActorId other = put(w, Vec2{3, 4} + unit_from_angle(heading) * 5.0, heading, 0, 2.0, 2.0);
    const BevSpec spec;
    const Image img = render_bev(w, ego, spec, {ego, other}, {});
    double rs = 0, cs = 0;
    int n = 0;
    for (int r = 0; r < img.height; ++r)
      for (int c = 0; c < img.width; ++c)
        if (img.at(r, c) == spec.palette.other_vehicle) {
          rs += r + 0.5;
          cs += c + 0.5;
          ++n;
        }
    ASSERT_GT(n, 0);
    // anchor pixel center is at (anchor_row + 0.5, anchor_col + 0.5)
    EXPECT_NEAR(rs / n - (spec.anchor_row() + 0.5), -20.0, 1.0);
    EXPECT_NEAR(cs / n - (spec.anchor_col() + 0.5), 0.0, 1.0);
  }
}

TEST(Bev, InvisibleActorsNotDrawn) {
  WorldState w = empty_world();
  const ActorId ego = put(w, {0, 0}, 0);
  const ActorId other = put(w, {8, 0}, 0);
  const BevSpec spec;
  const Image with = render_bev(w, ego, spec, {ego, other}, {});
  const Image without = render_bev(w, ego, spec, {ego}, {});
  EXPECT_NE(with, without);
  for (std::size_t i = 0; i < with.pixels.size(); ++i)
    if (with.pixels[i] != without.pixels[i]) EXPECT_EQ(with.pixels[i], spec.palette.other_vehicle);
}

TEST(Bev, RotationAboutEgoLeavesImageUnchanged) {
  auto m = load_map_cached("roundabout.map.json");
  Rng rng(21);
  for (int trial = 0; trial < 10; ++trial) {
    const double theta = rng.uniform(-kPi, kPi);
    const Lane& l = m->lanes()[rng.index(m->lanes().size())];
    const Vec2 c = l.point_at(rng.uniform(0, l.length()));
    auto rot = [&](Vec2 p) { return c + rotate(p - c, theta); };

    json doc = {{"lanes", json::array()}, {"signals", json::array()}};
    for (const Lane& lane : m->lanes()) {
      std::vector<Vec2> pts;
      for (const Vec2& p : lane.centerline) pts.push_back(rot(p));
      json lj = lane_json(lane.id, pts, lane.width, lane.successors);
      doc["lanes"].push_back(lj);
    }
    WorldState a = make_world(m, 1), b = make_world(map_from(doc), 1);
    const double h = rng.uniform(-kPi, kPi);
    const ActorId ea = put(a, c, h), eb = put(b, c, normalize_angle(h + theta));
    for (int i = 0; i < 5; ++i) {
      const Vec2 p = c + Vec2{rng.uniform(-15, 15), rng.uniform(-15, 15)};
      const double hh = rng.uniform(-kPi, kPi);
      put(a, p, hh);
      put(b, rot(p), normalize_angle(hh + theta));
    }
    Route r;
    for (int i = 1; i < 10; ++i) r.waypoints.push_back(c + unit_from_angle(h) * (1.5 * i));
    Route rb = r;
    for (Vec2& p : rb.waypoints) p = rot(p);
    a.routes[ea] = r;
    b.routes[eb] = rb;
    const BevSpec spec;
    const Image ia = render_bev(a, ea, spec, all_ids(a), {});
    const Image ib = render_bev(b, eb, spec, all_ids(b), {});
    std::size_t diff = 0;
    for (std::size_t i = 0; i < ia.pixels.size(); ++i) diff += ia.pixels[i] != ib.pixels[i];
    EXPECT_EQ(diff, 0u) << "theta " << theta;
  }
}

TEST(Lidar, EmptySceneAllMaxRange) {
  WorldState w = empty_world();
  const ActorId ego = put(w, {0, 0}, 0.3);
  for (double r : lidar_scan(w, ego, {})) EXPECT_EQ(r, 30.0);
  EXPECT_EQ(lidar_scan(w, ego, {}).size(), 72u);
}

TEST(Lidar, WallEightMetersAhead) {
  WorldState w = empty_world();
  const ActorId ego = put(w, {2, 1}, 0.0);
  put(w, {2 + 8.0 + 0.5, 1}, kPi / 2, 0, 20.0, 1.0);
  const auto ranges = lidar_scan(w, ego, {});
  EXPECT_NEAR(ranges[0], 8.0, 1e-6);
}

TEST(Lidar, NotMaskedByVisibility) {
  auto m = load_map_cached("intersection.map.json");
  TaskConfig cfg = make_task("right_turn_simple");
  WorldState w = make_world(m, 1);
  const ActorId ego = spawn_vehicle(w, {.lane = "s_in", .offset = 25});
  spawn_vehicle(w, {.lane = "w_in", .offset = 30});
  Observer obs;
  obs.register_handler("lidar", make_builtin_handler("lidar"));
  EXPECT_EQ(obs.collect(w, ego, mode(VisibilityMode::fov), {}), obs.collect(w, ego, mode(VisibilityMode::full), {}));
}

TEST(Lidar, MatchesRayMarchingOracle) {
  const std::vector<std::string> maps{"intersection.map.json", "roundabout.map.json", "four_lane.map.json"};
  Rng rng(12);
  for (int scene = 0; scene < 20; ++scene) {
    auto m = load_map_cached(maps[scene % maps.size()]);
    WorldState w = make_world(m, 1);
    const Lane& l = m->lanes()[rng.index(m->lanes().size())];
    const ActorId ego = put(w, l.point_at(rng.uniform(0, l.length())) + Vec2{rng.uniform(-1, 1), rng.uniform(-1, 1)},
                            rng.uniform(-kPi, kPi));
    for (int i = 0; i < 6; ++i) {
      const Vec2 p = w.actor(ego).pose.position + Vec2{rng.uniform(-25, 25), rng.uniform(-25, 25)};
      if (distance(p, w.actor(ego).pose.position) < 4) continue;
      put(w, p, rng.uniform(-kPi, kPi), 0, rng.uniform(3, 6), rng.uniform(1.5, 2.5));
    }
    const auto got = lidar_scan(w, ego, {});
    const auto want = oracle::march_lidar(w, ego, 72, 30.0);
    for (std::size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(got[i], want[i], 0.02) << "scene " << scene << " beam " << i;
  }
}

TEST(StateVector, EgoFirstSortedPadded) {
  WorldState w = empty_world();
  const ActorId ego = put(w, {10, 10}, kPi / 2, 3.0);
  const ActorId far = put(w, {10, 30}, kPi / 2, 1.0);
  const ActorId near = put(w, {5, 10}, 0.0, 2.0);
  const auto v = state_vector(w, ego, {ego, far, near});
  ASSERT_EQ(v.size(), kStateVectorRows * 4);
  EXPECT_EQ(v[0], 0.0);
  EXPECT_EQ(v[1], 0.0);
  EXPECT_EQ(v[2], 0.0);
  EXPECT_EQ(v[3], 3.0);
  // nearest: 5 m to the ego's left in world -x direction; ego faces +y so that is left (+y local)
  EXPECT_NEAR(v[4], 0.0, 1e-12);
  EXPECT_NEAR(v[5], 5.0, 1e-12);
  EXPECT_NEAR(v[6], -kPi / 2, 1e-12);
  EXPECT_EQ(v[7], 2.0);
  EXPECT_NEAR(v[8], 20.0, 1e-12);
  EXPECT_NEAR(v[9], 0.0, 1e-12);
  for (std::size_t i = 12; i < v.size(); ++i) EXPECT_EQ(v[i], 0.0);
  const auto masked = state_vector(w, ego, {ego});
  for (std::size_t i = 4; i < masked.size(); ++i) EXPECT_EQ(masked[i], 0.0);
}

TEST(FovAblation, CrossingVehicleOnlyInFull) {
  auto m = load_map_cached("intersection.map.json");
  WorldState w = make_world(m, 1);
  const ActorId ego = spawn_vehicle(w, {.lane = "s_in", .offset = 25});
  // crossing traffic from the left, 5 m ahead and 14 m across: outside the cone
  const Pose ep = w.actor(ego).pose;
  const ActorId crossing = put(w, ep.position + rotate({5, 14}, ep.heading), normalize_angle(ep.heading - kPi / 2), 6.0);
  Observer obs;
  for (const char* n : {"bev", "lidar", "state_vector"}) obs.register_handler(n, make_builtin_handler(n));
  const auto fov = obs.collect(w, ego, mode(VisibilityMode::fov), {});
  const auto full = obs.collect(w, ego, mode(VisibilityMode::full), {});
  EXPECT_FALSE(visible_set(w, ego, mode(VisibilityMode::fov)).contains(crossing));
  EXPECT_EQ(fov.at("lidar"), full.at("lidar"));
  const Image& a = std::get<Image>(fov.at("bev"));
  const Image& b = std::get<Image>(full.at("bev"));
  std::size_t diff = 0;
  for (std::size_t i = 0; i < a.pixels.size(); ++i)
    if (a.pixels[i] != b.pixels[i]) {
      ++diff;
      EXPECT_EQ(b.pixels[i], BevSpec{}.palette.other_vehicle);
    }
  EXPECT_GT(diff, 0u);
  EXPECT_NE(fov.at("state_vector"), full.at("state_vector"));
}

TEST(Codec, PngAndBase64RoundTrip) {
  Image img(37, 53);
  Rng rng(1);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.index(8));
  const auto png = encode_png(img);
  ASSERT_GT(png.size(), 8u);
  EXPECT_EQ(png[1], 'P');
  EXPECT_EQ(decode_png(png), img);
  EXPECT_EQ(base64_decode(base64_encode(png)), png);
  EXPECT_EQ(base64_encode({'h', 'i', '!'}), "aGkh");
  EXPECT_THROW(decode_png({1, 2, 3}), Error);
}
