// Scene synthesis, the point-budget sensor model, fusion pipelines, and the
// average-precision evaluator.
#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <set>
#include <vector>

#include "coopsim/errors.hpp"
#include "coopsim/evaluation.hpp"
#include "coopsim/scenario.hpp"

using namespace coopsim;

namespace {

ScenarioConfig single_object_config() {
  ScenarioConfig cfg;
  cfg.scenario = "custom";
  cfg.duration = 400.0;

  SceneObject car;
  car.object_id = 1;
  car.class_label = ClassLabel::Car;
  car.waypoints = {{{0, 0}, 5.0}, {{50, 0}, 0.0}};
  cfg.objects = {car};

  NodeModel node;
  node.node_id = 0;
  node.position = {0, -8};
  cfg.nodes = {node};
  return cfg;
}

FrameTruth frame_with(std::vector<FrameObject> objects, double anchor = 0.0) {
  FrameTruth f;
  f.anchor_time = anchor;
  f.objects = std::move(objects);
  return f;
}

FrameObject truth_object(ClassLabel cls, Vec2 pos, int id = 1) {
  FrameObject o;
  o.object_id = id;
  o.class_label = cls;
  o.position = pos;
  o.size = class_footprint(cls);
  o.base_points = class_base_points(cls);
  return o;
}

Detection pred(ClassLabel cls, Vec2 pos, double conf, double anchor = 0.0) {
  Detection d;
  d.position = pos;
  d.size = class_footprint(cls);
  d.class_label = cls;
  d.confidence = conf;
  d.timestamp = anchor;
  return d;
}

}  // namespace

TEST_CASE("class tables carry the expected constants") {
  CHECK(class_base_points(ClassLabel::Car) == 390.0);
  CHECK(class_base_points(ClassLabel::Truck) == 635.0);
  CHECK(class_base_points(ClassLabel::Bus) == 1880.0);
  CHECK(class_base_points(ClassLabel::Person) == 21.0);
  CHECK(class_base_points(ClassLabel::Bicycle) == 67.0);
  CHECK(class_footprint(ClassLabel::Person).width == doctest::Approx(0.6));
}

TEST_CASE("visible points fall off with the inverse square of range") {
  CHECK(visible_points(390, 20, 10) == doctest::Approx(97.5));
  CHECK(visible_points(390, 10, 10) == doctest::Approx(390.0));
  CHECK(visible_points(390, 5, 10) == doctest::Approx(390.0));  // no boost inside ref range
  // The person detectability horizon sits just short of 11.84 m.
  CHECK(visible_points(21, 11.83, 10) >= 15.0);
  CHECK(visible_points(21, 11.84, 10) < 15.0);
}

TEST_CASE("objects follow piecewise constant-velocity paths") {
  SceneObject obj;
  obj.waypoints = {{{0, 0}, 5.0}, {{10, 0}, 5.0}, {{10, 20}, 0.0}};

  const ObjectState start = object_state_at(obj, 0.0);
  CHECK(start.position.x == doctest::Approx(0.0));
  CHECK(start.velocity.x == doctest::Approx(5.0));

  const ObjectState mid = object_state_at(obj, 1000.0);
  CHECK(mid.position.x == doctest::Approx(5.0));
  CHECK(mid.yaw == doctest::Approx(0.0));

  // Second leg turns +y at the same speed.
  const ObjectState leg2 = object_state_at(obj, 3000.0);
  CHECK(leg2.position.x == doctest::Approx(10.0));
  CHECK(leg2.position.y == doctest::Approx(5.0));
  CHECK(leg2.yaw == doctest::Approx(kPi / 2));

  // Zero-speed waypoint parks the object for good.
  const ObjectState parked = object_state_at(obj, 60000.0);
  CHECK(parked.position.x == doctest::Approx(10.0));
  CHECK(parked.position.y == doctest::Approx(20.0));
  CHECK(parked.velocity.norm() == doctest::Approx(0.0));

  SceneObject empty;
  CHECK_THROWS_AS(object_state_at(empty, 0.0), ConfigError);
}

TEST_CASE("scene sampling is deterministic and advances kinematics") {
  ScenarioConfig cfg = single_object_config();
  const auto frames = generate_scene(cfg, 7);
  REQUIRE(frames.size() == 5);  // anchors 0..400
  for (std::size_t i = 0; i < frames.size(); ++i) {
    REQUIRE(frames[i].objects.size() == 1);
    CHECK(frames[i].objects[0].position.x ==
          doctest::Approx(0.5 * static_cast<double>(i)));  // 5 m/s over 100 ms
  }
  const auto again = generate_scene(cfg, 7);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    CHECK(frames[i].objects[0].position.x == again[i].objects[0].position.x);
  }
}

TEST_CASE("named scenarios populate themselves; custom configs must be complete") {
  ScenarioConfig cfg;
  cfg.scenario = "roundabout";
  cfg.duration = 500.0;
  const Scenario sc = build_scenario(cfg, 3);
  CHECK(sc.config.nodes.size() == 8);
  CHECK(sc.config.objects.size() >= 3);
  CHECK_FALSE(sc.config.map.empty());
  CHECK(sc.frames.size() == 6);

  // Everything in a canned scene stays on the drivable map.
  for (const FrameTruth& f : sc.frames) {
    for (const FrameObject& o : f.objects) {
      CHECK(in_drivable_area(o.position, sc.config.map));
    }
  }

  ScenarioConfig bad;
  bad.scenario = "custom";
  CHECK_THROWS_AS(build_scenario(bad, 1), ConfigError);

  ScenarioConfig unknown;
  unknown.scenario = "carousel";
  CHECK_THROWS_AS(build_scenario(unknown, 1), ConfigError);
}

TEST_CASE("noiseless observation reproduces ground truth in range") {
  ScenarioConfig cfg = single_object_config();
  const Scenario sc = build_scenario(cfg, 1);
  Rng rng(9);
  const auto dets = observe(sc.frames[0], sc.config.nodes[0], sc.config.observation,
                            sc.config.map, rng);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].position.x == sc.frames[0].objects[0].position.x);
  CHECK(dets[0].position.y == sc.frames[0].objects[0].position.y);
  CHECK(dets[0].confidence == doctest::Approx(1.0));  // 390 points at 8 m
  CHECK(dets[0].node_id == 0);
  CHECK(dets[0].timestamp == 0.0);
  REQUIRE(dets[0].velocity.has_value());
  CHECK(dets[0].velocity->x == doctest::Approx(5.0));
}

TEST_CASE("point budget gates detectability by class and range") {
  NodeModel node;
  node.node_id = 0;
  node.position = {0, 0};
  ObservationParams params;
  DrivableMap map;
  Rng rng(10);

  // A bus at 10 m is far above threshold; a person at 40 m is far below.
  const FrameTruth f =
      frame_with({truth_object(ClassLabel::Bus, {10, 0}, 1),
                  truth_object(ClassLabel::Person, {0, 40}, 2)});
  const auto dets = observe(f, node, params, map, rng);
  REQUIRE(dets.size() == 1);
  CHECK(dets[0].class_label == ClassLabel::Bus);

  // Confidence scales as points / (2 * threshold): 18 points -> 0.6.
  FrameObject tuned = truth_object(ClassLabel::Person, {0, 0}, 3);
  tuned.base_points = 18.0;
  const auto d2 = observe(frame_with({tuned}), node, params, map, rng);
  REQUIRE(d2.size() == 1);
  CHECK(d2[0].confidence == doctest::Approx(0.6));
}

TEST_CASE("field of view and range cull observations") {
  NodeModel node;
  node.node_id = 0;
  node.position = {0, 0};
  node.fov_center = 0.0;       // facing +x
  node.fov_width = kPi / 2.0;  // +/- 45 degrees
  node.max_range = 30.0;
  ObservationParams params;
  DrivableMap map;
  Rng rng(11);

  auto sees = [&](Vec2 pos) {
    const FrameTruth f = frame_with({truth_object(ClassLabel::Bus, pos, 1)});
    return !observe(f, node, params, map, rng).empty();
  };
  CHECK(sees({10, 0}));
  CHECK_FALSE(sees({-10, 0}));   // behind
  CHECK_FALSE(sees({0, 10}));    // outside the 45-degree half angle
  CHECK(sees({10, 9.9}));        // just inside
  CHECK_FALSE(sees({29, 29}));   // in FOV but past max range
}

TEST_CASE("miss rate removes otherwise visible objects") {
  NodeModel node;
  node.node_id = 0;
  node.position = {0, 0};
  node.miss_rate_base = 1.0;
  ObservationParams params;
  DrivableMap map;
  Rng rng(12);
  const FrameTruth f = frame_with({truth_object(ClassLabel::Bus, {10, 0}, 1)});
  CHECK(observe(f, node, params, map, rng).empty());
}

TEST_CASE("false boxes respect the on/off-map quota") {
  NodeModel node;
  node.node_id = 0;
  node.position = {0, 0};
  node.fp_rate = 3.0;
  ObservationParams params;
  params.fp_region = {{-50, -50}, {50, 50}};
  DrivableMap map;
  map.polygons = {{{-20, -20}, {20, -20}, {20, 20}, {-20, 20}}};

  const FrameTruth empty_frame = frame_with({});

  node.fp_outside_map_fraction = 1.0;
  Rng rng(13);
  int total = 0;
  for (int i = 0; i < 200; ++i) {
    for (const Detection& d : observe(empty_frame, node, params, map, rng)) {
      CHECK_FALSE(in_drivable_area(d.position, map));
      CHECK(d.confidence >= 0.1);
      CHECK(d.confidence <= 0.9);
      CHECK_FALSE(d.velocity.has_value());
      ++total;
    }
  }
  CHECK(total > 300);  // Poisson(3) over 200 frames

  node.fp_outside_map_fraction = 0.0;
  Rng rng2(14);
  for (int i = 0; i < 200; ++i) {
    for (const Detection& d : observe(empty_frame, node, params, map, rng2)) {
      CHECK(in_drivable_area(d.position, map));
    }
  }
}

TEST_CASE("early fusion pools sub-threshold evidence") {
  // 8 points at node A plus 9 at node B beats the 15-point threshold even
  // though neither node alone does.
  ObservationParams params;
  FrameObject person = truth_object(ClassLabel::Person, {0, 0}, 1);

  const double r_a = 10.0 * std::sqrt(21.0 / 8.0);
  const double r_b = 10.0 * std::sqrt(21.0 / 9.0);
  NodeModel a;
  a.node_id = 0;
  a.position = {r_a, 0};
  NodeModel b;
  b.node_id = 1;
  b.position = {0, r_b};

  const FrameTruth f = frame_with({person});
  DrivableMap map;

  Rng rng(15);
  const std::vector<NodeModel> nodes{a, b};
  const auto ef = early_fusion_detect(f, nodes, params, rng);
  REQUIRE(ef.size() == 1);
  CHECK(ef[0].node_id == -1);
  CHECK(ef[0].confidence == doctest::Approx(17.0 / 30.0));

  Rng ra(16), rb(17);
  CHECK(observe(f, a, params, map, ra).empty());
  CHECK(observe(f, b, params, map, rb).empty());

  // Late fusion sees nothing either: nothing to pool after per-node misses.
  const auto lf = late_fusion_detect(f, nodes, params, map, 0.3, 1, 0);
  CHECK(lf.empty());
}

TEST_CASE("early fusion with one node matches that node's detections") {
  ScenarioConfig cfg = single_object_config();
  const Scenario sc = build_scenario(cfg, 1);
  ObservationParams params = sc.config.observation;

  Rng r1(20), r2(20);
  const auto ef = early_fusion_detect(sc.frames[0], sc.config.nodes, params, r1);
  const auto single = observe(sc.frames[0], sc.config.nodes[0], params, sc.config.map, r2);
  REQUIRE(ef.size() == single.size());
  CHECK(ef[0].position.x == single[0].position.x);
  CHECK(ef[0].confidence == single[0].confidence);

  const std::vector<NodeModel> none;
  Rng r3(21);
  CHECK(early_fusion_detect(sc.frames[0], none, params, r3).empty());
}

TEST_CASE("late fusion dedupes repeated sightings through suppression") {
  ObservationParams params;
  DrivableMap map;
  FrameObject bus = truth_object(ClassLabel::Bus, {0, 0}, 1);
  const FrameTruth f = frame_with({bus});

  std::vector<NodeModel> nodes;
  for (int i = 0; i < 3; ++i) {
    NodeModel n;
    n.node_id = i;
    n.position = {5.0 * (i + 1), 0};
    nodes.push_back(n);
  }

  std::size_t shipped = 0;
  const auto kept = late_fusion_detect(f, nodes, params, map, 0.3, 1, 0, &shipped);
  CHECK(shipped == 3);
  REQUIRE(kept.size() == 1);

  // Disjoint objects seen by disjoint nodes all survive.
  FrameObject far_bus = truth_object(ClassLabel::Bus, {100, 0}, 2);
  NodeModel remote;
  remote.node_id = 3;
  remote.position = {100, 5};
  std::vector<NodeModel> split{nodes[0], remote};
  const FrameTruth f2 = frame_with({bus, far_bus});
  const auto kept2 = late_fusion_detect(f2, split, params, map, 0.3, 1, 0);
  CHECK(kept2.size() == 2);
}

TEST_CASE("map filter keeps only in-area detections") {
  DrivableMap map;
  map.polygons = {{{-10, -10}, {10, -10}, {10, 10}, {-10, 10}}};
  std::vector<Detection> dets{pred(ClassLabel::Car, {0, 0}, 0.9),
                              pred(ClassLabel::Car, {50, 0}, 0.8)};
  const auto kept = apply_map_filter(dets, map);
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].position.x == doctest::Approx(0.0));

  const DrivableMap no_map;
  CHECK(apply_map_filter(dets, no_map).size() == 2);
}

TEST_CASE("occlusion-split scenes are invisible per node, visible pooled") {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ScenarioConfig cfg;
    cfg.scenario = "occlusion_split";
    cfg.duration = 200.0;
    const Scenario sc = build_scenario(cfg, seed);
    const ObservationParams& params = sc.config.observation;
    REQUIRE(sc.config.nodes.size() == 2);

    const FrameObject* person = nullptr;
    for (const FrameObject& o : sc.frames[0].objects) {
      if (o.class_label == ClassLabel::Person) person = &o;
    }
    REQUIRE(person != nullptr);

    double pooled = 0.0;
    for (const NodeModel& n : sc.config.nodes) {
      const double range = (person->position - n.position).norm();
      const double pts = visible_points(person->base_points, range, params.reference_range);
      CHECK(pts < params.detect_threshold);  // each node alone is blind
      pooled += pts;
    }
    CHECK(pooled >= params.detect_threshold * 1.05);
  }
}

TEST_CASE("average precision hand traces") {
  const std::vector<FrameTruth> truths{frame_with({truth_object(ClassLabel::Car, {0, 0})})};

  SUBCASE("perfect detector") {
    std::vector<std::vector<Detection>> preds{{pred(ClassLabel::Car, {0, 0}, 0.9)}};
    const EvalReport r = evaluate_map(preds, truths, 0.5);
    REQUIRE(r.per_class.size() == 1);
    CHECK(r.per_class[0].ap == doctest::Approx(1.0));
    CHECK(r.mean_ap == doctest::Approx(1.0));
    CHECK(r.per_class[0].num_gt == 1);
    CHECK(r.per_class[0].num_pred == 1);
  }

  SUBCASE("a higher-ranked false positive halves the AP") {
    std::vector<std::vector<Detection>> preds{
        {pred(ClassLabel::Car, {30, 30}, 0.9), pred(ClassLabel::Car, {0, 0}, 0.5)}};
    const EvalReport r = evaluate_map(preds, truths, 0.5);
    CHECK(r.mean_ap == doctest::Approx(0.5));
  }

  SUBCASE("a lower-ranked false positive costs nothing") {
    std::vector<std::vector<Detection>> preds{
        {pred(ClassLabel::Car, {0, 0}, 0.9), pred(ClassLabel::Car, {30, 30}, 0.5)}};
    const EvalReport r = evaluate_map(preds, truths, 0.5);
    CHECK(r.mean_ap == doctest::Approx(1.0));
  }

  SUBCASE("double-claiming one truth makes the second prediction false") {
    std::vector<std::vector<Detection>> preds{
        {pred(ClassLabel::Car, {0, 0}, 0.9), pred(ClassLabel::Car, {0.01, 0}, 0.8)}};
    const EvalReport r = evaluate_map(preds, truths, 0.5);
    CHECK(r.per_class[0].num_pred == 2);
    CHECK(r.mean_ap == doctest::Approx(1.0));  // the extra claim sits below full recall
  }

  SUBCASE("missed truth caps the recall") {
    const std::vector<FrameTruth> two{frame_with(
        {truth_object(ClassLabel::Car, {0, 0}, 1), truth_object(ClassLabel::Car, {20, 0}, 2)})};
    std::vector<std::vector<Detection>> preds{{pred(ClassLabel::Car, {0, 0}, 0.9)}};
    const EvalReport r = evaluate_map(preds, two, 0.5);
    CHECK(r.mean_ap == doctest::Approx(0.5));
  }
}

TEST_CASE("mean ap averages only classes present in the truth") {
  const std::vector<FrameTruth> truths{frame_with({truth_object(ClassLabel::Car, {0, 0})})};
  std::vector<std::vector<Detection>> preds{
      {pred(ClassLabel::Car, {0, 0}, 0.9), pred(ClassLabel::Person, {5, 5}, 0.8)}};
  const EvalReport r = evaluate_map(preds, truths, 0.5);
  REQUIRE(r.per_class.size() == 2);  // person shows up as an FP-only row
  CHECK(r.mean_ap == doctest::Approx(1.0));
  for (const ClassAp& row : r.per_class) {
    if (row.class_label == ClassLabel::Person) {
      CHECK(row.ap == doctest::Approx(0.0));
      CHECK(row.num_gt == 0);
    }
  }
}

TEST_CASE("evaluator rejects malformed inputs") {
  const std::vector<FrameTruth> truths{frame_with({truth_object(ClassLabel::Car, {0, 0})})};
  std::vector<std::vector<Detection>> preds{{pred(ClassLabel::Car, {0, 0}, 0.9)}};

  std::vector<std::vector<Detection>> wrong_count;
  CHECK_THROWS_AS(evaluate_map(wrong_count, truths, 0.5), InputError);

  std::vector<std::vector<Detection>> stale{{pred(ClassLabel::Car, {0, 0}, 0.9, 999.0)}};
  CHECK_THROWS_AS(evaluate_map(stale, truths, 0.5), InputError);

  CHECK_THROWS_AS(evaluate_map(preds, truths, 0.0), InputError);
  CHECK_THROWS_AS(evaluate_map(preds, truths, 1.5), InputError);
}

TEST_CASE("noiseless pipelines score a perfect map") {
  for (const char* name : {"roundabout", "crossing"}) {
    ScenarioConfig cfg;
    cfg.scenario = name;
    cfg.duration = 1000.0;
    const Scenario sc = build_scenario(cfg, 5);

    for (FusionMode mode : {FusionMode::Early, FusionMode::Late}) {
      for (bool hd : {false, true}) {
        const PipelineResult out = run_fusion_pipeline(sc, mode, hd);
        const EvalReport r = evaluate_map(out.per_frame, sc.frames, 0.5);
        INFO(name, " mode ", static_cast<int>(mode), " hd ", hd);
        CHECK(r.mean_ap == doctest::Approx(1.0));
      }
    }
  }
}

TEST_CASE("early fusion beats late fusion under noise, and the map prior never hurts") {
  ScenarioConfig cfg;
  cfg.scenario = "roundabout";
  cfg.duration = 2000.0;
  cfg.node_defaults.pos_noise_sigma = 0.2;
  cfg.node_defaults.miss_rate_base = 0.05;
  cfg.node_defaults.fp_rate = 0.3;
  cfg.node_defaults.fp_outside_map_fraction = 0.5;

  double sum_ef = 0.0, sum_lf = 0.0, sum_lf_hd = 0.0;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const Scenario sc = build_scenario(cfg, seed);
    const auto ef = run_fusion_pipeline(sc, FusionMode::Early, false);
    const auto lf = run_fusion_pipeline(sc, FusionMode::Late, false);
    const auto lf_hd = run_fusion_pipeline(sc, FusionMode::Late, true);
    sum_ef += evaluate_map(ef.per_frame, sc.frames, 0.5).mean_ap;
    sum_lf += evaluate_map(lf.per_frame, sc.frames, 0.5).mean_ap;
    sum_lf_hd += evaluate_map(lf_hd.per_frame, sc.frames, 0.5).mean_ap;

    // Early fusion ships points, late fusion ships boxes.
    CHECK(ef.mean_payload_units > lf.mean_payload_units);
  }
  CHECK(sum_ef > sum_lf);
  CHECK(sum_lf_hd >= sum_lf);
}
