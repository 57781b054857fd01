#include "coopsim/io.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "coopsim/csv.hpp"
#include "coopsim/errors.hpp"

namespace coopsim {

using nlohmann::json;

namespace {

json parse_file(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open for reading: " + path);
  try {
    json j;
    file >> j;
    return j;
  } catch (const json::exception& e) {
    throw ConfigError("malformed JSON in " + path + ": " + e.what());
  }
}

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("bad value for '") + key + "': " + e.what());
  }
}

Vec2 vec2_from(const json& j, const char* what) {
  if (!j.is_array() || j.size() != 2) {
    throw ConfigError(std::string(what) + " must be a [x, y] pair");
  }
  return {j.at(0).get<double>(), j.at(1).get<double>()};
}

NodeProfile node_profile_from(const json& j) {
  NodeProfile p;
  p.normal_mu = get_or(j, "normal_mu", p.normal_mu);
  p.normal_sigma = get_or(j, "normal_sigma", p.normal_sigma);
  p.abnormal_mu = get_or(j, "abnormal_mu", p.abnormal_mu);
  p.abnormal_sigma = get_or(j, "abnormal_sigma", p.abnormal_sigma);
  p.abnormal_prob = get_or(j, "abnormal_prob", p.abnormal_prob);
  p.loss_prob = get_or(j, "loss_prob", p.loss_prob);
  if (j.contains("phase_offset") && !j.at("phase_offset").is_null()) {
    p.phase_offset = j.at("phase_offset").get<double>();
  }
  return p;
}

Ring ring_from(const json& j) {
  if (!j.contains("vertices")) throw ConfigError("map ring is missing 'vertices'");
  Ring ring;
  for (const json& v : j.at("vertices")) {
    ring.push_back(vec2_from(v, "map vertex"));
  }
  return ring;
}

DrivableMap map_from(const json& j) {
  DrivableMap map;
  for (const json& p : get_or(j, "polygons", json::array())) map.polygons.push_back(ring_from(p));
  for (const json& h : get_or(j, "holes", json::array())) map.holes.push_back(ring_from(h));
  map.validate();
  return map;
}

NodeModel node_model_from(const json& j, const NodeModel& defaults) {
  NodeModel n = defaults;
  n.node_id = get_or(j, "node_id", n.node_id);
  if (j.contains("position")) {
    n.position = vec2_from(j.at("position"), "node position");
  } else {
    n.position = {get_or(j, "x", n.position.x), get_or(j, "y", n.position.y)};
  }
  n.fov_center = get_or(j, "fov_center", n.fov_center);
  n.fov_width = get_or(j, "fov_width", n.fov_width);
  n.max_range = get_or(j, "max_range", n.max_range);
  n.pos_noise_sigma = get_or(j, "pos_noise_sigma", n.pos_noise_sigma);
  n.miss_rate_base = get_or(j, "miss_rate_base", n.miss_rate_base);
  n.fp_rate = get_or(j, "fp_rate", n.fp_rate);
  n.fp_outside_map_fraction = get_or(j, "fp_outside_map_fraction", n.fp_outside_map_fraction);
  return n;
}

std::string detection_to_json_line(const Detection& d) {
  json j;
  j["position"] = {d.position.x, d.position.y};
  j["yaw"] = d.yaw;
  j["size"] = {{"length", d.size.length}, {"width", d.size.width}, {"height", d.size.height}};
  if (d.velocity) {
    j["velocity"] = {d.velocity->x, d.velocity->y};
  } else {
    j["velocity"] = nullptr;
  }
  j["class_label"] = to_string(d.class_label);
  j["confidence"] = d.confidence;
  j["node_id"] = d.node_id;
  j["timestamp"] = d.timestamp;
  return j.dump();
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.position = vec2_from(j.at("position"), "detection position");
  d.yaw = j.at("yaw").get<double>();
  const json& size = j.at("size");
  d.size = {size.at("length").get<double>(), size.at("width").get<double>(),
            size.at("height").get<double>()};
  if (j.contains("velocity") && !j.at("velocity").is_null()) {
    d.velocity = vec2_from(j.at("velocity"), "detection velocity");
  }
  d.class_label = class_label_from_string(j.at("class_label").get<std::string>());
  d.confidence = j.at("confidence").get<double>();
  d.node_id = j.at("node_id").get<int>();
  d.timestamp = j.at("timestamp").get<double>();
  return d;
}

TrackStatus track_status_from_string(const std::string& name) {
  if (name == "Tentative") return TrackStatus::Tentative;
  if (name == "Confirmed") return TrackStatus::Confirmed;
  if (name == "Dead") return TrackStatus::Dead;
  throw InputError("unknown track status: " + name);
}

void write_lines(const std::string& path, const std::vector<std::string>& lines) {
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open for writing: " + path);
  for (const std::string& line : lines) {
    file << line << '\n';
  }
  if (!file) throw IoError("write failed: " + path);
}

std::vector<json> read_json_lines(const std::string& path) {
  std::ifstream file(path);
  if (!file) throw IoError("cannot open for reading: " + path);
  std::vector<json> out;
  std::string line;
  while (std::getline(file, line)) {
    if (line.empty()) continue;
    try {
      out.push_back(json::parse(line));
    } catch (const json::exception& e) {
      throw InputError("malformed record in " + path + ": " + e.what());
    }
  }
  return out;
}

}  // namespace

SimConfig load_sim_config(const std::string& path) {
  const json j = parse_file(path);
  SimConfig cfg;
  cfg.num_nodes = get_or(j, "num_nodes", cfg.num_nodes);
  cfg.anchor_interval = get_or(j, "anchor_interval", cfg.anchor_interval);
  cfg.duration = get_or(j, "duration", cfg.duration);
  if (j.contains("trigger_mode")) {
    cfg.trigger_mode = trigger_mode_from_string(j.at("trigger_mode").get<std::string>());
  }
  cfg.trigger_jitter_sigma = get_or(j, "trigger_jitter_sigma", cfg.trigger_jitter_sigma);
  cfg.seed = get_or(j, "seed", cfg.seed);
  if (j.contains("node_profiles")) {
    for (const json& p : j.at("node_profiles")) {
      cfg.node_profiles.push_back(node_profile_from(p));
    }
  }
  cfg.validate();
  return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
  const json j = parse_file(path);
  ScenarioConfig cfg;
  cfg.scenario = get_or(j, "scenario", cfg.scenario);
  cfg.duration = get_or(j, "duration", cfg.duration);
  cfg.anchor_interval = get_or(j, "anchor_interval", cfg.anchor_interval);
  cfg.nms_iou = get_or(j, "nms_iou", cfg.nms_iou);
  cfg.seed = get_or(j, "seed", cfg.seed);
  if (j.contains("observation")) {
    const json& o = j.at("observation");
    cfg.observation.detect_threshold =
        get_or(o, "detect_threshold", cfg.observation.detect_threshold);
    cfg.observation.reference_range =
        get_or(o, "reference_range", cfg.observation.reference_range);
    if (o.contains("fp_region")) {
      const json& r = o.at("fp_region");
      cfg.observation.fp_region = {{r.at("x_min").get<double>(), r.at("y_min").get<double>()},
                                   {r.at("x_max").get<double>(), r.at("y_max").get<double>()}};
    }
  }
  if (j.contains("node_defaults")) {
    cfg.node_defaults = node_model_from(j.at("node_defaults"), NodeModel{});
  }
  if (j.contains("nodes")) {
    for (const json& n : j.at("nodes")) {
      cfg.nodes.push_back(node_model_from(n, cfg.node_defaults));
    }
  }
  if (j.contains("objects")) {
    for (const json& o : j.at("objects")) {
      SceneObject obj;
      obj.object_id = get_or(o, "object_id", static_cast<int>(cfg.objects.size()) + 1);
      obj.class_label = class_label_from_string(o.at("class_label").get<std::string>());
      obj.base_points = get_or(o, "base_points", 0.0);
      if (o.contains("footprint")) {
        const json& f = o.at("footprint");
        obj.footprint = {f.at("length").get<double>(), f.at("width").get<double>(),
                         get_or(f, "height", 0.0)};
      }
      if (!o.contains("waypoints")) throw ConfigError("scene object is missing 'waypoints'");
      for (const json& w : o.at("waypoints")) {
        Waypoint wp;
        wp.position = {w.at("x").get<double>(), w.at("y").get<double>()};
        wp.speed = get_or(w, "speed", 0.0);
        obj.waypoints.push_back(wp);
      }
      cfg.objects.push_back(std::move(obj));
    }
  }
  if (j.contains("map")) cfg.map = map_from(j.at("map"));
  cfg.validate();
  return cfg;
}

DrivableMap load_drivable_map(const std::string& path) { return map_from(parse_file(path)); }

void write_event_log_csv(const EventLog& log, const std::string& path) {
  CsvTable table({"anchor_ms", "node_id", "acquisition_ms", "arrival_ms"});
  for (const SensorMessage& m : log.messages) {
    table.add_row({csv_number(m.anchor_time), csv_int(m.node_id),
                   csv_number(m.acquisition_time), csv_number(m.arrival_time)});
  }
  table.write(path);
}

void write_estimates_csv(std::span<const LatencyEstimate> estimates, const std::string& path) {
  CsvTable table({"node_id", "mu_ms", "sigma_ms"});
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    table.add_row({csv_int(static_cast<long long>(i)), csv_number(estimates[i].mu),
                   csv_number(estimates[i].sigma)});
  }
  table.write(path);
}

void write_batches_csv(std::span<const AnchorBatch> batches, const std::string& path) {
  CsvTable table({"anchor_ms", "trigger_ms", "deadline_ms", "full_match", "n_normal", "n_late"});
  for (const AnchorBatch& b : batches) {
    table.add_row({csv_number(b.anchor_time), csv_number(b.trigger_time),
                   csv_number(b.deadline), csv_int(b.full_match ? 1 : 0),
                   csv_int(static_cast<long long>(b.normal_messages.size())),
                   csv_int(static_cast<long long>(b.late_messages.size()))});
  }
  table.write(path);
}

void write_eval_csv(const EvalReport& report, const std::string& path) {
  CsvTable table({"class", "ap", "num_gt", "num_pred"});
  for (const ClassAp& row : report.per_class) {
    table.add_row({to_string(row.class_label), csv_number(row.ap),
                   csv_int(static_cast<long long>(row.num_gt)),
                   csv_int(static_cast<long long>(row.num_pred))});
  }
  table.write(path);
}

void write_tracks_csv(std::span<const TrackSnapshot> snapshots, const std::string& path) {
  CsvTable table({"anchor_ms", "track_id", "class", "x_m", "y_m", "yaw_rad", "vx_mps",
                  "vy_mps", "status"});
  for (const TrackSnapshot& s : snapshots) {
    const double yaw =
        (s.track.velocity.norm() > 1e-9) ? std::atan2(s.track.velocity.y, s.track.velocity.x)
                                         : 0.0;
    table.add_row({csv_number(s.anchor_time), csv_int(s.track.track_id),
                   to_string(s.track.class_label), csv_number(s.track.position.x),
                   csv_number(s.track.position.y), csv_number(yaw),
                   csv_number(s.track.velocity.x), csv_number(s.track.velocity.y),
                   to_string(s.track.status)});
  }
  table.write(path);
}

void write_detections_jsonl(std::span<const Detection> detections, const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(detections.size());
  for (const Detection& d : detections) lines.push_back(detection_to_json_line(d));
  write_lines(path, lines);
}

std::vector<Detection> read_detections_jsonl(const std::string& path) {
  std::vector<Detection> out;
  for (const json& j : read_json_lines(path)) {
    try {
      out.push_back(detection_from_json(j));
    } catch (const json::exception& e) {
      throw InputError("bad detection record in " + path + ": " + e.what());
    }
  }
  return out;
}

void write_tracks_jsonl(std::span<const Track> tracks, const std::string& path) {
  std::vector<std::string> lines;
  lines.reserve(tracks.size());
  for (const Track& t : tracks) {
    json j;
    j["track_id"] = t.track_id;
    j["state"] = {{"position", {t.position.x, t.position.y}},
                  {"velocity", {t.velocity.x, t.velocity.y}}};
    j["class_label"] = to_string(t.class_label);
    j["hits"] = t.hits;
    j["misses"] = t.misses;
    j["status"] = to_string(t.status);
    j["last_update"] = t.last_update;
    lines.push_back(j.dump());
  }
  write_lines(path, lines);
}

std::vector<Track> read_tracks_jsonl(const std::string& path) {
  std::vector<Track> out;
  for (const json& j : read_json_lines(path)) {
    try {
      Track t;
      t.track_id = j.at("track_id").get<int>();
      t.position = vec2_from(j.at("state").at("position"), "track position");
      t.velocity = vec2_from(j.at("state").at("velocity"), "track velocity");
      t.class_label = class_label_from_string(j.at("class_label").get<std::string>());
      t.hits = j.at("hits").get<int>();
      t.misses = j.at("misses").get<int>();
      t.status = track_status_from_string(j.at("status").get<std::string>());
      t.last_update = j.at("last_update").get<double>();
      out.push_back(t);
    } catch (const json::exception& e) {
      throw InputError("bad track record in " + path + ": " + e.what());
    }
  }
  return out;
}

}  // namespace coopsim
