#include "coopsim/fusion_tracking.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "coopsim/errors.hpp"

namespace coopsim {

std::string to_string(TrackStatus status) {
  switch (status) {
    case TrackStatus::Tentative: return "Tentative";
    case TrackStatus::Confirmed: return "Confirmed";
    case TrackStatus::Dead: return "Dead";
  }
  throw InputError("unknown track status value");
}

void TrackerParams::validate() const {
  if (gate <= 0.0) throw ConfigError("gate must be > 0");
  if (position_alpha < 0.0 || position_alpha > 1.0) {
    throw ConfigError("position_alpha must lie in [0, 1]");
  }
  if (confirm_threshold < 1) throw ConfigError("confirm_threshold must be >= 1");
  if (delete_threshold < 1) throw ConfigError("delete_threshold must be >= 1");
  if (late_penalty < 0.0 || late_penalty > 1.0) {
    throw ConfigError("late_penalty must lie in [0, 1]");
  }
}

Detection motion_correct(const Detection& det, double target_time_ms) {
  Detection out = det;
  if (det.velocity) {
    const double dt_s = (target_time_ms - det.timestamp) / 1000.0;
    out.position = det.position + *det.velocity * dt_s;
  }
  out.timestamp = target_time_ms;
  return out;
}

namespace {

struct MemberRef {
  int node_id;        // reported node id, used for tie-breaks and disjointness
  std::size_t list;   // index into per_node
  std::size_t index;  // index within that list
};

struct CandidatePair {
  double distance;
  std::size_t a;  // slots into the member table
  std::size_t b;
};

// Union-find over detections with per-cluster node sets so no cluster ever
// holds two detections from the same node.
class NodeDisjointClusters {
 public:
  explicit NodeDisjointClusters(std::span<const MemberRef> members) {
    parent_.resize(members.size());
    std::iota(parent_.begin(), parent_.end(), 0);
    nodes_.reserve(members.size());
    for (const MemberRef& m : members) nodes_.push_back({m.node_id});
  }

  std::size_t find(std::size_t i) {
    while (parent_[i] != i) {
      parent_[i] = parent_[parent_[i]];
      i = parent_[i];
    }
    return i;
  }

  bool merge(std::size_t i, std::size_t j) {
    std::size_t ri = find(i);
    std::size_t rj = find(j);
    if (ri == rj) return false;
    const auto& a = nodes_[ri];
    const auto& b = nodes_[rj];
    for (int n : a) {
      if (std::find(b.begin(), b.end(), n) != b.end()) return false;
    }
    if (nodes_[ri].size() < nodes_[rj].size()) std::swap(ri, rj);
    nodes_[ri].insert(nodes_[ri].end(), nodes_[rj].begin(), nodes_[rj].end());
    parent_[rj] = ri;
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
  std::vector<std::vector<int>> nodes_;
};

}  // namespace

std::vector<FusedObject> associate_and_fuse(std::span<const std::vector<Detection>> per_node,
                                            double gate) {
  if (gate <= 0.0) throw ConfigError("associate_and_fuse: gate must be > 0");

  std::vector<MemberRef> members;
  for (std::size_t l = 0; l < per_node.size(); ++l) {
    for (std::size_t i = 0; i < per_node[l].size(); ++i) {
      members.push_back({per_node[l][i].node_id, l, i});
    }
  }
  auto det_of = [&](const MemberRef& m) -> const Detection& {
    return per_node[m.list][m.index];
  };

  // Candidate pairs across different nodes, same class, within the gate.
  std::vector<CandidatePair> pairs;
  for (std::size_t i = 0; i < members.size(); ++i) {
    for (std::size_t j = i + 1; j < members.size(); ++j) {
      const Detection& da = det_of(members[i]);
      const Detection& db = det_of(members[j]);
      if (members[i].node_id == members[j].node_id) continue;
      if (da.class_label != db.class_label) continue;
      const double dist = (da.position - db.position).norm();
      if (dist <= gate) pairs.push_back({dist, i, j});
    }
  }
  // Sort keys use the reported node ids, so the clustering does not depend on
  // the order the per-node lists are passed in.
  auto key = [&](std::size_t s) {
    return std::pair<int, std::size_t>(members[s].node_id, members[s].index);
  };
  std::sort(pairs.begin(), pairs.end(), [&](const CandidatePair& x, const CandidatePair& y) {
    if (x.distance != y.distance) return x.distance < y.distance;
    auto xk = std::minmax(key(x.a), key(x.b));
    auto yk = std::minmax(key(y.a), key(y.b));
    return xk < yk;
  });

  NodeDisjointClusters clusters(members);
  // Greedy merge, nearest pair first; a merge is refused when the two
  // clusters already share a node.
  for (const CandidatePair& p : pairs) {
    clusters.merge(p.a, p.b);
  }

  // Gather clusters keyed by representative, ordered by their smallest member.
  std::vector<std::vector<std::size_t>> groups(members.size());
  for (std::size_t s = 0; s < members.size(); ++s) {
    groups[clusters.find(s)].push_back(s);
  }
  std::vector<std::vector<std::size_t>> ordered;
  for (auto& g : groups) {
    if (!g.empty()) ordered.push_back(std::move(g));
  }
  for (auto& g : ordered) {
    std::sort(g.begin(), g.end(),
              [&](std::size_t a, std::size_t b) { return key(a) < key(b); });
  }
  std::sort(ordered.begin(), ordered.end(),
            [&](const std::vector<std::size_t>& a, const std::vector<std::size_t>& b) {
              return key(a.front()) < key(b.front());
            });

  std::vector<FusedObject> fused;
  fused.reserve(ordered.size());
  for (const auto& group : ordered) {
    FusedObject obj;
    double wsum = 0.0;
    Vec2 pos{0, 0};
    Vec2 yaw_vec{0, 0};
    double length = 0.0, width = 0.0, height = 0.0;
    Vec2 vel{0, 0};
    double vel_wsum = 0.0;
    double miss_product = 1.0;
    for (std::size_t s : group) {
      const Detection& d = det_of(members[s]);
      const double w = d.confidence;
      wsum += w;
      pos = pos + d.position * w;
      yaw_vec = yaw_vec + Vec2{std::cos(d.yaw), std::sin(d.yaw)} * w;
      length += d.size.length * w;
      width += d.size.width * w;
      height += d.size.height * w;
      if (d.velocity) {
        vel = vel + *d.velocity * w;
        vel_wsum += w;
      }
      miss_product *= 1.0 - std::clamp(d.confidence, 0.0, 1.0);
      obj.contributing_nodes.push_back(d.node_id);
    }
    if (wsum <= 0.0) {
      // All-zero confidences: fall back to the unweighted mean.
      const double n = static_cast<double>(group.size());
      pos = {0, 0};
      yaw_vec = {0, 0};
      length = width = height = 0.0;
      for (std::size_t s : group) {
        const Detection& d = det_of(members[s]);
        pos = pos + d.position;
        yaw_vec = yaw_vec + Vec2{std::cos(d.yaw), std::sin(d.yaw)};
        length += d.size.length;
        width += d.size.width;
        height += d.size.height;
      }
      wsum = n;
    }
    obj.position = pos * (1.0 / wsum);
    obj.yaw = (yaw_vec.norm() > 0.0) ? std::atan2(yaw_vec.y, yaw_vec.x)
                                     : det_of(members[group.front()]).yaw;
    obj.size = {length / wsum, width / wsum, height / wsum};
    if (vel_wsum > 0.0) obj.velocity = vel * (1.0 / vel_wsum);
    obj.class_label = det_of(members[group.front()]).class_label;
    obj.fused_confidence = 1.0 - miss_product;
    obj.timestamp = det_of(members[group.front()]).timestamp;
    std::sort(obj.contributing_nodes.begin(), obj.contributing_nodes.end());
    obj.contributing_nodes.erase(
        std::unique(obj.contributing_nodes.begin(), obj.contributing_nodes.end()),
        obj.contributing_nodes.end());
    fused.push_back(std::move(obj));
  }
  return fused;
}

GlobalTracker::GlobalTracker(const TrackerParams& params) : params_(params) {
  params_.validate();
}

Vec2 GlobalTracker::predicted_position(const Track& t, double time_ms) const {
  return t.position + t.velocity * ((time_ms - t.last_update) / 1000.0);
}

std::vector<Track> GlobalTracker::confirmed() const {
  std::vector<Track> out;
  for (const Track& t : tracks_) {
    if (t.status == TrackStatus::Confirmed) out.push_back(t);
  }
  return out;
}

void GlobalTracker::step(std::span<const FusedObject> objects, double anchor_time) {
  if (last_anchor_ && anchor_time <= *last_anchor_) {
    throw SequenceError("tracker stepped with a non-increasing anchor time");
  }
  last_anchor_ = anchor_time;

  struct Assoc {
    double distance;
    std::size_t track;
    std::size_t object;
  };
  std::vector<Assoc> candidates;
  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    if (tracks_[t].status == TrackStatus::Dead) continue;
    const Vec2 pred = predicted_position(tracks_[t], anchor_time);
    for (std::size_t o = 0; o < objects.size(); ++o) {
      if (objects[o].class_label != tracks_[t].class_label) continue;
      const double dist = (objects[o].position - pred).norm();
      if (dist <= params_.gate) candidates.push_back({dist, t, o});
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Assoc& a, const Assoc& b) {
    if (a.distance != b.distance) return a.distance < b.distance;
    if (a.track != b.track) return a.track < b.track;
    return a.object < b.object;
  });

  std::vector<bool> track_used(tracks_.size(), false);
  std::vector<bool> object_used(objects.size(), false);
  for (const Assoc& c : candidates) {
    if (track_used[c.track] || object_used[c.object]) continue;
    track_used[c.track] = true;
    object_used[c.object] = true;

    Track& trk = tracks_[c.track];
    const FusedObject& obj = objects[c.object];
    const Vec2 pred = predicted_position(trk, anchor_time);
    const Vec2 updated = pred + (obj.position - pred) * params_.position_alpha;
    const double dt_s = (anchor_time - trk.last_update) / 1000.0;
    if (dt_s > 0.0) {
      trk.velocity = (updated - trk.position) * (1.0 / dt_s);
    }
    trk.position = updated;
    trk.last_update = anchor_time;
    trk.misses = 0;
    ++trk.hits;
    if (trk.status == TrackStatus::Tentative && trk.hits >= params_.confirm_threshold) {
      trk.status = TrackStatus::Confirmed;
    }
  }

  for (std::size_t t = 0; t < tracks_.size(); ++t) {
    if (tracks_[t].status == TrackStatus::Dead || track_used[t]) continue;
    Track& trk = tracks_[t];
    ++trk.misses;
    if (trk.misses >= params_.delete_threshold) trk.status = TrackStatus::Dead;
  }

  for (std::size_t o = 0; o < objects.size(); ++o) {
    if (object_used[o]) continue;
    Track trk;
    trk.track_id = next_id_++;
    trk.position = objects[o].position;
    trk.velocity = objects[o].velocity.value_or(Vec2{0.0, 0.0});
    trk.class_label = objects[o].class_label;
    trk.hits = 1;
    trk.misses = 0;
    trk.status = TrackStatus::Tentative;
    trk.last_update = anchor_time;
    tracks_.push_back(trk);
  }
}

void GlobalTracker::post_fuse_late(std::span<const Detection> late, double fusion_time) {
  for (const Detection& d : late) {
    const Detection corrected = motion_correct(d, fusion_time);
    const double penalized = std::clamp(corrected.confidence * params_.late_penalty, 0.0, 1.0);

    double best = std::numeric_limits<double>::infinity();
    Track* match = nullptr;
    for (Track& t : tracks_) {
      if (t.status == TrackStatus::Dead || t.class_label != corrected.class_label) continue;
      const double dist = (corrected.position - predicted_position(t, fusion_time)).norm();
      if (dist <= params_.gate && dist < best) {
        best = dist;
        match = &t;
      }
    }
    if (match == nullptr) continue;  // late data never spawns tracks

    // Nudge only: blend scaled by the penalized confidence, no hit credit.
    const Vec2 pred = predicted_position(*match, fusion_time);
    const double alpha = params_.position_alpha * penalized;
    const Vec2 updated = pred + (corrected.position - pred) * alpha;
    const double dt_s = (fusion_time - match->last_update) / 1000.0;
    if (dt_s > 1e-9) {
      match->velocity = (updated - match->position) * (1.0 / dt_s);
      match->last_update = fusion_time;
    }
    match->position = updated;
  }
}

}  // namespace coopsim
