#pragma once

#include <algorithm>
#include <map>
#include <utility>
#include <vector>

#include "uavmg/disjoint_set.hpp"
#include "uavmg/sfm/scene.hpp"

namespace uavmg {

using FeatureTable = std::vector<std::vector<Vec2>>;  // per image, pixel of each feature

struct FeatureMatch {
  std::size_t feature_a = 0;
  std::size_t feature_b = 0;
};

struct PairMatches {
  std::size_t image_a = 0;
  std::size_t image_b = 0;
  std::vector<FeatureMatch> matches;
};

// Chains pairwise correspondences into tracks with union-find over
// (image, feature) nodes. A component holding two features of one image is
// dropped, as are components with fewer than two observations. Track
// `point` fields are left unset.
inline std::vector<Track> build_tracks(const std::vector<PairMatches>& pairs,
                                       const FeatureTable& features) {
  std::map<std::pair<std::size_t, std::size_t>, std::size_t> node_of;
  std::vector<std::pair<std::size_t, std::size_t>> nodes;
  DisjointSet ds;
  auto node = [&](std::size_t image, std::size_t feature) {
    if (image >= features.size() || feature >= features[image].size()) {
      throw InvalidArgument("match references a missing feature");
    }
    auto [it, inserted] = node_of.try_emplace({image, feature}, nodes.size());
    if (inserted) {
      nodes.emplace_back(image, feature);
      ds.add();
    }
    return it->second;
  };
  for (const auto& pm : pairs) {
    for (const auto& m : pm.matches) ds.unite(node(pm.image_a, m.feature_a), node(pm.image_b, m.feature_b));
  }

  std::map<std::size_t, std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < nodes.size(); ++k) groups[ds.find(k)].push_back(k);

  std::vector<Track> tracks;
  for (auto& [root, members] : groups) {
    if (members.size() < 2) continue;
    std::sort(members.begin(), members.end(),
              [&](std::size_t a, std::size_t b) { return nodes[a] < nodes[b]; });
    bool conflict = false;
    for (std::size_t k = 1; k < members.size(); ++k) {
      conflict |= nodes[members[k]].first == nodes[members[k - 1]].first;
    }
    if (conflict) continue;
    Track t;
    for (std::size_t k : members) {
      const auto [img, feat] = nodes[k];
      t.elements.push_back({img, feat, features[img][feat]});
    }
    tracks.push_back(std::move(t));
  }
  // Deterministic order: by first (image, feature).
  std::sort(tracks.begin(), tracks.end(), [](const Track& a, const Track& b) {
    return std::tie(a.elements[0].camera, a.elements[0].feature) <
           std::tie(b.elements[0].camera, b.elements[0].feature);
  });
  return tracks;
}

}  // namespace uavmg
