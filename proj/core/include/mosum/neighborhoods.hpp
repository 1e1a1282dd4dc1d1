#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mosum/panel.hpp"

namespace mosum {

struct Neighborhood {
  int id = 0;
  std::vector<int> members;  // 0-based series indices, sorted, unique
  std::optional<std::vector<std::array<int, 2>>> bounds;  // inclusive per-dimension [lo, hi]
};

// A collection of series groups over a panel with p series. Group sizes are
// kept within a factor `max_size_ratio` of each other.
struct NeighborhoodSet {
  std::vector<Neighborhood> items;
  int p = 0;

  int size() const { return static_cast<int>(items.size()); }
  const Neighborhood& operator[](int s) const { return items[static_cast<std::size_t>(s)]; }
};

NeighborhoodSet make_neighborhood_set(std::vector<Neighborhood> items, int p,
                                      double max_size_ratio = 8.0);

// All contiguous index blocks {a, ..., a+w-1} with w in [min_size, max_size],
// anchors on a `stride` grid. Ids are assigned 1..S in enumeration order.
NeighborhoodSet enumerate_contiguous(int p, int min_size, int max_size, int stride = 1,
                                     double max_size_ratio = 8.0);

// All axis-aligned boxes on the layout lattice with side lengths in
// [side_min, side_max], side ratio at most shape_ratio, anchors on a `stride`
// grid inside the occupied bounding box. Boxes with identical member sets are
// emitted once.
NeighborhoodSet enumerate_rectangles(const SpatialLayout& layout, int side_min, int side_max,
                                     int stride = 1, double shape_ratio = 8.0,
                                     double max_size_ratio = 8.0);

// Pairwise member-overlap adjacency and its two-hop closure (s ~ s' when some
// group intersects both).
std::vector<std::vector<bool>> overlap_matrix(const NeighborhoodSet& nbhds);
std::vector<std::vector<bool>> twohop_matrix(const NeighborhoodSet& nbhds);

struct WindowRef {
  int time = 0;  // 1-based window center
  int nbhd = -1;  // index into NeighborhoodSet::items; -1 in the global case
};

// Windows whose 2*bn span [t-bn, t+bn-1] contains tau, restricted to valid
// centers [bn+1, n-bn]; in the grouped case, paired with every group that
// overlaps group s.
std::vector<int> influenced_times(int tau, int bn, int n);
std::vector<WindowRef> influenced_set(int tau, int s, int bn, int n, const NeighborhoodSet& nbhds);

// True when estimated break (tau2, s2) falls in the exclusion region of an
// accepted break (tau1, s1): their window ranges meet and the groups are
// two-hop connected.
bool windows_linked(int tau1, int s1, int tau2, int s2, int bn, int n,
                    const std::vector<std::vector<bool>>& twohop);

// True when no window is simultaneously attributable to two distinct breaks.
bool check_separation(const std::vector<int>& taus, int bn, int n);
bool check_separation(const std::vector<std::pair<int, int>>& breaks, int bn, int n,
                      const NeighborhoodSet& nbhds);

// File format: {"neighborhoods": [{"id": 1, "members": [...]}, ...]} or a bare
// array. Members are series-id strings or 1-based column numbers; a box form
// {"id": 2, "bounds": [[lo, hi], ...]} selects by layout coordinates. Ids must
// be strictly increasing.
NeighborhoodSet load_neighborhoods_json(const std::string& path,
                                        const std::vector<std::string>& series_ids,
                                        const std::optional<SpatialLayout>& layout,
                                        double max_size_ratio = 8.0);
void write_neighborhoods_json(const NeighborhoodSet& nbhds,
                              const std::vector<std::string>& series_ids,
                              const std::string& path);

}  // namespace mosum
