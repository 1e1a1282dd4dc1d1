#include "mosum/neighborhoods.hpp"

#include <algorithm>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <utility>

#include "json.hpp"
#include "mosum/errors.hpp"

namespace mosum {

namespace {

bool members_overlap(const std::vector<int>& a, const std::vector<int>& b) {
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] == b[j]) return true;
    if (a[i] < b[j])
      ++i;
    else
      ++j;
  }
  return false;
}

}  // namespace

NeighborhoodSet make_neighborhood_set(std::vector<Neighborhood> items, int p,
                                      double max_size_ratio) {
  require(p >= 1, errc::config, "neighborhood set: p must be positive");
  require(!items.empty(), errc::validation, "neighborhood set: no groups given");
  require(max_size_ratio >= 1.0, errc::config, "neighborhood set: size ratio cap must be >= 1");
  std::set<int> ids;
  std::size_t smin = items.front().members.size(), smax = 0;
  for (auto& nb : items) {
    require(!nb.members.empty(), errc::validation,
            "neighborhood set: group " + std::to_string(nb.id) + " is empty");
    std::sort(nb.members.begin(), nb.members.end());
    nb.members.erase(std::unique(nb.members.begin(), nb.members.end()), nb.members.end());
    require(nb.members.front() >= 0 && nb.members.back() < p, errc::validation,
            "neighborhood set: group " + std::to_string(nb.id) + " has out-of-range members");
    require(ids.insert(nb.id).second, errc::validation,
            "neighborhood set: duplicate group id " + std::to_string(nb.id));
    smin = std::min(smin, nb.members.size());
    smax = std::max(smax, nb.members.size());
  }
  require(static_cast<double>(smax) <= max_size_ratio * static_cast<double>(smin),
          errc::validation,
          "neighborhood set: size ratio " + std::to_string(smax) + "/" + std::to_string(smin) +
              " exceeds cap " + std::to_string(max_size_ratio));
  NeighborhoodSet set;
  set.items = std::move(items);
  set.p = p;
  return set;
}

NeighborhoodSet enumerate_contiguous(int p, int min_size, int max_size, int stride,
                                     double max_size_ratio) {
  require(p >= 1, errc::config, "enumerate_contiguous: p must be positive");
  require(min_size >= 1 && max_size >= min_size && max_size <= p, errc::config,
          "enumerate_contiguous: need 1 <= min_size <= max_size <= p");
  require(stride >= 1, errc::config, "enumerate_contiguous: stride must be positive");
  std::vector<Neighborhood> items;
  int id = 1;
  for (int w = min_size; w <= max_size; ++w) {
    for (int a = 0; a + w <= p; a += stride) {
      Neighborhood nb;
      nb.id = id++;
      nb.members.resize(static_cast<std::size_t>(w));
      for (int k = 0; k < w; ++k) nb.members[static_cast<std::size_t>(k)] = a + k;
      items.push_back(std::move(nb));
    }
  }
  return make_neighborhood_set(std::move(items), p, max_size_ratio);
}

NeighborhoodSet enumerate_rectangles(const SpatialLayout& layout, int side_min, int side_max,
                                     int stride, double shape_ratio, double max_size_ratio) {
  const int v = layout.dim;
  const int p = static_cast<int>(layout.coords.size());
  require(p >= 1, errc::config, "enumerate_rectangles: empty layout");
  require(side_min >= 1 && side_max >= side_min, errc::config,
          "enumerate_rectangles: need 1 <= side_min <= side_max");
  require(stride >= 1, errc::config, "enumerate_rectangles: stride must be positive");
  require(shape_ratio >= 1.0, errc::config, "enumerate_rectangles: shape ratio cap must be >= 1");

  std::vector<int> lo(static_cast<std::size_t>(v)), hi(static_cast<std::size_t>(v));
  for (int d = 0; d < v; ++d) {
    lo[static_cast<std::size_t>(d)] = hi[static_cast<std::size_t>(d)] = layout.coords[0][static_cast<std::size_t>(d)];
    for (const auto& c : layout.coords) {
      lo[static_cast<std::size_t>(d)] = std::min(lo[static_cast<std::size_t>(d)], c[static_cast<std::size_t>(d)]);
      hi[static_cast<std::size_t>(d)] = std::max(hi[static_cast<std::size_t>(d)], c[static_cast<std::size_t>(d)]);
    }
  }

  std::vector<Neighborhood> items;
  std::set<std::vector<int>> seen;
  std::vector<int> sides(static_cast<std::size_t>(v), side_min);
  std::vector<int> anchor(static_cast<std::size_t>(v));
  int id = 1;

  auto collect = [&] {
    int wmin = *std::min_element(sides.begin(), sides.end());
    int wmax = *std::max_element(sides.begin(), sides.end());
    if (static_cast<double>(wmax) > shape_ratio * static_cast<double>(wmin)) return;
    // enumerate anchors on the stride grid
    std::vector<int> a(static_cast<std::size_t>(v));
    std::function<void(int)> rec = [&](int d) {
      if (d == v) {
        Neighborhood nb;
        for (int s = 0; s < p; ++s) {
          bool in = true;
          for (int k = 0; k < v && in; ++k) {
            int c = layout.coords[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
            in = c >= a[static_cast<std::size_t>(k)] &&
                 c <= a[static_cast<std::size_t>(k)] + sides[static_cast<std::size_t>(k)] - 1;
          }
          if (in) nb.members.push_back(s);
        }
        if (nb.members.empty()) return;
        if (!seen.insert(nb.members).second) return;
        nb.id = id++;
        std::vector<std::array<int, 2>> bounds(static_cast<std::size_t>(v));
        for (int k = 0; k < v; ++k)
          bounds[static_cast<std::size_t>(k)] = {a[static_cast<std::size_t>(k)],
                                                 a[static_cast<std::size_t>(k)] +
                                                     sides[static_cast<std::size_t>(k)] - 1};
        nb.bounds = std::move(bounds);
        items.push_back(std::move(nb));
        return;
      }
      for (int start = lo[static_cast<std::size_t>(d)];
           start + sides[static_cast<std::size_t>(d)] - 1 <= hi[static_cast<std::size_t>(d)];
           start += stride) {
        a[static_cast<std::size_t>(d)] = start;
        rec(d + 1);
      }
    };
    rec(0);
  };

  std::function<void(int)> pick_sides = [&](int d) {
    if (d == v) {
      collect();
      return;
    }
    for (int w = side_min; w <= side_max; ++w) {
      sides[static_cast<std::size_t>(d)] = w;
      pick_sides(d + 1);
    }
  };
  pick_sides(0);

  require(!items.empty(), errc::validation, "enumerate_rectangles: no non-empty boxes found");
  return make_neighborhood_set(std::move(items), p, max_size_ratio);
}

std::vector<std::vector<bool>> overlap_matrix(const NeighborhoodSet& nbhds) {
  const int s_count = nbhds.size();
  std::vector<std::vector<bool>> adj(static_cast<std::size_t>(s_count),
                                     std::vector<bool>(static_cast<std::size_t>(s_count), false));
  for (int a = 0; a < s_count; ++a) {
    adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] = true;
    for (int b = a + 1; b < s_count; ++b) {
      bool o = members_overlap(nbhds[a].members, nbhds[b].members);
      adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = o;
      adj[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = o;
    }
  }
  return adj;
}

std::vector<std::vector<bool>> twohop_matrix(const NeighborhoodSet& nbhds) {
  auto adj = overlap_matrix(nbhds);
  const int s_count = nbhds.size();
  std::vector<std::vector<bool>> two(static_cast<std::size_t>(s_count),
                                     std::vector<bool>(static_cast<std::size_t>(s_count), false));
  for (int a = 0; a < s_count; ++a)
    for (int l = 0; l < s_count; ++l)
      if (adj[static_cast<std::size_t>(a)][static_cast<std::size_t>(l)])
        for (int b = 0; b < s_count; ++b)
          if (adj[static_cast<std::size_t>(l)][static_cast<std::size_t>(b)])
            two[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = true;
  return two;
}

std::vector<int> influenced_times(int tau, int bn, int n) {
  int lo = std::max(bn + 1, tau - bn + 1);
  int hi = std::min(n - bn, tau + bn);
  std::vector<int> out;
  for (int t = lo; t <= hi; ++t) out.push_back(t);
  return out;
}

std::vector<WindowRef> influenced_set(int tau, int s, int bn, int n,
                                      const NeighborhoodSet& nbhds) {
  auto adj = overlap_matrix(nbhds);
  std::vector<WindowRef> out;
  for (int t : influenced_times(tau, bn, n))
    for (int s2 = 0; s2 < nbhds.size(); ++s2)
      if (adj[static_cast<std::size_t>(s)][static_cast<std::size_t>(s2)])
        out.push_back(WindowRef{t, s2});
  return out;
}

bool windows_linked(int tau1, int s1, int tau2, int s2, int bn, int n,
                    const std::vector<std::vector<bool>>& twohop) {
  int lo = std::max({bn + 1, tau1 - bn + 1, tau2 - bn + 1});
  int hi = std::min({n - bn, tau1 + bn, tau2 + bn});
  if (lo > hi) return false;
  return twohop[static_cast<std::size_t>(s1)][static_cast<std::size_t>(s2)];
}

namespace {

// Window centers t whose local statistic can be attributed to break tau:
// the span [t-bn, t+bn-1] meets the influenced span [tau-bn+1, tau+bn].
std::pair<int, int> attribution_range(int tau, int bn, int n) {
  return {std::max(bn + 1, tau - 2 * bn + 2), std::min(n - bn, tau + 2 * bn)};
}

}  // namespace

bool check_separation(const std::vector<int>& taus, int bn, int n) {
  for (std::size_t a = 0; a < taus.size(); ++a)
    for (std::size_t b = a + 1; b < taus.size(); ++b) {
      auto [lo1, hi1] = attribution_range(taus[a], bn, n);
      auto [lo2, hi2] = attribution_range(taus[b], bn, n);
      if (std::max(lo1, lo2) <= std::min(hi1, hi2)) return false;
    }
  return true;
}

bool check_separation(const std::vector<std::pair<int, int>>& breaks, int bn, int n,
                      const NeighborhoodSet& nbhds) {
  auto two = twohop_matrix(nbhds);
  for (std::size_t a = 0; a < breaks.size(); ++a)
    for (std::size_t b = a + 1; b < breaks.size(); ++b) {
      auto [lo1, hi1] = attribution_range(breaks[a].first, bn, n);
      auto [lo2, hi2] = attribution_range(breaks[b].first, bn, n);
      if (std::max(lo1, lo2) > std::min(hi1, hi2)) continue;
      // a window group s can point at both breaks when it is two-hop
      // connected to each break's group
      for (int s = 0; s < nbhds.size(); ++s)
        if (two[static_cast<std::size_t>(breaks[a].second)][static_cast<std::size_t>(s)] &&
            two[static_cast<std::size_t>(breaks[b].second)][static_cast<std::size_t>(s)])
          return false;
    }
  return true;
}

namespace {

std::vector<int> parse_members(const nlohmann::json& arr,
                               const std::map<std::string, int>& id_index, int p, int group_id) {
  std::vector<int> members;
  for (const auto& m : arr) {
    if (m.is_string()) {
      auto it = id_index.find(m.get<std::string>());
      if (it == id_index.end())
        fail(errc::validation, "neighborhood file: group " + std::to_string(group_id) +
                                   " names unknown series '" + m.get<std::string>() + "'");
      members.push_back(it->second);
    } else if (m.is_number_integer()) {
      int col = m.get<int>();
      if (col < 1 || col > p)
        fail(errc::validation, "neighborhood file: group " + std::to_string(group_id) +
                                   " has column number " + std::to_string(col) +
                                   " outside 1.." + std::to_string(p));
      members.push_back(col - 1);
    } else {
      fail(errc::validation, "neighborhood file: members must be series ids or column numbers");
    }
  }
  return members;
}

}  // namespace

NeighborhoodSet load_neighborhoods_json(const std::string& path,
                                        const std::vector<std::string>& series_ids,
                                        const std::optional<SpatialLayout>& layout,
                                        double max_size_ratio) {
  std::ifstream in(path);
  if (!in) fail(errc::io, "cannot open neighborhood file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    fail(errc::validation, std::string("neighborhood file parse error: ") + e.what());
  }
  const nlohmann::json* arr = nullptr;
  if (j.is_array())
    arr = &j;
  else if (j.is_object() && j.contains("neighborhoods") && j["neighborhoods"].is_array())
    arr = &j["neighborhoods"];
  else
    fail(errc::validation, "neighborhood file: expected an array or {\"neighborhoods\": [...]}");

  std::map<std::string, int> id_index;
  for (std::size_t s = 0; s < series_ids.size(); ++s)
    id_index[series_ids[s]] = static_cast<int>(s);
  const int p = static_cast<int>(series_ids.size());

  std::vector<Neighborhood> items;
  int last_id = 0;
  bool first = true;
  for (const auto& e : *arr) {
    if (!e.is_object() || !e.contains("id") || !e["id"].is_number_integer())
      fail(errc::validation, "neighborhood file: every group needs an integer id");
    Neighborhood nb;
    nb.id = e["id"].get<int>();
    if (!first && nb.id <= last_id)
      fail(errc::validation, "neighborhood file: ids must be strictly increasing (saw " +
                                 std::to_string(nb.id) + " after " + std::to_string(last_id) + ")");
    first = false;
    last_id = nb.id;
    if (e.contains("members")) {
      if (!e["members"].is_array() || e["members"].empty())
        fail(errc::validation, "neighborhood file: group " + std::to_string(nb.id) +
                                   " members must be a non-empty array");
      nb.members = parse_members(e["members"], id_index, p, nb.id);
    } else if (e.contains("bounds")) {
      if (!layout)
        fail(errc::validation, "neighborhood file: group " + std::to_string(nb.id) +
                                   " uses bounds but no layout was given");
      const auto& b = e["bounds"];
      if (!b.is_array() || static_cast<int>(b.size()) != layout->dim)
        fail(errc::validation, "neighborhood file: group " + std::to_string(nb.id) +
                                   " bounds arity must match layout dimension " +
                                   std::to_string(layout->dim));
      std::vector<std::array<int, 2>> bounds;
      for (const auto& pairj : b) {
        if (!pairj.is_array() || pairj.size() != 2 || !pairj[0].is_number_integer() ||
            !pairj[1].is_number_integer())
          fail(errc::validation, "neighborhood file: bounds entries must be [lo, hi]");
        bounds.push_back({pairj[0].get<int>(), pairj[1].get<int>()});
      }
      for (int s = 0; s < p; ++s) {
        bool in = true;
        for (int d = 0; d < layout->dim && in; ++d) {
          int c = layout->coords[static_cast<std::size_t>(s)][static_cast<std::size_t>(d)];
          in = c >= bounds[static_cast<std::size_t>(d)][0] && c <= bounds[static_cast<std::size_t>(d)][1];
        }
        if (in) nb.members.push_back(s);
      }
      if (nb.members.empty())
        fail(errc::validation,
             "neighborhood file: group " + std::to_string(nb.id) + " bounds select no series");
      nb.bounds = std::move(bounds);
    } else {
      fail(errc::validation, "neighborhood file: group " + std::to_string(nb.id) +
                                 " needs 'members' or 'bounds'");
    }
    items.push_back(std::move(nb));
  }
  return make_neighborhood_set(std::move(items), p, max_size_ratio);
}

void write_neighborhoods_json(const NeighborhoodSet& nbhds,
                              const std::vector<std::string>& series_ids,
                              const std::string& path) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& nb : nbhds.items) {
    nlohmann::json e;
    e["id"] = nb.id;
    nlohmann::json mem = nlohmann::json::array();
    for (int m : nb.members) mem.push_back(series_ids[static_cast<std::size_t>(m)]);
    e["members"] = mem;
    if (nb.bounds) {
      nlohmann::json b = nlohmann::json::array();
      for (const auto& d : *nb.bounds) b.push_back({d[0], d[1]});
      e["bounds"] = b;
    }
    arr.push_back(e);
  }
  nlohmann::json root;
  root["neighborhoods"] = arr;
  std::ofstream out(path);
  if (!out) fail(errc::io, "cannot write neighborhood file: " + path);
  out << root.dump(2) << '\n';
}

}  // namespace mosum
