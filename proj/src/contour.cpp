#include <cmath>
#include <cstdint>
#include <map>

#include "fbcom/errors.hpp"
#include "fbcom/sweep.hpp"

namespace fbcom {

namespace {

using Point = std::pair<double, double>;

struct Segment {
  std::int64_t a, b;  // edge keys of the two end points
};

}  // namespace

std::vector<Polyline> contour_lines(const std::vector<double>& x, const std::vector<double>& y,
                                    const std::vector<double>& f, double level) {
  const std::size_t nx = x.size();
  const std::size_t ny = y.size();
  if (f.size() != nx * ny) throw DomainError("field size does not match the grid");
  if (nx < 2 || ny < 2) return {};

  auto value = [&](std::size_t i, std::size_t j) { return f[i * ny + j]; };
  // Horizontal edges run along x from (i, j); vertical edges along y from (i, j).
  auto h_key = [ny](std::size_t i, std::size_t j) { return static_cast<std::int64_t>((i * ny + j) * 2); };
  auto v_key = [ny](std::size_t i, std::size_t j) { return static_cast<std::int64_t>((i * ny + j) * 2 + 1); };

  std::map<std::int64_t, Point> points;
  std::vector<Segment> segments;

  auto cross = [&](std::int64_t key, Point pa, double fa, Point pb, double fb) {
    if (!points.count(key)) {
      const double t = (level - fa) / (fb - fa);
      points[key] = {pa.first + t * (pb.first - pa.first), pa.second + t * (pb.second - pa.second)};
    }
    return key;
  };

  for (std::size_t i = 0; i + 1 < nx; ++i) {
    for (std::size_t j = 0; j + 1 < ny; ++j) {
      const double v[4] = {value(i, j), value(i + 1, j), value(i + 1, j + 1), value(i, j + 1)};
      if (std::isnan(v[0]) || std::isnan(v[1]) || std::isnan(v[2]) || std::isnan(v[3])) continue;
      const Point p[4] = {{x[i], y[j]}, {x[i + 1], y[j]}, {x[i + 1], y[j + 1]}, {x[i], y[j + 1]}};
      bool up[4];
      for (int k = 0; k < 4; ++k) up[k] = v[k] > level;
      // Edge k joins corner k and corner (k + 1) % 4.
      const std::int64_t keys[4] = {h_key(i, j), v_key(i + 1, j), h_key(i, j + 1), v_key(i, j)};
      std::int64_t hit[4];
      int n = 0;
      for (int k = 0; k < 4; ++k) {
        const int k2 = (k + 1) % 4;
        if (up[k] != up[k2]) hit[k] = cross(keys[k], p[k], v[k], p[k2], v[k2]), ++n;
        else hit[k] = -1;
      }
      if (n == 2) {
        std::int64_t ends[2];
        int m = 0;
        for (int k = 0; k < 4; ++k) {
          if (hit[k] >= 0) ends[m++] = hit[k];
        }
        segments.push_back({ends[0], ends[1]});
      } else if (n == 4) {
        // Saddle: cut off the two corners whose side differs from the centre.
        const bool centre_up = 0.25 * (v[0] + v[1] + v[2] + v[3]) > level;
        for (int k = 0; k < 4; ++k) {
          if (up[k] != centre_up) segments.push_back({hit[(k + 3) % 4], hit[k]});
        }
      }
    }
  }

  std::map<std::int64_t, std::vector<std::size_t>> touching;
  for (std::size_t s = 0; s < segments.size(); ++s) {
    touching[segments[s].a].push_back(s);
    touching[segments[s].b].push_back(s);
  }
  std::vector<bool> used(segments.size(), false);

  auto walk = [&](std::size_t first, std::int64_t start) {
    Polyline line;
    line.points.push_back(points.at(start));
    std::int64_t at = start;
    std::size_t seg = first;
    while (true) {
      used[seg] = true;
      at = segments[seg].a == at ? segments[seg].b : segments[seg].a;
      line.points.push_back(points.at(at));
      std::size_t next = segments.size();
      for (std::size_t cand : touching[at]) {
        if (!used[cand]) next = cand;
      }
      if (next == segments.size()) break;
      seg = next;
    }
    line.closed = line.points.size() > 2 && at == start;
    return line;
  };

  std::vector<Polyline> out;
  // Open lines start at end points that only one segment touches.
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (used[s]) continue;
    for (std::int64_t end : {segments[s].a, segments[s].b}) {
      if (touching[end].size() == 1 && !used[s]) out.push_back(walk(s, end));
    }
  }
  for (std::size_t s = 0; s < segments.size(); ++s) {
    if (!used[s]) out.push_back(walk(s, segments[s].a));
  }
  return out;
}

}  // namespace fbcom
