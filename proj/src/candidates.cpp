#include "packrl/candidates.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <tuple>

namespace packrl {

Mode mode_from_string(const std::string& s) {
  if (s == "discrete") return Mode::Discrete;
  if (s == "continuous") return Mode::Continuous;
  throw std::invalid_argument("unknown mode: " + s);
}

std::string to_string(Mode m) {
  return m == Mode::Discrete ? "discrete" : "continuous";
}

PackConfig PackConfig::discrete(double container_edge) {
  PackConfig cfg;
  cfg.mode = Mode::Discrete;
  cfg.max_candidates = 50;
  cfg.heightmap_rx = cfg.heightmap_ry = static_cast<int>(std::lround(container_edge));
  return cfg;
}

PackConfig PackConfig::continuous(double container_edge) {
  PackConfig cfg;
  cfg.mode = Mode::Continuous;
  cfg.max_candidates = 100;
  cfg.heightmap_rx = cfg.heightmap_ry = static_cast<int>(std::lround(container_edge * 2));
  return cfg;
}

namespace {

bool placement_feasible(const PlacedBox& b, const Container& container,
                        const std::vector<PlacedBox>& packed,
                        const Heightmap& heightmap, const PackConfig& cfg) {
  if (!box_inside(b, container)) return false;
  for (const auto& p : packed) {
    if (boxes_overlap(b, p)) return false;
  }
  if (cfg.support_fraction > 0.0 && b.pos.z > kGeomEps) {
    double frac = heightmap.support_fraction(b.pos.x, b.pos.y, b.dim.l, b.dim.w, b.pos.z);
    if (frac + kGeomEps < cfg.support_fraction) return false;
  }
  return true;
}

using Key = std::tuple<long long, long long, long long, long long, long long, long long>;

Key quantize(const CandidateAction& c) {
  auto q = [](double v) { return static_cast<long long>(std::llround(v * 1e6)); };
  return {q(c.placement.z), q(c.placement.y), q(c.placement.x),
          q(c.dim.l), q(c.dim.w), q(c.dim.h)};
}

}  // namespace

CandidateSet generate_candidates(const Container& container,
                                 const std::vector<PlacedBox>& packed,
                                 const std::vector<EmptySpace>& spaces,
                                 const Heightmap& heightmap, const Dim3& item,
                                 const PackConfig& cfg) {
  std::vector<Dim3> dims{item};
  if (cfg.allow_rotation && std::abs(item.l - item.w) > kGeomEps) {
    dims.push_back(Dim3{item.w, item.l, item.h});
  }

  std::vector<CandidateAction> raw;
  auto add = [&](double x, double y, double z, const Dim3& d, Heuristic src) {
    raw.push_back(CandidateAction{Placement{x, y, z}, d, src, true});
  };

  for (const auto& d : dims) {
    if (cfg.heuristics & static_cast<unsigned>(Heuristic::EmsCorner)) {
      for (const auto& s : spaces) {
        if (d.l > s.dx() + kGeomEps || d.w > s.dy() + kGeomEps || d.h > s.dz() + kGeomEps)
          continue;
        add(s.x0, s.y0, s.z0, d, Heuristic::EmsCorner);
        add(s.x1 - d.l, s.y0, s.z0, d, Heuristic::EmsCorner);
        add(s.x0, s.y1 - d.w, s.z0, d, Heuristic::EmsCorner);
        add(s.x1 - d.l, s.y1 - d.w, s.z0, d, Heuristic::EmsCorner);
      }
    }
    if (cfg.heuristics & static_cast<unsigned>(Heuristic::CornerPoint)) {
      std::vector<double> xs{0.0}, ys{0.0};
      for (const auto& b : packed) {
        xs.push_back(b.x1());
        ys.push_back(b.y1());
      }
      for (double x : xs) {
        for (double y : ys) {
          if (x + d.l > container.dim.l + kGeomEps || y + d.w > container.dim.w + kGeomEps)
            continue;
          if (auto p = heightmap.place_at(d, x, y)) add(p->x, p->y, p->z, d, Heuristic::CornerPoint);
        }
      }
    }
    if (cfg.heuristics & static_cast<unsigned>(Heuristic::ExtremePoint)) {
      std::vector<Placement> pts{{0, 0, 0}};
      for (const auto& b : packed) {
        pts.push_back({b.x1(), b.pos.y, b.pos.z});
        pts.push_back({b.pos.x, b.y1(), b.pos.z});
        pts.push_back({b.pos.x, b.pos.y, b.z1()});
      }
      for (const auto& pt : pts) add(pt.x, pt.y, pt.z, d, Heuristic::ExtremePoint);
    }
    if (cfg.heuristics & static_cast<unsigned>(Heuristic::HeightmapMin)) {
      double cx = container.dim.l / heightmap.rx();
      double cy = container.dim.w / heightmap.ry();
      for (int iy = 0; iy < heightmap.ry(); ++iy) {
        for (int ix = 0; ix < heightmap.rx(); ++ix) {
          double x = ix * cx, y = iy * cy;
          if (x + d.l > container.dim.l + kGeomEps || y + d.w > container.dim.w + kGeomEps)
            continue;
          if (auto p = heightmap.place_at(d, x, y)) add(p->x, p->y, p->z, d, Heuristic::HeightmapMin);
        }
      }
    }
  }

  std::map<Key, CandidateAction> dedup;
  for (const auto& c : raw) {
    PlacedBox b{c.dim, c.placement};
    if (!placement_feasible(b, container, packed, heightmap, cfg)) continue;
    dedup.emplace(quantize(c), c);  // first writer wins, key orders by (z, y, x)
  }

  CandidateSet out;
  out.actions.reserve(std::min<std::size_t>(dedup.size(), cfg.max_candidates));
  for (const auto& [key, c] : dedup) {
    if (static_cast<int>(out.actions.size()) >= cfg.max_candidates) break;
    out.actions.push_back(c);
  }
  return out;
}

}  // namespace packrl
