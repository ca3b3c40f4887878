#include <algorithm>
#include <tuple>

#include "onramp/scheduler.hpp"
#include "onramp/simulator.hpp"

namespace onramp {

namespace {

struct Draw {
  Origin origin;
  int size;
  double arrival;
  double speed;
};

void draw_road(const ScenarioConfig& cfg, Origin origin, std::mt19937_64& rng,
               std::vector<Draw>& out) {
  const auto& g = cfg.geometry;
  const bool highway = origin == Origin::Highway;
  const double vph = highway ? cfg.highway_volume : cfg.ramp_volume;
  const SizeRange range = highway ? cfg.highway_platoon_size_range : cfg.ramp_platoon_size_range;
  if (!(vph > 0.0)) return;

  const double v_lo = cfg.initial_speed_min_fraction * g.v_max;
  const double spread = entry_time(v_lo, g) - entry_time(g.v_max, g);
  const auto min_gap = [&](int size) {
    return g.merging_zone_length / g.v_max + (size - 1) * cfg.headway + cfg.safe_time_gap + spread;
  };
  const double mean_gap = 3600.0 * range.mean() / vph;
  const double slack = mean_gap - min_gap(1) - (range.mean() - 1.0) * cfg.headway;
  std::exponential_distribution<double> extra(1.0 / std::max(slack, 1e-6));
  std::uniform_int_distribution<int> size_dist(range.min, range.max);
  std::uniform_real_distribution<double> speed_dist(v_lo, g.v_max);

  const double start = cfg.approach_length / v_lo;
  double t = start + extra(rng);
  while (t <= cfg.sim_duration) {
    const int size = size_dist(rng);
    const double v0 = speed_dist(rng);
    out.push_back(Draw{origin, size, t, v0});
    t += min_gap(size) + extra(rng);
  }
}

}  // namespace

double appear_time(const Platoon& p, const ScenarioConfig& cfg) {
  return cfg.approach_length > 0.0 ? p.arrival_time() - cfg.approach_length / p.initial_speed()
                                   : p.arrival_time();
}

std::vector<Platoon> generate_arrivals(const ScenarioConfig& cfg, std::mt19937_64& rng) {
  std::vector<Draw> draws;
  draw_road(cfg, Origin::Highway, rng, draws);
  draw_road(cfg, Origin::Ramp, rng, draws);

  const double x = cfg.approach_length;
  const auto appear = [x](const Draw& d) { return x > 0.0 ? d.arrival - x / d.speed : d.arrival; };
  std::stable_sort(draws.begin(), draws.end(), [&](const Draw& a, const Draw& b) {
    return std::tuple(appear(a), a.origin != Origin::Highway) <
           std::tuple(appear(b), b.origin != Origin::Highway);
  });

  std::vector<Platoon> out;
  out.reserve(draws.size());
  int id = 1;
  for (const auto& d : draws) {
    PlatoonParams p;
    p.id = id++;
    p.origin = d.origin;
    p.weight = cfg.weight_for(d.origin);
    p.size = d.size;
    p.headway = cfg.headway;
    p.arrival_time = d.arrival;
    p.initial_speed = d.speed;
    out.emplace_back(p, cfg.geometry);
  }
  return out;
}

std::vector<Platoon> generate_arrivals(const ScenarioConfig& cfg) {
  std::mt19937_64 rng(cfg.rng_seed);
  return generate_arrivals(cfg, rng);
}

}  // namespace onramp
