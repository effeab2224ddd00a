#include "hom/mc.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include "hom/error.hpp"
#include "hom/rng.hpp"

namespace hom::mc {
namespace {

// Substream ids. Each kind of draw has its own stream, so e.g. enabling dark
// counts leaves photon times untouched.
enum Substream : std::uint32_t {
  kLaserTimes = 1,
  kSignalTimes = 2,
  kBackgroundTimes = 3,
  kRouting = 4,
  kJitter = 5,
  kDarkD2 = 6,
  kDarkD3 = 7,
};

enum class Source : std::uint8_t { Signal, Background, Laser };

struct Photon {
  double time;
  Source source;
  Channel channel = Channel::D2;
};

Origin origin_of(Source s) { return s == Source::Laser ? Origin::Laser : Origin::Dot; }

void poisson_times(rng::Stream& rs, double rate, double t0, double t1, Source src,
                   std::vector<Photon>& out) {
  if (rate <= 0.0) return;
  for (double t = t0 + rs.exponential(rate); t < t1; t += rs.exponential(rate)) {
    out.push_back({t, src});
  }
}

// Two-state emitter re-excited at rate P and decaying at rate G, with P + G = 1/τ_rad.
// Inter-emission times are Exp(P) + Exp(G), so g²(τ) = 1 − exp(−|τ|/τ_rad) exactly.
void renewal_times(rng::Stream& rs, double rate, double tau_rad, double t0, double t1,
                   std::vector<Photon>& out) {
  if (rate <= 0.0) return;
  const double k = 1.0 / tau_rad;
  const double disc = std::sqrt(std::max(0.0, k * k - 4.0 * rate * k));
  const double pump = 0.5 * (k - disc);
  const double decay = k - pump;
  // Stationary start: excited with probability P/(P+G).
  double t = t0;
  if (rs.uniform() >= pump / k) t += rs.exponential(pump);
  t += rs.exponential(decay);
  while (t < t1) {
    out.push_back({t, Source::Signal});
    t += rs.exponential(pump) + rs.exponential(decay);
  }
}

struct Router {
  const McRunConfig& cfg;
  rng::Stream& rs;
  double overlap;
  double decay;
  double window;

  // Dot photons enter the splitter's "a" port: transmitted → D2.
  Channel independent_dot() { return rs.bernoulli(cfg.splitter.T()) ? Channel::D2 : Channel::D3; }
  // Laser photons enter the "b" port: reflected → D2.
  Channel independent_laser() { return rs.bernoulli(cfg.splitter.R()) ? Channel::D2 : Channel::D3; }

  // R = T: copy the output port of neighbour k with probability c_k, else route
  // independently. Reproduces P(same port) = ½(1 + c_k) for every dot–laser pair.
  Channel balanced(double t, std::span<const double> laser_t, std::span<const Photon> laser) {
    const auto lo = std::lower_bound(laser_t.begin(), laser_t.end(), t - window);
    const auto hi = std::upper_bound(lo, laser_t.end(), t + window);
    double total = 0.0;
    for (auto it = lo; it != hi; ++it) total += overlap * std::exp(-std::abs(*it - t) / decay);
    const double norm = total > 1.0 ? total : 1.0;
    const double u = rs.uniform();
    if (u < total / norm) {
      double acc = 0.0;
      for (auto it = lo; it != hi; ++it) {
        acc += overlap * std::exp(-std::abs(*it - t) / decay) / norm;
        if (u < acc || std::next(it) == hi) {
          return laser[static_cast<std::size_t>(it - laser_t.begin())].channel;
        }
      }
    }
    return independent_dot();
  }

  // R ≠ T: pair with the nearest unclaimed laser photon and draw the joint outcome.
  Channel unbalanced(double t, std::span<const double> laser_t, std::span<Photon> laser,
                     std::vector<bool>& claimed) {
    const auto lo = std::lower_bound(laser_t.begin(), laser_t.end(), t - window);
    const auto hi = std::upper_bound(lo, laser_t.end(), t + window);
    std::ptrdiff_t best = -1;
    double best_dt = window;
    for (auto it = lo; it != hi; ++it) {
      const auto idx = it - laser_t.begin();
      if (claimed[static_cast<std::size_t>(idx)]) continue;
      if (std::abs(*it - t) <= best_dt) {
        best_dt = std::abs(*it - t);
        best = idx;
      }
    }
    if (best < 0) return independent_dot();

    const double R = cfg.splitter.R();
    const double T = cfg.splitter.T();
    const double c = overlap * std::exp(-best_dt / decay);
    const double kappa = 2.0 * R * T * c / (R * R + T * T);
    const double p_split_dot_d2 = T * T * (1.0 - kappa);
    const double p_split_dot_d3 = R * R * (1.0 - kappa);
    const double p_bunch = R * T * (1.0 + c);  // each of (D2, D2) and (D3, D3)

    Photon& partner = laser[static_cast<std::size_t>(best)];
    claimed[static_cast<std::size_t>(best)] = true;
    const double u = rs.uniform();
    Channel dot_ch;
    if (u < p_split_dot_d2) {
      dot_ch = Channel::D2;
      partner.channel = Channel::D3;
    } else if (u < p_split_dot_d2 + p_split_dot_d3) {
      dot_ch = Channel::D3;
      partner.channel = Channel::D2;
    } else if (u < p_split_dot_d2 + p_split_dot_d3 + p_bunch) {
      dot_ch = partner.channel = Channel::D2;
    } else {
      dot_ch = partner.channel = Channel::D3;
    }
    return dot_ch;
  }
};

std::vector<Click> simulate_segment(const McRunConfig& cfg, std::uint64_t segment, double t0,
                                    double t1) {
  const auto& q = cfg.quantum;
  const bool dot_on = cfg.mode != Mode::HbtLaser;
  const bool laser_on = cfg.mode != Mode::HbtDot;
  const double b = q.background_fraction();

  std::vector<Photon> laser;
  std::vector<Photon> dot;
  if (laser_on) {
    rng::Stream rs(cfg.seed, segment, kLaserTimes);
    poisson_times(rs, cfg.laser_rate, t0, t1, Source::Laser, laser);
  }
  if (dot_on) {
    rng::Stream sig(cfg.seed, segment, kSignalTimes);
    renewal_times(sig, (1.0 - b) * cfg.dot_rate, q.tau_rad(), t0, t1, dot);
    rng::Stream bg(cfg.seed, segment, kBackgroundTimes);
    poisson_times(bg, b * cfg.dot_rate, t0, t1, Source::Background, dot);
    std::stable_sort(dot.begin(), dot.end(),
                     [](const Photon& x, const Photon& y) { return x.time < y.time; });
  }

  rng::Stream routing(cfg.seed, segment, kRouting);
  Router router{cfg, routing, cfg.ic.overlap_weight(), q.tau_coh(),
                McRunConfig::kPairWindowCoherenceTimes * q.tau_coh()};

  for (auto& p : laser) p.channel = router.independent_laser();

  std::vector<double> laser_t(laser.size());
  std::transform(laser.begin(), laser.end(), laser_t.begin(), [](const Photon& p) { return p.time; });
  std::vector<bool> claimed(laser.size(), false);
  const bool interfere = cfg.mode == Mode::TwoSource && router.overlap > 0.0 && !laser.empty();

  for (auto& p : dot) {
    const bool eligible = p.source == Source::Signal || cfg.background_interferes;
    if (!interfere || !eligible) {
      p.channel = router.independent_dot();
    } else if (cfg.splitter.balanced()) {
      p.channel = router.balanced(p.time, laser_t, laser);
    } else {
      p.channel = router.unbalanced(p.time, laser_t, laser, claimed);
    }
  }

  std::vector<Click> clicks;
  clicks.reserve(laser.size() + dot.size());
  const double jitter = cfg.detector.detector_sigma();
  rng::Stream js(cfg.seed, segment, kJitter);
  const auto emit = [&](const Photon& p) {
    const double t = jitter > 0.0 ? p.time + jitter * js.normal() : p.time;
    clicks.push_back({t, p.channel, cfg.tag_origins ? origin_of(p.source) : Origin::Untagged});
  };
  for (const auto& p : laser) emit(p);
  for (const auto& p : dot) emit(p);

  if (cfg.detector.dark_rate() > 0.0) {
    for (const auto& [sub, ch] : {std::pair{kDarkD2, Channel::D2}, std::pair{kDarkD3, Channel::D3}}) {
      rng::Stream ds(cfg.seed, segment, sub);
      std::vector<Photon> dark;
      poisson_times(ds, cfg.detector.dark_rate(), t0, t1, Source::Laser, dark);
      for (const auto& d : dark) {
        clicks.push_back({d.time, ch, cfg.tag_origins ? Origin::Dark : Origin::Untagged});
      }
    }
  }
  return clicks;
}

}  // namespace

std::string to_string(Mode mode) {
  switch (mode) {
    case Mode::HbtDot: return "hbt_dot";
    case Mode::HbtLaser: return "hbt_laser";
    case Mode::TwoSource: return "two_source";
  }
  return "unknown";
}

Mode parse_mode(const std::string& name) {
  if (name == "hbt_dot") return Mode::HbtDot;
  if (name == "hbt_laser") return Mode::HbtLaser;
  if (name == "two_source") return Mode::TwoSource;
  throw ValidationError("unknown mc mode '" + name + "' (hbt_dot, hbt_laser, two_source)");
}

std::vector<double> TimestampStream::channel_times(Channel ch) const {
  std::vector<double> out;
  out.reserve(clicks.size() / 2 + 1);
  for (const auto& c : clicks) {
    if (c.channel == ch) out.push_back(c.time_ps);
  }
  return out;
}

std::size_t TimestampStream::count(Channel ch) const {
  return static_cast<std::size_t>(
      std::count_if(clicks.begin(), clicks.end(), [ch](const Click& c) { return c.channel == ch; }));
}

void McRunConfig::validate() const {
  if (!(duration_ps > 0.0) || !std::isfinite(duration_ps)) {
    throw ValidationError("duration must be finite and > 0");
  }
  if (!(dot_rate >= 0.0) || !(laser_rate >= 0.0) || !std::isfinite(dot_rate) ||
      !std::isfinite(laser_rate)) {
    throw ValidationError("rates must be finite and >= 0");
  }
  if (segments == 0) throw ValidationError("segments must be >= 1");
  const double signal = (1.0 - quantum.background_fraction()) * dot_rate;
  if (mode != Mode::HbtLaser && signal * quantum.tau_rad() > 0.25) {
    throw ValidationError("dot signal rate exceeds 1/(4 tau_rad); the emitter cannot run that fast");
  }
  if (expected_clicks() > kMaxExpectedClicks) {
    throw ValidationError("expected click count exceeds 1e9; shorten the run or lower the rates");
  }
}

std::vector<std::string> McRunConfig::warnings() const {
  std::vector<std::string> out;
  if (mode != Mode::HbtLaser && dot_rate * quantum.tau_rad() > 0.1) {
    out.emplace_back("dot_rate * tau_rad > 0.1: more than one dot photon in flight is likely");
  }
  if (dot_rate + laser_rate > 1e-4) {
    out.emplace_back("rates above 1e-4 counts/ps: detector dead time (not modelled) would matter");
  }
  if (coherent.outside_weak_field()) {
    out.emplace_back("alpha_sq > 0.1: outside the weak-laser regime");
  }
  return out;
}

double McRunConfig::expected_clicks() const {
  double rate = 2.0 * detector.dark_rate();
  if (mode != Mode::HbtLaser) rate += dot_rate;
  if (mode != Mode::HbtDot) rate += laser_rate;
  return rate * duration_ps;
}

std::uint64_t McRunConfig::hash() const {
  std::ostringstream s;
  s.precision(17);
  s << duration_ps << '|' << dot_rate << '|' << laser_rate << '|' << seed << '|'
    << to_string(mode) << '|' << splitter.R() << '|' << ic.gamma() << '|' << ic.phi() << '|'
    << detector.pair_fwhm() << '|' << detector.dark_rate() << '|' << quantum.eta() << '|'
    << quantum.tau_coh() << '|' << quantum.tau_rad() << '|' << quantum.background_fraction()
    << '|' << coherent.alpha_sq() << '|' << coherent.tau_coh_laser() << '|' << segments << '|'
    << background_interferes << '|' << tag_origins;
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (const unsigned char ch : s.str()) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

double pair_kernel(double dt_ps, const BeamSplitter& splitter, const InterferenceConfig& ic,
                   const QuantumSourceParams& q) {
  const double R = splitter.R();
  const double T = splitter.T();
  return R * R + T * T - 2.0 * R * T * ic.overlap_weight() * std::exp(-std::abs(dt_ps) / q.tau_coh());
}

TimestampStream simulate(const McRunConfig& cfg) {
  cfg.validate();

  const unsigned k = cfg.segments;
  std::vector<std::vector<Click>> parts(k);
  std::atomic<unsigned> next{0};
  const auto worker = [&] {
    for (unsigned s = next++; s < k; s = next++) {
      const double t0 = cfg.duration_ps * s / k;
      const double t1 = s + 1 == k ? cfg.duration_ps : cfg.duration_ps * (s + 1) / k;
      parts[s] = simulate_segment(cfg, s, t0, t1);
    }
  };
  const unsigned threads = std::min(k, std::max(1U, std::thread::hardware_concurrency()));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
  }

  TimestampStream out;
  out.duration_ps = cfg.duration_ps;
  out.seed = cfg.seed;
  out.config_hash = cfg.hash();
  out.tagged = cfg.tag_origins;
  std::size_t total = 0;
  for (const auto& p : parts) total += p.size();
  out.clicks.reserve(total);
  for (auto& p : parts) {
    for (const auto& c : p) {
      // Jitter can push clicks outside the acquisition window.
      if (c.time_ps >= 0.0 && c.time_ps <= cfg.duration_ps) out.clicks.push_back(c);
    }
    std::vector<Click>().swap(p);
  }
  std::sort(out.clicks.begin(), out.clicks.end(), [](const Click& a, const Click& b) {
    return a.time_ps < b.time_ps || (a.time_ps == b.time_ps && a.channel < b.channel);
  });
  out.clicks.erase(std::unique(out.clicks.begin(), out.clicks.end(),
                               [](const Click& a, const Click& b) {
                                 return a.time_ps == b.time_ps && a.channel == b.channel;
                               }),
                   out.clicks.end());
  return out;
}

TimestampStream filter_origin(const TimestampStream& stream, Origin origin) {
  if (!stream.tagged) throw ValidationError("origin filtering needs a tagged stream");
  TimestampStream out = stream;
  out.clicks.clear();
  std::copy_if(stream.clicks.begin(), stream.clicks.end(), std::back_inserter(out.clicks),
               [origin](const Click& c) { return c.origin == origin; });
  return out;
}

}  // namespace hom::mc
