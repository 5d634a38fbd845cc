#include "nicedyn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <random>

#include "nicedyn/error.hpp"
#include "nicedyn/parallel.hpp"

namespace nicedyn {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Partition cell of an image point; planar images just outside every occupied
// cell (U near its boundary) go to an occupied neighbour.
long image_cell(const GridPartition& g, cplx p) {
  long j = g.locate(p);
  if (j >= 0 || g.one_dimensional) return j;
  int i = static_cast<int>(std::floor((p.real() - g.bounds.xmin) / g.h));
  int k = static_cast<int>(std::floor((p.imag() - g.bounds.ymin) / g.h));
  for (int dk = -1; dk <= 1; ++dk)
    for (int di = -1; di <= 1; ++di) {
      int a = i + di, b = k + dk;
      if (a < 0 || b < 0 || a >= g.nx || b >= g.ny) continue;
      long c = g.index_[static_cast<std::size_t>(b) * g.nx + a];
      if (c >= 0) return c;
    }
  return -1;
}

bool iterate_return(const DynamicalMap& map, const ReturnMap& rm, cplx& z, int k) {
  for (int s = 0; s < k; ++s) {
    cplx img;
    if (!apply_return(map, rm, z, img)) return false;
    z = img;
  }
  return true;
}

}  // namespace

JacobianValue conformal_jacobian(const ConformalSpec& spec, const DynamicalMap& map, const SpherePoint& z) {
  JacobianValue out;
  const double scale = std::exp(spec.p);
  if (spec.t == 0.0) {
    out.value = scale;
    return out;
  }
  double norm;
  try {
    norm = derivative(map, z, spec.metric).norm;
  } catch (const Error&) {
    norm = kInf;
  }
  bool blows_up = (norm == kInf && spec.t > 0) || (norm == 0.0 && spec.t < 0);
  if (blows_up) {
    out.value = kInf;
    out.infinite = true;
    out.zero_mass = true;
    return out;
  }
  if (norm == kInf || norm == 0.0) {
    out.value = 0.0;
    return out;
  }
  out.value = scale * std::pow(norm, spec.t);
  return out;
}

std::vector<cplx> stratified_samples(const Box& cell, bool one_dimensional, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<cplx> pts;
  pts.reserve(count);
  const double wx = cell.xmax - cell.xmin, wy = cell.ymax - cell.ymin;
  if (one_dimensional) {
    for (std::size_t i = 0; i < count; ++i) pts.emplace_back(cell.xmin + wx * (i + u(rng)) / count, 0.0);
    return pts;
  }
  std::size_t m = static_cast<std::size_t>(std::ceil(std::sqrt(double(count))));
  for (std::size_t a = 0; a < m && pts.size() < count; ++a)
    for (std::size_t b = 0; b < m && pts.size() < count; ++b)
      pts.emplace_back(cell.xmin + wx * (b + u(rng)) / m, cell.ymin + wy * (a + u(rng)) / m);
  return pts;
}

double UlamModel::escaping_mass() const {
  double total = 0.0, esc = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    total += cell_mass[j];
    esc += cell_mass[j] * escaping[j];
  }
  return total > 0 ? esc / total : 0.0;
}

double UlamModel::row_sum_defect() const {
  double worst = 0.0;
  for (std::size_t j = 0; j < size(); ++j) {
    double s = escaping[j];
    for (std::size_t e = row_start[j]; e < row_start[j + 1]; ++e) s += weight[e];
    worst = std::max(worst, std::abs(1.0 - s));
  }
  return worst;
}

UlamModel build_ulam(const DynamicalMap& map, const ReturnMap& rm, double h, std::size_t samples_per_cell,
                     std::uint64_t seed) {
  if (rm.components.empty()) throw Error("invalid parameters", "return map has no components");
  if (samples_per_cell == 0) throw Error("invalid parameters", "samples per cell must be positive");
  UlamModel m;
  m.support = rm.support;
  m.samples_per_cell = samples_per_cell;
  const bool one_d = rm.support == Support::real_line;
  m.partition = make_grid_partition(rm.base, h, one_d);
  const std::size_t n = m.partition.size();
  std::vector<std::vector<std::pair<std::size_t, double>>> rows(n);
  m.cell_mass.assign(n, 0.0);
  m.escaping.assign(n, 1.0);
  std::vector<char> empty(n, 0);
  parallel_for(n, [&](std::size_t j) {
    const Box& cell = m.partition.cells[j];
    auto pts = stratified_samples(cell, one_d, samples_per_cell, mix_seed(seed, j));
    std::map<std::size_t, std::size_t> hits;
    std::size_t inside = 0, esc = 0;
    for (cplx p : pts) {
      if (!one_d && contains(rm.base, p) != Containment::inside) continue;
      ++inside;
      cplx img;
      long c = -1;
      if (!apply_return(map, rm, p, img)) {
        ++esc;
        continue;
      }
      c = image_cell(m.partition, img);
      if (c < 0) {
        ++esc;
        continue;
      }
      ++hits[static_cast<std::size_t>(c)];
    }
    if (inside == 0) {
      empty[j] = 1;
      return;
    }
    m.cell_mass[j] = m.partition.nominal_mass(j) * double(inside) / double(pts.size());
    double total = double(inside);
    for (auto [k, cnt] : hits) rows[j].emplace_back(k, double(cnt) / total);
    m.escaping[j] = double(esc) / total;
    double s = m.escaping[j];
    for (auto& e : rows[j]) s += e.second;
    for (auto& e : rows[j]) e.second /= s;
    m.escaping[j] /= s;
  });
  m.row_start.assign(n + 1, 0);
  for (std::size_t j = 0; j < n; ++j) {
    m.row_start[j + 1] = m.row_start[j] + rows[j].size();
    for (auto [k, w] : rows[j]) {
      m.col.push_back(k);
      m.weight.push_back(w);
    }
    if (empty[j]) ++m.dropped;
  }
  if (m.dropped)
    m.warnings.push_back(std::to_string(m.dropped) + " cells with no samples inside U dropped");
  return m;
}

double InducedDensity::max_cell_mass() const {
  double worst = 0.0;
  for (double v : pi) worst = std::max(worst, v);
  return worst;
}

InducedDensity stationary_density(const UlamModel& model, double tol, int max_iterations) {
  const std::size_t n = model.size();
  if (n == 0) throw Error("invalid parameters", "empty Ulam model");
  // Transpose for a gather-style product that parallelises over columns.
  std::vector<std::size_t> t_start(n + 1, 0), t_row(model.col.size());
  std::vector<double> t_w(model.col.size());
  for (std::size_t k : model.col) ++t_start[k + 1];
  for (std::size_t k = 0; k < n; ++k) t_start[k + 1] += t_start[k];
  {
    std::vector<std::size_t> fill(t_start.begin(), t_start.end() - 1);
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t e = model.row_start[j]; e < model.row_start[j + 1]; ++e) {
        std::size_t slot = fill[model.col[e]]++;
        t_row[slot] = j;
        t_w[slot] = model.weight[e];
      }
  }
  auto apply = [&](const std::vector<double>& pi, std::vector<double>& out) {
    parallel_for(n, [&](std::size_t k) {
      double s = 0.0;
      for (std::size_t e = t_start[k]; e < t_start[k + 1]; ++e) s += pi[t_row[e]] * t_w[e];
      out[k] = s;
    });
  };
  auto normalise = [&](std::vector<double>& v) {
    double s = pairwise_sum(v.data(), v.size());
    if (!(s > 0)) throw Error("non-convergence", "all mass escaped during power iteration");
    for (double& x : v) x /= s;
    return s;
  };

  InducedDensity d;
  std::vector<double> pi(model.cell_mass), next(n), moved(n);
  normalise(pi);
  for (int it = 1; it <= max_iterations; ++it) {
    apply(pi, moved);
    // Lazy step: same fixed points, no oscillation on periodic chains.
    for (std::size_t k = 0; k < n; ++k) next[k] = 0.5 * (pi[k] + moved[k]);
    normalise(next);
    double diff = 0.0;
    for (std::size_t k = 0; k < n; ++k) diff += std::abs(next[k] - pi[k]);
    pi.swap(next);
    d.iterations = it;
    if (it % 16 == 0 || diff < tol) d.residual_history.push_back(diff);
    if (diff < tol) break;
    if (it == max_iterations) {
      std::string hist;
      for (std::size_t i = d.residual_history.size() > 5 ? d.residual_history.size() - 5 : 0;
           i < d.residual_history.size(); ++i)
        hist += " " + std::to_string(d.residual_history[i]);
      throw Error("non-convergence", "power iteration residual history:" + hist);
    }
  }
  apply(pi, moved);
  double returned = pairwise_sum(moved.data(), n);
  d.escaping_mass = 1.0 - returned;
  double res = 0.0;
  for (std::size_t k = 0; k < n; ++k) res += std::abs(moved[k] / returned - pi[k]);
  d.residual = res;
  if (d.escaping_mass > 0.1)
    d.warnings.push_back("escaping mass " + std::to_string(d.escaping_mass) + " exceeds 10%");
  d.pi = pi;
  d.rho.assign(n, 0.0);
  for (std::size_t k = 0; k < n; ++k)
    if (model.cell_mass[k] > 0) d.rho[k] = pi[k] / model.cell_mass[k];
  d.normalization = pairwise_sum(pi.data(), n);
  d.positive = true;
  for (std::size_t k = 0; k < n; ++k) {
    bool reached = false;
    for (std::size_t e = t_start[k]; e < t_start[k + 1]; ++e)
      if (model.cell_mass[t_row[e]] > 0 && t_w[e] > 0) reached = true;
    if (!reached) continue;
    ++d.reachable;
    if (!(d.rho[k] > 0)) d.positive = false;
  }
  return d;
}

double density_l1_distance(const UlamModel& coarse, const InducedDensity& a, const UlamModel& fine,
                           const InducedDensity& b) {
  std::vector<double> num(coarse.size(), 0.0), den(coarse.size(), 0.0);
  for (std::size_t j = 0; j < fine.size(); ++j) {
    long c = coarse.partition.locate(fine.partition.center(j));
    if (c < 0) continue;
    num[c] += b.rho[j] * fine.cell_mass[j];
    den[c] += fine.cell_mass[j];
  }
  double dist = 0.0;
  for (std::size_t c = 0; c < coarse.size(); ++c) {
    double avg = den[c] > 0 ? num[c] / den[c] : 0.0;
    dist += std::abs(a.rho[c] - avg) * coarse.cell_mass[c];
  }
  return dist;
}

double density_floor(const UlamModel& model, const InducedDensity& density, const Disk& disk) {
  std::vector<double> vals;
  for (std::size_t j = 0; j < model.size(); ++j)
    if (model.cell_mass[j] > 0 && std::abs(model.partition.center(j) - disk.center) <= disk.radius)
      vals.push_back(density.rho[j]);
  if (vals.empty()) throw Error("no density data", "no density cell centred in the disk");
  std::size_t k = static_cast<std::size_t>(std::floor(0.05 * double(vals.size() - 1)));
  std::nth_element(vals.begin(), vals.begin() + static_cast<long>(k), vals.end());
  return vals[k];
}

std::vector<double> component_masses(const UlamModel& model, const InducedDensity& density, const ReturnMap& rm) {
  const GridPartition& g = model.partition;
  std::vector<double> nu(rm.components.size(), 0.0);
  auto rho_at = [&](cplx p) {
    long c = image_cell(g, p);
    return c >= 0 ? density.rho[c] : 0.0;
  };
  parallel_for(rm.components.size(), [&](std::size_t j) {
    const ReturnComponent& comp = rm.components[j];
    if (g.one_dimensional) {
      double s = 0.0;
      for (auto [a, b] : real_axis_intervals(comp.domain)) {
        int i0 = std::max(0, static_cast<int>(std::floor((a - g.bounds.xmin) / g.h)));
        int i1 = std::min(g.nx - 1, static_cast<int>(std::floor((b - g.bounds.xmin) / g.h)));
        for (int i = i0; i <= i1; ++i) {
          long c = g.index_[i];
          if (c < 0) continue;
          const Box& cell = g.cells[c];
          double len = std::min(b, cell.xmax) - std::max(a, cell.xmin);
          if (len > 0) s += len * density.rho[c];
        }
      }
      if (s == 0.0) s = comp.mass * rho_at(comp.center);
      nu[j] = s;
      return;
    }
    Box bb = bounding_box(comp.domain);
    constexpr int m = 8;
    double acc = 0.0;
    int hits = 0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b) {
        cplx p{bb.xmin + (b + 0.5) * (bb.xmax - bb.xmin) / m, bb.ymin + (a + 0.5) * (bb.ymax - bb.ymin) / m};
        if (contains(comp.domain, p) != Containment::inside) continue;
        acc += rho_at(p);
        ++hits;
      }
    nu[j] = comp.mass * (hits ? acc / hits : rho_at(comp.center));
  });
  double total = pairwise_sum(nu.data(), nu.size());
  if (total > 0)
    for (double& v : nu) v /= total;
  return nu;
}

DistortionTrial folklore_distortion_check(const DynamicalMap& map, const ReturnMap& rm, const UlamModel& model,
                                          const std::vector<std::size_t>& A, const std::vector<std::size_t>& B,
                                          int k, std::size_t samples, std::uint64_t seed, double t) {
  if (k < 0 || k > 3) throw Error("invalid parameters", "k must lie in [0, 3]");
  DistortionTrial out;
  out.k = k;
  double C = rm.max_distortion();
  out.bound = std::pow(C, t * k);
  double mA = 0.0, mB = 0.0;
  for (auto j : A) mA += model.cell_mass[j];
  for (auto j : B) mB += model.cell_mass[j];
  if (!(mA > 0) || !(mB > 0)) throw Error("invalid parameters", "cell sets need positive reference mass");
  if (k == 0) return out;  // preimage under the identity: exact equality

  std::vector<char> inA(model.size(), 0), inB(model.size(), 0);
  for (auto j : A) inA[j] = 1;
  for (auto j : B) inB[j] = 1;
  const std::size_t n = model.size();
  const std::size_t per = std::max<std::size_t>(1, samples / n);
  std::vector<double> wA(n, 0.0), wB(n, 0.0);
  std::vector<std::size_t> cA(n, 0), cB(n, 0), used(n, 0);
  const bool one_d = model.partition.one_dimensional;
  parallel_for(n, [&](std::size_t j) {
    if (!(model.cell_mass[j] > 0)) return;
    auto pts = stratified_samples(model.partition.cells[j], one_d, per, mix_seed(seed, j));
    std::size_t inside = 0;
    for (cplx p : pts) {
      if (!one_d && contains(rm.base, p) != Containment::inside) continue;
      ++inside;
      cplx z = p;
      if (!iterate_return(map, rm, z, k)) continue;
      long c = image_cell(model.partition, z);
      if (c < 0) continue;
      ++used[j];
      if (inA[c]) ++cA[j];
      if (inB[c]) ++cB[j];
    }
    if (inside == 0) return;
    wA[j] = model.cell_mass[j] * double(cA[j]) / inside;
    wB[j] = model.cell_mass[j] * double(cB[j]) / inside;
  });
  double pa = pairwise_sum(wA.data(), n), pb = pairwise_sum(wB.data(), n);
  std::size_t na = 0, nb = 0, total = 0;
  for (std::size_t j = 0; j < n; ++j) {
    na += cA[j];
    nb += cB[j];
    total += used[j];
  }
  if (na < 10 || nb < 10 || total == 0) {
    out.inconclusive = true;
    return out;
  }
  out.ratio = (pa / pb) / (mA / mB);
  // 3 sigma binomial relative errors of both counts
  double fa = double(na) / total, fb = double(nb) / total;
  double rel = std::sqrt((1 - fa) / na + (1 - fb) / nb);
  out.margin = std::exp(3.0 * rel);
  double hi = out.bound * out.margin;
  out.pass = out.ratio <= hi && out.ratio >= 1.0 / hi;
  return out;
}

DistortionReport folklore_distortion_suite(const DynamicalMap& map, const ReturnMap& rm, const UlamModel& model,
                                           const std::vector<int>& ks, std::size_t pairs, std::size_t samples,
                                           std::uint64_t seed, double t) {
  DistortionReport rep;
  rep.C = rm.max_distortion();
  std::mt19937_64 rng(seed);
  std::bernoulli_distribution coin(0.5);
  std::vector<std::size_t> live;
  for (std::size_t j = 0; j < model.size(); ++j)
    if (model.cell_mass[j] > 0) live.push_back(j);
  if (live.size() < 2) throw Error("invalid parameters", "too few cells for distortion trials");
  std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
  for (int k : ks)
    for (std::size_t p = 0; p < pairs; ++p) {
      std::vector<std::size_t> A, B;
      for (auto j : live) {
        if (coin(rng)) A.push_back(j);
        if (coin(rng)) B.push_back(j);
      }
      if (A.empty()) A.push_back(live[pick(rng)]);
      if (B.empty()) B.push_back(live[pick(rng)]);
      auto trial = folklore_distortion_check(map, rm, model, A, B, k, samples, rng(), t);
      if (trial.inconclusive) ++rep.inconclusive;
      else if (!trial.pass) ++rep.violations;
      rep.trials.push_back(trial);
    }
  return rep;
}

std::string to_string(Finiteness v) {
  switch (v) {
    case Finiteness::finite: return "finite";
    case Finiteness::divergent: return "divergent";
    default: return "inconclusive";
  }
}

SpreadMassEstimate spread_mass(const std::vector<int>& return_times, const std::vector<double>& nu,
                               int complete_depth) {
  if (return_times.size() != nu.size()) throw Error("invalid parameters", "return times and masses differ in size");
  SpreadMassEstimate out;
  double total = pairwise_sum(nu.data(), nu.size());
  if (!(total > 0)) throw Error("invalid parameters", "component masses sum to zero");
  std::map<int, double> shell;
  for (std::size_t j = 0; j < nu.size(); ++j) {
    double v = nu[j] / total;
    out.component_mass.push_back(v);
    out.contributions.push_back(return_times[j] * v);
    shell[return_times[j]] += v;
  }
  int deepest = shell.rbegin()->first;
  out.complete_depth = complete_depth > 0 ? complete_depth : deepest;
  double partial = 0.0;
  for (auto [r, mass] : shell) {
    if (mass <= 0) continue;
    partial += r * mass;
    out.shells.push_back({r, mass, r * mass, partial});
  }
  out.truncated_total = partial;
  out.total = partial;

  std::vector<const Shell*> fit;
  for (const auto& s : out.shells)
    if (s.return_time <= out.complete_depth) fit.push_back(&s);
  if (fit.size() < 5) {
    out.verdict = Finiteness::inconclusive;
    out.note = "fewer than 5 populated shells";
    return out;
  }
  fit.erase(fit.begin(), fit.end() - 5);
  bool nondecreasing = true;
  for (std::size_t i = 1; i < fit.size(); ++i)
    if (fit[i]->contribution < fit[i - 1]->contribution) nondecreasing = false;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (auto* s : fit) {
    double x = s->return_time, y = std::log(s->mass);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  double nf = double(fit.size());
  double slope = (nf * sxy - sx * sy) / (nf * sxx - sx * sx);
  double icpt = (sy - slope * sx) / nf;
  out.tail_ratio = std::exp(slope);
  out.tail_amplitude = std::exp(icpt);
  if (nondecreasing) {
    out.verdict = Finiteness::divergent;
    out.note = "shell contributions non-decreasing";
    return out;
  }
  double q = out.tail_ratio;
  if (!(q < 0.98)) {
    out.verdict = Finiteness::inconclusive;
    out.note = "fitted ratio too close to 1";
    return out;
  }
  const int N = out.complete_depth;
  double qn = std::pow(q, N + 1);
  out.tail_mass = out.tail_amplitude * qn / (1 - q);
  out.tail_contribution = out.tail_amplitude * qn * ((N + 1) - N * q) / ((1 - q) * (1 - q));
  out.total = (partial + out.tail_contribution) / (1 + out.tail_mass);
  out.verdict = Finiteness::finite;
  out.note = "geometric tail fitted over the last 5 shells";
  return out;
}

SpreadMassEstimate spread_mass(const InducedDensity& density, const UlamModel& model, const ReturnMap& rm) {
  std::vector<double> nu = component_masses(model, density, rm);
  std::vector<int> times;
  for (const auto& c : rm.components) times.push_back(c.return_time);
  int complete = rm.cap_hit ? rm.depth_reached : rm.caps.t_max;
  return spread_mass(times, nu, complete);
}

TailReport density_tail_check(const DynamicalMap& map, cplx pole, int order, double c0, double r0, double r1,
                              double t, std::size_t samples, double capture) {
  if (order < 1) throw Error("invalid parameters", "pole order must be at least 1");
  if (!(r0 > 0) || !(r1 > r0)) throw Error("invalid parameters", "radii must satisfy 0 < r0 < r1");
  if (!(c0 > 0)) throw Error("invalid parameters", "density floor must be positive");
  TailReport rep;
  rep.pole = pole;
  rep.order = order;
  rep.t = t;
  rep.exponent = t + t / order;
  rep.c0 = c0;
  rep.samples.resize(std::max<std::size_t>(samples, 2));
  const std::size_t n = rep.samples.size();
  const double golden = 0.5 * (std::sqrt(5.0) - 1.0);
  BranchWindow window{Disk{pole, capture}, std::nullopt};
  parallel_for(n, [&](std::size_t i) {
    TailSample& s = rep.samples[i];
    s.modulus = r0 * std::pow(r1 / r0, double(i) / double(n - 1));
    double theta = 2 * std::numbers::pi * std::fmod(i * golden, 1.0);
    s.w = std::polar(s.modulus, theta);
    auto pre = map.preimages(s.w, window);
    double best = kInf;
    for (auto& [z, id] : pre)
      if (std::abs(z - pole) < best) {
        best = std::abs(z - pole);
        s.preimage = z;
      }
    if (!(best <= capture))
      throw Error("no preimage near pole", "no preimage of |w| = " + std::to_string(s.modulus) + " near the pole");
    double df = std::abs(map.derivative(s.preimage));
    s.rho_bound = c0 / std::pow(df, t);
    s.scaled = s.rho_bound * std::pow(s.modulus, rep.exponent);
  });
  rep.c = kInf;
  for (const auto& s : rep.samples) {
    rep.c = std::min(rep.c, s.scaled);
    rep.c_max = std::max(rep.c_max, s.scaled);
  }
  rep.variation = rep.c > 0 ? rep.c_max / rep.c : kInf;
  return rep;
}

}  // namespace nicedyn
