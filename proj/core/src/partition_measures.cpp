#include "wfldp/partition_measures.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "wfldp/path_action.hpp"
#include "wfldp/path_grid.hpp"

namespace wfldp {

MeasureOnUnitInterval::MeasureOnUnitInterval(std::vector<Atom> atoms, std::vector<DensityPiece> density) {
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.location >= 0.0 && a.location <= 1.0)) throw DomainError("measure: atom location outside [0,1]");
    if (!(a.mass > 0.0) || !std::isfinite(a.mass)) throw DomainError("measure: atom mass must be positive");
    total += a.mass;
  }
  std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.location < y.location; });
  for (std::size_t i = 1; i < atoms.size(); ++i) {
    if (atoms[i].location == atoms[i - 1].location) throw DomainError("measure: duplicate atom location");
  }
  for (const DensityPiece& d : density) {
    if (!(d.left >= 0.0 && d.right <= 1.0 && d.left < d.right))
      throw DomainError("measure: density piece must satisfy 0 <= left < right <= 1");
    if (!(d.height >= 0.0) || !std::isfinite(d.height)) throw DomainError("measure: negative density height");
  }
  std::erase_if(density, [](const DensityPiece& d) { return d.height == 0.0; });
  std::sort(density.begin(), density.end(), [](const DensityPiece& x, const DensityPiece& y) { return x.left < y.left; });
  for (std::size_t i = 0; i < density.size(); ++i) {
    if (i > 0 && density[i].left < density[i - 1].right) throw DomainError("measure: overlapping density pieces");
    total += density[i].height * (density[i].right - density[i].left);
  }
  if (std::abs(total - 1.0) > 1e-12) throw DomainError("measure: total mass " + format_double(total) + " is not 1");
  atoms_ = std::move(atoms);
  density_ = std::move(density);
}

MeasureOnUnitInterval MeasureOnUnitInterval::lebesgue() { return MeasureOnUnitInterval({}, {{0.0, 1.0, 1.0}}); }

MeasureOnUnitInterval MeasureOnUnitInterval::point_mass(double location) {
  return MeasureOnUnitInterval({{location, 1.0}}, {});
}

MeasureOnUnitInterval MeasureOnUnitInterval::piecewise(const std::vector<double>& breaks,
                                                       const std::vector<double>& heights) {
  if (breaks.size() != heights.size() + 1 || breaks.front() != 0.0 || breaks.back() != 1.0)
    throw DomainError("measure: piecewise needs breaks 0 = b_0 < ... < b_k = 1 and k heights");
  std::vector<DensityPiece> d;
  for (std::size_t j = 0; j < heights.size(); ++j) d.push_back({breaks[j], breaks[j + 1], heights[j]});
  return MeasureOnUnitInterval({}, std::move(d));
}

double MeasureOnUnitInterval::height_at(double z) const {
  for (const DensityPiece& d : density_) {
    if (z >= d.left && (z < d.right || (d.right == 1.0 && z == 1.0))) return d.height;
  }
  return 0.0;
}

std::vector<double> MeasureOnUnitInterval::structural_breakpoints() const {
  std::set<double> s;
  for (const Atom& a : atoms_) s.insert(a.location);
  for (const DensityPiece& d : density_) {
    s.insert(d.left);
    s.insert(d.right);
  }
  std::vector<double> out;
  for (double v : s) {
    if (v > 0.0 && v < 1.0) out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------

Partition::Partition(std::vector<double> breakpoints) : t_(std::move(breakpoints)) {
  for (std::size_t i = 0; i < t_.size(); ++i) {
    if (!(t_[i] > 0.0 && t_[i] < 1.0)) throw DomainError("Partition: breakpoints must lie in (0,1)");
    if (i > 0 && !(t_[i] > t_[i - 1])) throw DomainError("Partition: breakpoints must be strictly increasing");
  }
}

Partition Partition::dyadic(unsigned level) {
  if (level > 30) throw DomainError("Partition::dyadic: level too large");
  const std::size_t cells = std::size_t{1} << level;
  std::vector<double> t;
  for (std::size_t j = 1; j < cells; ++j) t.push_back(std::ldexp(static_cast<double>(j), -static_cast<int>(level)));
  return Partition(std::move(t));
}

std::size_t Partition::cell_of(double z) const {
  // first breakpoint >= z; cells are right-closed
  return static_cast<std::size_t>(std::lower_bound(t_.begin(), t_.end(), z) - t_.begin());
}

bool Partition::coarser_than(const Partition& finer) const {
  return std::includes(finer.t_.begin(), finer.t_.end(), t_.begin(), t_.end());
}

std::vector<double> project(const MeasureOnUnitInterval& mu, const Partition& part) {
  std::vector<double> q(part.cells(), 0.0);
  for (const Atom& a : mu.atoms()) q[part.cell_of(a.location)] += a.mass;
  const auto& t = part.breakpoints();
  for (const DensityPiece& d : mu.density()) {
    // cells overlapping [left, right]
    std::size_t j = static_cast<std::size_t>(std::upper_bound(t.begin(), t.end(), d.left) - t.begin());
    for (; j < part.cells(); ++j) {
      const double lo = std::max(d.left, part.cell_left(j));
      const double hi = std::min(d.right, part.cell_right(j));
      if (hi > lo) q[j] += d.height * (hi - lo);
      if (part.cell_right(j) >= d.right) break;
    }
  }
  return q;
}

SimplexPoint project_point(const MeasureOnUnitInterval& mu, const Partition& part) {
  if (part.cells() < 2) throw DimensionError("project_point: the trivial partition has one cell");
  return SimplexPoint(project(mu, part));
}

Partition refine(const Partition& a, const Partition& b) {
  std::vector<double> u;
  std::set_union(a.breakpoints().begin(), a.breakpoints().end(), b.breakpoints().begin(), b.breakpoints().end(),
                 std::back_inserter(u));
  return Partition(std::move(u));
}

std::vector<double> aggregate(const std::vector<double>& fine_masses, const Partition& fine,
                              const Partition& coarse) {
  if (fine_masses.size() != fine.cells()) throw DimensionError("aggregate: mass vector does not match partition");
  if (!coarse.coarser_than(fine)) throw DomainError("aggregate: partition is not a refinement");
  std::vector<double> out(coarse.cells(), 0.0);
  for (std::size_t j = 0; j < fine.cells(); ++j) out[coarse.cell_of(fine.cell_right(j))] += fine_masses[j];
  return out;
}

double discrete_entropy(const std::vector<double>& q, const std::vector<double>& r) {
  if (q.size() != r.size()) throw DimensionError("discrete_entropy: size mismatch");
  double h = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q[j] == 0.0) continue;
    if (r[j] == 0.0) return kInfinity;
    h += q[j] * std::log(q[j] / r[j]);
  }
  return std::max(h, 0.0);
}

double relative_entropy_closed_form(const MeasureOnUnitInterval& mu, const MeasureOnUnitInterval& nu) {
  double h = 0.0;
  for (const Atom& a : mu.atoms()) {
    auto it = std::find_if(nu.atoms().begin(), nu.atoms().end(),
                           [&](const Atom& b) { return b.location == a.location; });
    if (it == nu.atoms().end()) return kInfinity;
    h += a.mass * std::log(a.mass / it->mass);
  }
  std::set<double> cuts = {0.0, 1.0};
  for (const auto* m : {&mu, &nu}) {
    for (const DensityPiece& d : m->density()) {
      cuts.insert(d.left);
      cuts.insert(d.right);
    }
  }
  const std::vector<double> c(cuts.begin(), cuts.end());
  for (std::size_t j = 0; j + 1 < c.size(); ++j) {
    const double mid = 0.5 * (c[j] + c[j + 1]);
    const double f = mu.height_at(mid);
    if (f == 0.0) continue;
    const double g = nu.height_at(mid);
    if (g == 0.0) return kInfinity;
    h += (c[j + 1] - c[j]) * f * std::log(f / g);
  }
  return std::max(h, 0.0);
}

EntropyTable entropy_by_refinement(const MeasureOnUnitInterval& mu, const MeasureOnUnitInterval& nu,
                                   unsigned max_level, bool structural) {
  Partition extra;
  if (structural) extra = refine(Partition(mu.structural_breakpoints()), Partition(nu.structural_breakpoints()));
  EntropyTable table{{}, relative_entropy_closed_form(mu, nu)};
  for (unsigned k = 0; k <= max_level; ++k) {
    const Partition part = refine(Partition::dyadic(k), extra);
    table.levels.push_back({k, part.cells(), discrete_entropy(project(mu, part), project(nu, part))});
  }
  return table;
}

double projected_path_rate(double theta, const MeasureOnUnitInterval& nu0,
                           const std::vector<MeasureOnUnitInterval>& path, const std::vector<double>& times,
                           const Partition& part) {
  if (path.size() != times.size() || path.size() < 2)
    throw DimensionError("projected_path_rate: need one measure per time, at least two");
  if (part.cells() < 2) return 0.0;  // one-point simplex: nothing can move
  const std::vector<double> p = project(nu0, part);
  if (std::any_of(p.begin(), p.end(), [](double v) { return v == 0.0; })) return kInfinity;
  std::vector<double> knots;
  knots.reserve(path.size() * part.cells());
  for (const auto& m : path) {
    const auto q = project(m, part);
    if (std::any_of(q.begin(), q.end(), [](double v) { return v == 0.0; })) return kInfinity;
    knots.insert(knots.end(), q.begin(), q.end());
  }
  // gamma does not enter the action; 1 is a placeholder.
  const ModelParams params(theta, SimplexPoint(p), 1.0);
  return action_neutral(params, PathGrid(times, part.cells(), std::move(knots)));
}

std::vector<RateLevel> projected_rate_by_level(double theta, const MeasureOnUnitInterval& nu0,
                                               const std::vector<MeasureOnUnitInterval>& path,
                                               const std::vector<double>& times, unsigned max_level,
                                               bool structural) {
  Partition extra;
  if (structural) {
    extra = Partition(nu0.structural_breakpoints());
    for (const auto& m : path) extra = refine(extra, Partition(m.structural_breakpoints()));
  }
  std::vector<RateLevel> out;
  for (unsigned k = 1; k <= max_level; ++k) {
    const Partition part = refine(Partition::dyadic(k), extra);
    out.push_back({k, part.cells(), projected_path_rate(theta, nu0, path, times, part)});
  }
  return out;
}

}  // namespace wfldp
