#pragma once

// Probability measures on [0,1] made of atoms and piecewise-constant
// densities, their projections onto finite interval partitions, and the
// partition-projected entropies and path rates.

#include <cstddef>
#include <optional>
#include <vector>

#include "wfldp/core_model.hpp"

namespace wfldp {

struct Atom {
  double location;
  double mass;
};

struct DensityPiece {
  double left;
  double right;
  double height;  // mass per unit length
};

class MeasureOnUnitInterval {
 public:
  MeasureOnUnitInterval(std::vector<Atom> atoms, std::vector<DensityPiece> density);

  static MeasureOnUnitInterval lebesgue();
  static MeasureOnUnitInterval point_mass(double location);
  /// Density heights[j] on [breaks[j], breaks[j+1]]; breaks run from 0 to 1.
  static MeasureOnUnitInterval piecewise(const std::vector<double>& breaks, const std::vector<double>& heights);

  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<DensityPiece>& density() const noexcept { return density_; }

  /// Density height at z (right-continuous at piece boundaries).
  double height_at(double z) const;
  /// Atom locations and density breakpoints strictly inside (0,1).
  std::vector<double> structural_breakpoints() const;

 private:
  std::vector<Atom> atoms_;          // sorted by location
  std::vector<DensityPiece> density_;  // sorted, non-overlapping, zero heights dropped
};

/// Cells [0,t_1], (t_1,t_2], ..., (t_k,1].
class Partition {
 public:
  Partition() = default;
  explicit Partition(std::vector<double> breakpoints);
  static Partition dyadic(unsigned level);

  const std::vector<double>& breakpoints() const noexcept { return t_; }
  std::size_t cells() const noexcept { return t_.size() + 1; }
  double cell_left(std::size_t j) const noexcept { return j == 0 ? 0.0 : t_[j - 1]; }
  double cell_right(std::size_t j) const noexcept { return j == t_.size() ? 1.0 : t_[j]; }
  /// Cell index holding the point z.
  std::size_t cell_of(double z) const;
  /// Every breakpoint of this partition is one of `finer`'s.
  bool coarser_than(const Partition& finer) const;

  friend bool operator==(const Partition&, const Partition&) = default;

 private:
  std::vector<double> t_;
};

/// Cell masses (mu(B_1), ..., mu(B_r)). The trivial partition gives {1}.
std::vector<double> project(const MeasureOnUnitInterval& mu, const Partition& part);
/// Same as a SimplexPoint; needs at least two cells.
SimplexPoint project_point(const MeasureOnUnitInterval& mu, const Partition& part);

Partition refine(const Partition& a, const Partition& b);

/// Sums the cells of `fine` (a refinement of `coarse`) into coarse cells.
std::vector<double> aggregate(const std::vector<double>& fine_masses, const Partition& fine,
                              const Partition& coarse);

/// sum_j q_j log(q_j / r_j); +inf when some r_j = 0 < q_j.
double discrete_entropy(const std::vector<double>& q, const std::vector<double>& r);

/// H(mu|nu) computed from the representations; +inf when mu is not
/// absolutely continuous with respect to nu.
double relative_entropy_closed_form(const MeasureOnUnitInterval& mu, const MeasureOnUnitInterval& nu);

struct EntropyLevel {
  unsigned level;
  std::size_t cells;
  double value;
};

struct EntropyTable {
  std::vector<EntropyLevel> levels;
  double closed_form;
};

/// H(pi_k mu | pi_k nu) for dyadic levels k = 0..max_level. With
/// `structural` the level-k partition also contains both measures'
/// structural breakpoints, so the table is nested and sufficiency is reached
/// at a finite level.
EntropyTable entropy_by_refinement(const MeasureOnUnitInterval& mu, const MeasureOnUnitInterval& nu,
                                   unsigned max_level, bool structural = true);

/// Projects nu0 and every path value through `part` and evaluates the
/// neutral action of the finite-allele path with p = pi(nu0). +inf when
/// some projected cell mass vanishes.
double projected_path_rate(double theta, const MeasureOnUnitInterval& nu0,
                           const std::vector<MeasureOnUnitInterval>& path, const std::vector<double>& times,
                           const Partition& part);

struct RateLevel {
  unsigned level;
  std::size_t cells;
  double rate;
};

/// projected_path_rate over dyadic levels 1..max_level, each merged with the
/// structural breakpoints of nu0 and of every path value when `structural`.
std::vector<RateLevel> projected_rate_by_level(double theta, const MeasureOnUnitInterval& nu0,
                                               const std::vector<MeasureOnUnitInterval>& path,
                                               const std::vector<double>& times, unsigned max_level,
                                               bool structural = false);

}  // namespace wfldp
