#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "wfldp/core_model.hpp"

namespace wfldp {

/// Time-discretized simplex-valued path, piecewise-linear between knots.
/// Knots are stored row-major (M+1) x n.
class PathGrid {
 public:
  PathGrid(std::vector<double> times, std::size_t n, std::vector<double> knots);
  PathGrid(std::vector<double> times, const std::vector<SimplexPoint>& knots);

  /// Uniform grid on [0, T] with M intervals; knot(k) = f(t_k).
  template <class F>
  static PathGrid sample(double T, std::size_t M, std::size_t n, F&& f);

  std::size_t intervals() const noexcept { return times_.size() - 1; }
  std::size_t knot_count() const noexcept { return times_.size(); }
  std::size_t dimension() const noexcept { return n_; }
  double time(std::size_t k) const noexcept { return times_[k]; }
  double horizon() const noexcept { return times_.back(); }
  const std::vector<double>& times() const noexcept { return times_; }

  std::span<const double> knot(std::size_t k) const noexcept { return {knots_.data() + k * n_, n_}; }
  SimplexPoint point(std::size_t k) const;
  const std::vector<double>& data() const noexcept { return knots_; }

  friend bool operator==(const PathGrid&, const PathGrid&) = default;

 private:
  std::vector<double> times_;
  std::size_t n_;
  std::vector<double> knots_;
};

template <class F>
PathGrid PathGrid::sample(double T, std::size_t M, std::size_t n, F&& f) {
  std::vector<double> times(M + 1), knots((M + 1) * n);
  for (std::size_t k = 0; k <= M; ++k) {
    times[k] = k == M ? T : T * static_cast<double>(k) / static_cast<double>(M);
    const SimplexPoint x = f(times[k]);
    if (x.size() != n) throw DimensionError("PathGrid::sample: knot of wrong dimension");
    for (std::size_t i = 0; i < n; ++i) knots[k * n + i] = x[i];
  }
  return PathGrid(std::move(times), n, std::move(knots));
}

// CSV schema: header "t,x_1,...,x_n", one row per knot, 17 significant digits.
void write_path_csv(std::ostream& os, const PathGrid& path);
void write_path_csv(const std::filesystem::path& file, const PathGrid& path);
PathGrid read_path_csv(std::istream& is);
PathGrid read_path_csv(const std::filesystem::path& file);

/// Formats a double with 17 significant digits (round-trip exact).
std::string format_double(double v);

}  // namespace wfldp
