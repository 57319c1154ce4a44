#include "wfldp/path_grid.hpp"

#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace wfldp {

PathGrid::PathGrid(std::vector<double> times, std::size_t n, std::vector<double> knots)
    : times_(std::move(times)), n_(n), knots_(std::move(knots)) {
  if (times_.size() < 2) throw DomainError("PathGrid: need at least 2 knots");
  if (knots_.size() != times_.size() * n_) throw DimensionError("PathGrid: knot storage size mismatch");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw DomainError("PathGrid: times must be strictly increasing");
  }
  // Canonicalize every knot through SimplexPoint.
  for (std::size_t k = 0; k < times_.size(); ++k) {
    SimplexPoint x(std::vector<double>(knots_.begin() + static_cast<long>(k * n_),
                                       knots_.begin() + static_cast<long>((k + 1) * n_)));
    std::copy(x.weights().begin(), x.weights().end(), knots_.begin() + static_cast<long>(k * n_));
  }
}

PathGrid::PathGrid(std::vector<double> times, const std::vector<SimplexPoint>& knots)
    : times_(std::move(times)), n_(knots.empty() ? 0 : knots.front().size()) {
  if (knots.size() != times_.size()) throw DimensionError("PathGrid: times/knots length mismatch");
  knots_.reserve(knots.size() * n_);
  for (const auto& x : knots) {
    if (x.size() != n_) throw DimensionError("PathGrid: knots of unequal dimension");
    knots_.insert(knots_.end(), x.weights().begin(), x.weights().end());
  }
  if (times_.size() < 2) throw DomainError("PathGrid: need at least 2 knots");
  for (std::size_t k = 1; k < times_.size(); ++k) {
    if (!(times_[k] > times_[k - 1])) throw DomainError("PathGrid: times must be strictly increasing");
  }
}

SimplexPoint PathGrid::point(std::size_t k) const {
  auto s = knot(k);
  return SimplexPoint(std::vector<double>(s.begin(), s.end()));
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_path_csv(std::ostream& os, const PathGrid& path) {
  os << "t";
  for (std::size_t i = 0; i < path.dimension(); ++i) os << ",x_" << (i + 1);
  os << '\n';
  for (std::size_t k = 0; k < path.knot_count(); ++k) {
    os << format_double(path.time(k));
    for (double v : path.knot(k)) os << ',' << format_double(v);
    os << '\n';
  }
}

void write_path_csv(const std::filesystem::path& file, const PathGrid& path) {
  std::ofstream os(file);
  if (!os) throw std::runtime_error("cannot open " + file.string() + " for writing");
  write_path_csv(os, path);
}

PathGrid read_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw DomainError("path CSV: empty input");
  std::size_t n = 0;
  {
    std::stringstream hs(line);
    std::string col;
    std::getline(hs, col, ',');
    if (col != "t") throw DomainError("path CSV: first header column must be 't'");
    while (std::getline(hs, col, ',')) {
      if (col != "x_" + std::to_string(n + 1)) throw DomainError("path CSV: bad header column '" + col + "'");
      ++n;
    }
  }
  if (n < 2) throw DomainError("path CSV: need at least two state columns");
  std::vector<double> times, knots;
  std::size_t row = 1;
  while (std::getline(is, line)) {
    ++row;
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string cell;
    std::vector<double> vals;
    while (std::getline(ls, cell, ',')) {
      try {
        std::size_t used = 0;
        vals.push_back(std::stod(cell, &used));
        if (used != cell.size()) throw std::invalid_argument(cell);
      } catch (const std::exception&) {
        throw DomainError("path CSV: unparsable number on row " + std::to_string(row));
      }
    }
    if (vals.size() != n + 1) throw DimensionError("path CSV: wrong column count on row " + std::to_string(row));
    times.push_back(vals[0]);
    knots.insert(knots.end(), vals.begin() + 1, vals.end());
  }
  return PathGrid(std::move(times), n, std::move(knots));
}

PathGrid read_path_csv(const std::filesystem::path& file) {
  std::ifstream is(file);
  if (!is) throw std::runtime_error("cannot open " + file.string());
  return read_path_csv(is);
}

}  // namespace wfldp
