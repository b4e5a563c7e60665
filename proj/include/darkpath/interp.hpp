#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace darkpath {

/// Piecewise cubic Hermite interpolant on an ascending abscissa grid. Node
/// slopes are either supplied or estimated by three-point differences.
class CubicHermite {
 public:
  CubicHermite() = default;
  CubicHermite(std::vector<double> x, std::vector<double> y,
               std::vector<double> slope = {})
      : x_(std::move(x)), y_(std::move(y)), m_(std::move(slope)) {
    if (x_.size() < 2 || x_.size() != y_.size())
      throw std::invalid_argument("CubicHermite: need matching grids, size >= 2");
    if (m_.empty()) {
      m_.resize(x_.size());
      const size_t n = x_.size();
      m_[0] = (y_[1] - y_[0]) / (x_[1] - x_[0]);
      m_[n - 1] = (y_[n - 1] - y_[n - 2]) / (x_[n - 1] - x_[n - 2]);
      for (size_t i = 1; i + 1 < n; ++i)
        m_[i] = (y_[i + 1] - y_[i - 1]) / (x_[i + 1] - x_[i - 1]);
    } else if (m_.size() != x_.size()) {
      throw std::invalid_argument("CubicHermite: slope grid size mismatch");
    }
  }

  double operator()(double t) const { return eval(t).first; }
  double derivative(double t) const { return eval(t).second; }

  std::pair<double, double> eval(double t) const {
    const size_t i = segment(t);
    const double h = x_[i + 1] - x_[i];
    const double u = (t - x_[i]) / h;
    const double u2 = u * u, u3 = u2 * u;
    const double value = (2 * u3 - 3 * u2 + 1) * y_[i] + (u3 - 2 * u2 + u) * h * m_[i] +
                         (-2 * u3 + 3 * u2) * y_[i + 1] + (u3 - u2) * h * m_[i + 1];
    const double deriv = ((6 * u2 - 6 * u) * y_[i] + (3 * u2 - 4 * u + 1) * h * m_[i] +
                          (-6 * u2 + 6 * u) * y_[i + 1] + (3 * u2 - 2 * u) * h * m_[i + 1]) /
                         h;
    return {value, deriv};
  }

  double front() const { return x_.front(); }
  double back() const { return x_.back(); }

 private:
  size_t segment(double t) const {
    auto it = std::upper_bound(x_.begin(), x_.end(), t);
    long i = std::distance(x_.begin(), it) - 1;
    i = std::clamp<long>(i, 0, static_cast<long>(x_.size()) - 2);
    return static_cast<size_t>(i);
  }

  std::vector<double> x_, y_, m_;
};

}  // namespace darkpath
