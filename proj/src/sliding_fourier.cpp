#include "harmonic/sliding_fourier.hpp"

#include <cmath>

namespace harmonic {

namespace {

int steps_per_period(double period, double step) {
  if (!(step > 0.0)) throw ConfigError("sliding_fourier: step must be positive");
  const double ratio = period / step;
  const double rounded = std::round(ratio);
  if (rounded < 1.0 || std::abs(ratio - rounded) > 1e-9 * ratio) {
    throw ConfigError("sliding_fourier: grid step must divide the period");
  }
  return static_cast<int>(rounded);
}

}  // namespace

PhasorTrajectory sliding_fourier(const SampledTrajectory& x, double period, int m) {
  if (m < 0) throw ConfigError("sliding_fourier: negative truncation order");
  if (x.samples.empty()) throw ConfigError("sliding_fourier: empty trajectory");
  const int per = steps_per_period(period, x.step);
  const int n = static_cast<int>(x.samples.front().size());
  const int width = 2 * m + 1;
  const double omega = omega_of(period);

  PhasorTrajectory out;
  out.n = n;
  out.m = m;
  out.period = period;
  out.t0 = x.t0;
  out.step = x.step;
  out.samples.assign(x.samples.size(), VectorXcd::Zero(n * width));
  out.available.assign(x.samples.size(), false);

  for (std::size_t s = static_cast<std::size_t>(per); s < x.samples.size(); ++s) {
    VectorXcd acc = VectorXcd::Zero(n * width);
    for (int q = 0; q <= per; ++q) {
      const std::size_t idx = s - per + q;
      const double weight = (q == 0 || q == per) ? 0.5 : 1.0;
      const double tau = x.time(idx);
      const cplx z = std::polar(1.0, -omega * tau);
      cplx zk = 1.0;
      for (int i = 0; i < n; ++i) acc(i * width + m) += weight * x.samples[idx](i);
      for (int k = 1; k <= m; ++k) {
        zk *= z;
        for (int i = 0; i < n; ++i) {
          const double xi = weight * x.samples[idx](i);
          acc(i * width + m + k) += zk * xi;
          acc(i * width + m - k) += std::conj(zk) * xi;
        }
      }
    }
    out.samples[s] = acc / static_cast<double>(per);
    out.available[s] = true;
  }
  return out;
}

Reconstruction reconstruct(const PhasorTrajectory& X, std::size_t s) {
  if (s >= X.samples.size() || !X.available[s]) {
    throw ConfigError("reconstruct: phasors unavailable at the requested sample");
  }
  const int width = 2 * X.m + 1;
  const double omega = omega_of(X.period);
  const double t = X.time(s);

  VectorXcd sum = VectorXcd::Zero(X.n);
  for (int p = -X.m; p <= X.m; ++p) {
    const cplx e = std::polar(1.0, omega * p * t);
    for (int i = 0; i < X.n; ++i) sum(i) += X.samples[s](i * width + p + X.m) * e;
  }

  const bool has_prev = s > 0 && X.available[s - 1];
  const bool has_next = s + 1 < X.samples.size() && X.available[s + 1];
  VectorXcd d0 = VectorXcd::Zero(X.n);
  Reconstruction out;
  if (has_prev || has_next) {
    const std::size_t lo = has_prev ? s - 1 : s;
    const std::size_t hi = has_next ? s + 1 : s;
    const double span = X.step * static_cast<double>(hi - lo);
    for (int i = 0; i < X.n; ++i) {
      d0(i) = (X.samples[hi](i * width + X.m) - X.samples[lo](i * width + X.m)) / span;
    }
    out.lower_accuracy = !(has_prev && has_next);
  } else {
    out.lower_accuracy = true;
  }
  const VectorXcd x = sum + 0.5 * X.period * d0;
  out.value = x.real();
  out.imag_residue = x.size() ? x.imag().cwiseAbs().maxCoeff() : 0.0;
  return out;
}

double coincidence_defect(const PhasorTrajectory& X) {
  const int width = 2 * X.m + 1;
  const double omega = omega_of(X.period);
  double worst = 0.0;
  for (std::size_t s = 1; s + 1 < X.samples.size(); ++s) {
    if (!X.available[s - 1] || !X.available[s + 1]) continue;
    const double t = X.time(s);
    for (int i = 0; i < X.n; ++i) {
      const cplx d0 = (X.samples[s + 1](i * width + X.m) - X.samples[s - 1](i * width + X.m)) /
                      (2.0 * X.step);
      for (int k = -X.m; k <= X.m; ++k) {
        const cplx dk = (X.samples[s + 1](i * width + X.m + k) -
                         X.samples[s - 1](i * width + X.m + k)) /
                        (2.0 * X.step);
        worst = std::max(worst, std::abs(dk - d0 * std::polar(1.0, -omega * k * t)));
      }
    }
  }
  return worst;
}

}  // namespace harmonic
