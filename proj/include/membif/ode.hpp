#pragma once

// Adaptive explicit Runge-Kutta integration (DOP853) with a global 7th-order
// dense output and event location on that dense output.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <vector>

#include "membif/dop853_tableau.hpp"
#include "membif/error.hpp"

namespace membif::ode {

template <std::size_t N>
using Vec = std::array<double, N>;

struct Tolerances {
  double rtol = 1e-10;
  double atol = 1e-12;
};

struct StepControl {
  double max_step = std::numeric_limits<double>::infinity();
  double first_step = 0.0;  // 0 selects automatically
  std::size_t max_steps = 2'000'000;
  double event_tol = 1e-14;  // absolute, in the independent variable
};

template <std::size_t N>
struct Event {
  std::function<double(double, const Vec<N>&)> g;
  int direction = 0;  // +1 rising, -1 falling, 0 either
  // Optional filter: a located root is ignored unless this returns true.
  std::function<bool(double, const Vec<N>&)> accept;
};

/// One accepted step of the integrator together with its interpolant.
template <std::size_t N>
struct Segment {
  double t0 = 0.0;
  double h = 0.0;
  Vec<N> y0{};
  std::array<Vec<N>, 7> F{};

  Vec<N> eval(double t) const {
    const double x = (t - t0) / h;
    Vec<N> y{};
    for (int i = 0; i < 7; ++i) {
      const auto& f = F[6 - i];
      const double m = (i % 2 == 0) ? x : 1.0 - x;
      for (std::size_t k = 0; k < N; ++k) y[k] = (y[k] + f[k]) * m;
    }
    for (std::size_t k = 0; k < N; ++k) y[k] += y0[k];
    return y;
  }
};

template <std::size_t N>
class DenseTrajectory {
 public:
  DenseTrajectory() = default;

  bool empty() const { return segments_.empty(); }
  double t_begin() const { return segments_.front().t0; }
  double t_end() const { return t_end_; }
  const Vec<N>& y_end() const { return y_end_; }
  std::size_t steps() const { return segments_.size(); }

  /// Step boundaries, including both ends.
  std::vector<double> knots() const {
    std::vector<double> k;
    k.reserve(segments_.size() + 1);
    for (const auto& s : segments_) k.push_back(s.t0);
    k.push_back(t_end_);
    return k;
  }

  Vec<N> operator()(double t) const {
    if (segments_.empty()) throw Error(ErrorKind::OutOfRange, "empty trajectory");
    const double span = std::abs(t_end_ - t_begin());
    const double slack = 64 * std::numeric_limits<double>::epsilon() * std::max(1.0, span);
    if (t < t_begin() - slack || t > t_end_ + slack) {
      throw Error(ErrorKind::OutOfRange, "evaluation outside integrated interval");
    }
    if (t >= t_end_) return y_end_;
    auto it = std::upper_bound(segments_.begin(), segments_.end(), t,
                               [](double v, const Segment<N>& s) { return v < s.t0; });
    if (it != segments_.begin()) --it;
    return it->eval(t);
  }

  void push(const Segment<N>& s, double t_end, const Vec<N>& y_end) {
    segments_.push_back(s);
    t_end_ = t_end;
    y_end_ = y_end;
  }

  void truncate(double t_end, const Vec<N>& y_end) {
    t_end_ = t_end;
    y_end_ = y_end;
  }

 private:
  std::vector<Segment<N>> segments_;
  double t_end_ = 0.0;
  Vec<N> y_end_{};
};

enum class Status { ReachedEnd, EventHit, StepTooSmall, NonFinite, TooManySteps };

template <std::size_t N>
struct Solution {
  DenseTrajectory<N> trajectory;
  Status status = Status::ReachedEnd;
  int event = -1;  // index of the event that stopped the integration
};

namespace detail {

template <std::size_t N>
double rms_norm(const Vec<N>& v, const Vec<N>& scale) {
  double s = 0.0;
  for (std::size_t k = 0; k < N; ++k) s += (v[k] / scale[k]) * (v[k] / scale[k]);
  return std::sqrt(s / N);
}

template <std::size_t N>
bool finite(const Vec<N>& v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

// Illinois-modified regula falsi on a bracketed sign change.
template <class G>
double locate_root(G&& g, double a, double ga, double b, double gb, double tol) {
  int side = 0;
  for (int it = 0; it < 200 && std::abs(b - a) > tol; ++it) {
    double c = (a * gb - b * ga) / (gb - ga);
    if (!(c > std::min(a, b) && c < std::max(a, b))) c = 0.5 * (a + b);
    const double gc = g(c);
    if (gc == 0.0) return c;
    if ((gc > 0) == (gb > 0)) {
      b = c;
      gb = gc;
      if (side == -1) ga *= 0.5;
      side = -1;
    } else {
      a = c;
      ga = gc;
      if (side == +1) gb *= 0.5;
      side = +1;
    }
  }
  return 0.5 * (a + b);
}

}  // namespace detail

/// Integrates y' = f(t, y) from t0 towards t_end (t_end > t0) until t_end or
/// the first accepted event.
template <std::size_t N, class Rhs>
Solution<N> integrate(Rhs&& f, double t0, const Vec<N>& y0, double t_end, const Tolerances& tol,
                      std::span<const Event<N>> events = {}, const StepControl& ctl = {}) {
  namespace tab = dop853;
  constexpr double kSafety = 0.9;
  constexpr double kMinFactor = 0.2;
  constexpr double kMaxFactor = 10.0;
  constexpr double kExponent = -1.0 / 8.0;

  Solution<N> sol;
  double t = t0;
  Vec<N> y = y0;
  Vec<N> fy = f(t, y);
  if (!detail::finite(fy)) {
    sol.status = Status::NonFinite;
    return sol;
  }

  auto scale_of = [&](const Vec<N>& a, const Vec<N>& b) {
    Vec<N> s;
    for (std::size_t k = 0; k < N; ++k) s[k] = tol.atol + tol.rtol * std::max(std::abs(a[k]), std::abs(b[k]));
    return s;
  };

  double h_abs = ctl.first_step;
  if (h_abs <= 0.0) {
    const auto sc = scale_of(y, y);
    const double d0 = detail::rms_norm(y, sc);
    const double d1 = detail::rms_norm(fy, sc);
    double h0 = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    h0 = std::min(h0, t_end - t0);
    Vec<N> y1;
    for (std::size_t k = 0; k < N; ++k) y1[k] = y[k] + h0 * fy[k];
    const Vec<N> f1 = f(t + h0, y1);
    Vec<N> df;
    for (std::size_t k = 0; k < N; ++k) df[k] = f1[k] - fy[k];
    const double d2 = detail::rms_norm(df, sc) / h0;
    const double h1 = (d1 <= 1e-15 && d2 <= 1e-15) ? std::max(1e-6, h0 * 1e-3)
                                                   : std::pow(0.01 / std::max(d1, d2), 1.0 / 8.0);
    h_abs = std::min(100 * h0, h1);
  }
  h_abs = std::min(h_abs, ctl.max_step);

  std::array<Vec<N>, tab::kStagesExtended> K{};
  std::vector<double> g_prev(events.size());
  for (std::size_t e = 0; e < events.size(); ++e) g_prev[e] = events[e].g(t, y);

  for (std::size_t step = 0;; ++step) {
    if (step >= ctl.max_steps) {
      sol.status = Status::TooManySteps;
      return sol;
    }
    const double min_step = 10 * std::abs(std::nextafter(t, t_end + 1.0) - t);
    Vec<N> y_new{};
    Vec<N> f_new{};
    double h = 0.0;
    bool rejected = false;
    while (true) {
      if (h_abs < min_step) {
        sol.status = Status::StepTooSmall;
        return sol;
      }
      double t_new = t + h_abs;
      if (t_new > t_end) t_new = t_end;
      h = t_new - t;

      K[0] = fy;
      for (int s = 1; s < tab::kStages; ++s) {
        Vec<N> ys = y;
        for (int j = 0; j < s; ++j) {
          const double a = tab::A[s][j];
          if (a == 0.0) continue;
          for (std::size_t k = 0; k < N; ++k) ys[k] += h * a * K[j][k];
        }
        K[s] = f(t + tab::C[s] * h, ys);
      }
      y_new = y;
      for (int j = 0; j < tab::kStages; ++j) {
        const double b = tab::A[tab::kStages][j];
        if (b == 0.0) continue;
        for (std::size_t k = 0; k < N; ++k) y_new[k] += h * b * K[j][k];
      }
      bool ok = detail::finite(y_new);
      if (ok) {
        f_new = f(t + h, y_new);
        ok = detail::finite(f_new);
      }
      double err = std::numeric_limits<double>::infinity();
      if (ok) {
        K[tab::kStages] = f_new;
        const auto sc = scale_of(y, y_new);
        double e5 = 0.0;
        double e3 = 0.0;
        for (std::size_t k = 0; k < N; ++k) {
          double s5 = 0.0;
          double s3 = 0.0;
          for (int j = 0; j <= tab::kStages; ++j) {
            s5 += K[j][k] * tab::E5[j];
            s3 += K[j][k] * tab::E3[j];
          }
          e5 += (s5 / sc[k]) * (s5 / sc[k]);
          e3 += (s3 / sc[k]) * (s3 / sc[k]);
        }
        err = (e5 == 0.0 && e3 == 0.0) ? 0.0 : std::abs(h) * e5 / std::sqrt((e5 + 0.01 * e3) * N);
      }
      if (err < 1.0) {
        double factor = err == 0.0 ? kMaxFactor : std::min(kMaxFactor, kSafety * std::pow(err, kExponent));
        if (rejected) factor = std::min(1.0, factor);
        h_abs = std::min(h_abs * factor, ctl.max_step);
        break;
      }
      h_abs *= ok ? std::max(kMinFactor, kSafety * std::pow(err, kExponent)) : 0.25;
      rejected = true;
    }

    // Continuous extension.
    for (int s = tab::kStages + 1; s < tab::kStagesExtended; ++s) {
      Vec<N> ys = y;
      for (int j = 0; j < s; ++j) {
        const double a = tab::A[s][j];
        if (a == 0.0) continue;
        for (std::size_t k = 0; k < N; ++k) ys[k] += h * a * K[j][k];
      }
      K[s] = f(t + tab::C[s] * h, ys);
    }
    Segment<N> seg;
    seg.t0 = t;
    seg.h = h;
    seg.y0 = y;
    for (std::size_t k = 0; k < N; ++k) {
      const double dy = y_new[k] - y[k];
      seg.F[0][k] = dy;
      seg.F[1][k] = h * K[0][k] - dy;
      seg.F[2][k] = 2 * dy - h * (f_new[k] + K[0][k]);
      for (int r = 0; r < 4; ++r) {
        double s = 0.0;
        for (int j = 0; j < tab::kStagesExtended; ++j) s += tab::D[r][j] * K[j][k];
        seg.F[3 + r][k] = h * s;
      }
    }
    const double t_new = t + h;
    sol.trajectory.push(seg, t_new, y_new);

    // Earliest accepted event inside (t, t_new].
    int hit = -1;
    double t_hit = t_new;
    Vec<N> y_hit = y_new;
    for (std::size_t e = 0; e < events.size(); ++e) {
      const auto& ev = events[e];
      const double ga = g_prev[e];
      const double gb = ev.g(t_new, y_new);
      g_prev[e] = gb;
      const bool rising = ga < 0.0 && gb >= 0.0;
      const bool falling = ga > 0.0 && gb <= 0.0;
      if (!((ev.direction >= 0 && rising) || (ev.direction <= 0 && falling))) continue;
      auto g_of = [&](double tt) { return ev.g(tt, seg.eval(tt)); };
      const double tr = (gb == 0.0) ? t_new : detail::locate_root(g_of, t, ga, t_new, gb, ctl.event_tol);
      const Vec<N> yr = (tr >= t_new) ? y_new : seg.eval(tr);
      if (ev.accept && !ev.accept(tr, yr)) continue;
      if (hit < 0 || tr < t_hit) {
        hit = static_cast<int>(e);
        t_hit = tr;
        y_hit = yr;
      }
    }
    if (hit >= 0) {
      sol.trajectory.truncate(t_hit, y_hit);
      sol.status = Status::EventHit;
      sol.event = hit;
      return sol;
    }

    t = t_new;
    y = y_new;
    fy = f_new;
    if (t >= t_end) {
      sol.status = Status::ReachedEnd;
      return sol;
    }
  }
}

}  // namespace membif::ode
