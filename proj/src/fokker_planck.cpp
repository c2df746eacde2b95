#include "bildsim/fokker_planck.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "bildsim/errors.hpp"

namespace bildsim::fokker_planck {
namespace {

constexpr double kCutoff = 6.0;  // kernel support in bandwidths

struct Axis {
  double lo = 0.0;
  double step = 0.0;
  std::size_t points = 0;
  double h = 0.0;
};

// Kernel value and first two derivatives on one axis for one sample, over
// the grid window [first, last).
struct KernelRow {
  std::size_t first = 0;
  std::size_t last = 0;
  std::vector<double> k, dk, d2k;
};

void kernel_row(const Axis& axis, double sample, KernelRow& row) {
  const double reach = kCutoff * axis.h;
  const double a = std::ceil((sample - reach - axis.lo) / axis.step);
  const double b = std::floor((sample + reach - axis.lo) / axis.step) + 1.0;
  row.first = static_cast<std::size_t>(std::clamp(a, 0.0, static_cast<double>(axis.points)));
  row.last = static_cast<std::size_t>(std::clamp(b, 0.0, static_cast<double>(axis.points)));
  const std::size_t width = row.last > row.first ? row.last - row.first : 0;
  row.k.resize(width);
  row.dk.resize(width);
  row.d2k.resize(width);
  const double norm = 1.0 / (axis.h * std::sqrt(2.0 * std::numbers::pi));
  for (std::size_t j = 0; j < width; ++j) {
    const double z = (axis.lo + static_cast<double>(row.first + j) * axis.step - sample) / axis.h;
    const double k = norm * std::exp(-0.5 * z * z);
    row.k[j] = k;
    row.dk[j] = -z / axis.h * k;
    row.d2k[j] = (z * z - 1.0) / (axis.h * axis.h) * k;
  }
}

double l2(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

ResidualReport fokker_planck_residual(const brownian::TrajectoryEnsemble& e,
                                      const brownian::LangevinConfig& config,
                                      const ResidualOptions& options) {
  if (e.has_momenta()) {
    throw ValidationError("Fokker-Planck residual needs an overdamped ensemble");
  }
  const std::size_t dim = e.n_particles;
  if (dim < 1 || dim > 2) {
    throw ValidationError("Fokker-Planck residual supports 1 or 2 particles", "n_particles");
  }
  if (config.n_particles != dim) throw DimensionMismatch("config and ensemble particle counts differ");
  const std::size_t n = e.n_trajectories;
  if (n < kMinSamples) {
    throw ValidationError("insufficient samples: " + std::to_string(n) + " trajectories, need at least " +
                              std::to_string(kMinSamples),
                          "n_trajectories");
  }
  const std::size_t s = options.snapshot;
  const std::size_t w = options.half_window;
  if (w < 1 || s < w || s + w >= e.n_snapshots()) {
    throw ValidationError("snapshot window outside the recorded run", "snapshot");
  }
  const double dt_window = e.times[s + w] - e.times[s - w];

  const std::size_t points = options.grid_points ? options.grid_points : (dim == 1 ? 81 : 41);
  if (points < 5) throw ValidationError("grid needs at least 5 points", "grid_points");
  const double factor = options.bandwidth_factor > 0.0
                            ? options.bandwidth_factor
                            : std::pow(static_cast<double>(n), -1.0 / static_cast<double>(dim + 8));

  std::array<Axis, 2> axes{};
  ResidualReport report;
  report.dimension = dim;
  report.n_samples = n;
  for (std::size_t d = 0; d < dim; ++d) {
    double mean = 0.0, m2 = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
      const double x = e.x(t, s, d);
      const double delta = x - mean;
      mean += delta / static_cast<double>(t + 1);
      m2 += delta * (x - mean);
    }
    const double sd = std::sqrt(m2 / static_cast<double>(n - 1));
    if (!(sd > 0.0)) throw DegenerateMeasure("ensemble has zero spread at the centre snapshot");
    axes[d].lo = mean - options.grid_sds * sd;
    axes[d].points = points;
    axes[d].step = 2.0 * options.grid_sds * sd / static_cast<double>(points - 1);
    axes[d].h = factor * sd;
    report.bandwidth.push_back(axes[d].h);
  }

  const std::size_t cells = dim == 1 ? points : points * points;
  std::vector<double> p_before(cells, 0.0), p_after(cells, 0.0), div_flux(cells, 0.0),
      laplace(cells, 0.0);
  std::array<KernelRow, 2> rows;
  std::array<double, 2> xs{};
  std::array<double, 2> force{};
  std::array<double, 2> diff{config.diffusion(0), dim > 1 ? config.diffusion(1) : 0.0};
  const double gamma = config.gamma();

  auto accumulate_density = [&](std::size_t snap, std::vector<double>& out) {
    for (std::size_t t = 0; t < n; ++t) {
      for (std::size_t d = 0; d < dim; ++d) kernel_row(axes[d], e.x(t, snap, d), rows[d]);
      if (dim == 1) {
        for (std::size_t j = 0; j < rows[0].k.size(); ++j) out[rows[0].first + j] += rows[0].k[j];
      } else {
        for (std::size_t a = 0; a < rows[0].k.size(); ++a)
          for (std::size_t b = 0; b < rows[1].k.size(); ++b)
            out[(rows[0].first + a) * points + rows[1].first + b] += rows[0].k[a] * rows[1].k[b];
      }
    }
  };
  accumulate_density(s - w, p_before);
  accumulate_density(s + w, p_after);

  for (std::size_t t = 0; t < n; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      xs[d] = e.x(t, s, d);
      kernel_row(axes[d], xs[d], rows[d]);
    }
    config.potential.force(std::span<const double>(xs.data(), dim), std::span<double>(force.data(), dim));
    for (std::size_t d = 0; d < dim; ++d) force[d] /= gamma;
    if (dim == 1) {
      for (std::size_t j = 0; j < rows[0].k.size(); ++j) {
        div_flux[rows[0].first + j] += force[0] * rows[0].dk[j];
        laplace[rows[0].first + j] += diff[0] * rows[0].d2k[j];
      }
    } else {
      const auto& r0 = rows[0];
      const auto& r1 = rows[1];
      for (std::size_t a = 0; a < r0.k.size(); ++a) {
        for (std::size_t b = 0; b < r1.k.size(); ++b) {
          const std::size_t c = (r0.first + a) * points + r1.first + b;
          div_flux[c] += force[0] * r0.dk[a] * r1.k[b] + force[1] * r0.k[a] * r1.dk[b];
          laplace[c] += diff[0] * r0.d2k[a] * r1.k[b] + diff[1] * r0.k[a] * r1.d2k[b];
        }
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> time_term(cells), residual(cells);
  for (std::size_t c = 0; c < cells; ++c) {
    time_term[c] = (p_after[c] - p_before[c]) * inv_n / dt_window;
    div_flux[c] *= inv_n;
    laplace[c] *= inv_n;
    residual[c] = time_term[c] + div_flux[c] - laplace[c];
  }
  report.time_norm = l2(time_term);
  report.drift_norm = l2(div_flux);
  report.diffusion_norm = l2(laplace);
  report.residual_norm = l2(residual);
  const double scale = std::max({report.time_norm, report.drift_norm, report.diffusion_norm});
  if (!(scale > 0.0)) throw DegenerateMeasure("all Fokker-Planck terms vanish on the grid");
  report.normalized = report.residual_norm / scale;
  if (!std::isfinite(report.normalized)) throw NumericalError("non-finite Fokker-Planck residual");
  return report;
}

}  // namespace bildsim::fokker_planck
