#pragma once

// Time meshes on [0, 1].
//
// Geometric (GRM): t_0 = 0, t_i = 2^(i-1-L) for i = 1..L+1, each interval
// I_n = [t_n, t_{n+1}] split into N equal steps of size k_n = t_n / N
// (k_0 = t_1 / N). Uniform (UM): t_n = n / N.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <variant>
#include <vector>

namespace fracpade {

struct GeometricLayout {
  int levels;     // L
  int per_level;  // N
};

struct UniformLayout {
  int steps;  // N
};

/// One step of a mesh: advance from `t` by `k`.
struct TimeStep {
  double t;
  double k;
};

class TimeMesh {
 public:
  using Kind = std::variant<GeometricLayout, UniformLayout>;

  const Kind& kind() const { return kind_; }
  bool is_geometric() const { return std::holds_alternative<GeometricLayout>(kind_); }

  /// All breakpoints t_{n,j}, strictly increasing from 0 to 1.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<TimeStep>& steps() const { return steps_; }
  int step_count() const { return static_cast<int>(steps_.size()); }

  /// (k_n, t_{n,j}) for a geometric mesh; for a uniform mesh n must be 0.
  TimeStep step_of(int n, int j) const {
    if (const auto* g = std::get_if<GeometricLayout>(&kind_)) {
      if (n < 0 || n > g->levels || j < 0 || j > g->per_level) throw std::out_of_range("step_of");
      const double kn = level_start(n == 0 ? 1 : n, g->levels) / g->per_level;
      if (j == g->per_level) return {level_start(n + 1, g->levels), kn};
      return {level_start(n, g->levels) + j * kn, kn};
    }
    const auto& u = std::get<UniformLayout>(kind_);
    if (n != 0 || j < 0 || j > u.steps) throw std::out_of_range("step_of");
    return {breakpoints_[j], 1.0 / u.steps};
  }

  friend TimeMesh build_geometric_mesh(double, int, std::optional<int>);
  friend TimeMesh build_uniform_mesh(int);

  /// t_n = 2^(n-1-L) for n >= 1, t_0 = 0. Exact dyadic values.
  static double level_start(int n, int levels) { return n == 0 ? 0.0 : std::ldexp(1.0, n - 1 - levels); }

 private:
  TimeMesh() = default;

  Kind kind_;
  std::vector<double> breakpoints_;
  std::vector<TimeStep> steps_;
};

/// L = ceil(log2(lambda_max)) unless overridden.
inline TimeMesh build_geometric_mesh(double lambda_max, int N, std::optional<int> L_override = std::nullopt) {
  if (N < 1) throw std::invalid_argument("build_geometric_mesh: N must be positive");
  int L = 0;
  if (L_override) {
    if (*L_override < 1) throw std::invalid_argument("build_geometric_mesh: L override must be >= 1");
    L = *L_override;
  } else {
    if (!(lambda_max > 1.0)) throw std::invalid_argument("build_geometric_mesh: lambda_max must exceed 1");
    L = static_cast<int>(std::ceil(std::log2(lambda_max)));
  }
  if (L > 52) throw std::invalid_argument("build_geometric_mesh: L above 52 loses dyadic exactness");

  TimeMesh mesh;
  mesh.kind_ = GeometricLayout{L, N};
  mesh.breakpoints_.reserve(static_cast<std::size_t>(L + 1) * N + 1);
  mesh.steps_.reserve(static_cast<std::size_t>(L + 1) * N);
  mesh.breakpoints_.push_back(0.0);
  for (int n = 0; n <= L; ++n) {
    const double tn = TimeMesh::level_start(n, L);
    const double kn = TimeMesh::level_start(n == 0 ? 1 : n, L) / N;
    for (int j = 1; j <= N; ++j) {
      mesh.steps_.push_back({tn + (j - 1) * kn, kn});
      mesh.breakpoints_.push_back(j == N ? TimeMesh::level_start(n + 1, L) : tn + j * kn);
    }
  }
  return mesh;
}

inline TimeMesh build_uniform_mesh(int N) {
  if (N < 1) throw std::invalid_argument("build_uniform_mesh: N must be positive");
  TimeMesh mesh;
  mesh.kind_ = UniformLayout{N};
  const double k = 1.0 / N;
  mesh.breakpoints_.reserve(N + 1);
  for (int n = 0; n < N; ++n) {
    mesh.breakpoints_.push_back(static_cast<double>(n) / N);
    mesh.steps_.push_back({static_cast<double>(n) / N, k});
  }
  mesh.breakpoints_.push_back(1.0);
  return mesh;
}

/// Level count used by the numerical experiments: L = ceil(2 |log h| / log 2).
inline int experiment_levels(double h) {
  if (!(h > 0.0 && h < 1.0)) throw std::invalid_argument("experiment_levels: h must lie in (0, 1)");
  return static_cast<int>(std::ceil(2.0 * std::abs(std::log(h)) / std::log(2.0)));
}

/// Levels of the boundary-graded spatial mesh: smallest L with 2^-L < h^2, h = 1/(4N).
inline int graded_spatial_levels(int N) {
  const double h2 = 1.0 / (16.0 * N * N);
  int L = 1;
  while (std::ldexp(1.0, -L) >= h2) ++L;
  return L;
}

/// Spatial nodes on [0, 1]: the geometric mesh restricted to [0, 1/2] with N
/// points per level, mirrored about 1/2. Mesh size is 1/(4N) on [1/4, 3/4].
inline std::vector<double> build_graded_spatial_mesh(int N) {
  if (N < 2) throw std::invalid_argument("build_graded_spatial_mesh: N must be >= 2");
  const int L = graded_spatial_levels(N);
  // Dyadic levels scaled to end at 1/2: t_n = 2^(n-1-L), n = 0..L.
  std::vector<double> left;
  left.reserve(static_cast<std::size_t>(L) * N + 1);
  left.push_back(0.0);
  for (int n = 0; n < L; ++n) {
    const double tn = TimeMesh::level_start(n, L);
    const double kn = TimeMesh::level_start(n == 0 ? 1 : n, L) / N;
    for (int j = 1; j <= N; ++j) left.push_back(j == N ? TimeMesh::level_start(n + 1, L) : tn + j * kn);
  }
  std::vector<double> nodes(left);
  for (auto it = left.rbegin() + 1; it != left.rend(); ++it) nodes.push_back(1.0 - *it);
  return nodes;
}

}  // namespace fracpade
