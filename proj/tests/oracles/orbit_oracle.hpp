#pragma once

#include <cstdint>
#include <optional>
#include <vector>

// Independent reference computations for the standard Frenkel-Kontorova
// chain, written directly in orbit space: a periodic configuration
// u_0..u_{N-1} with u_{i+N} = u_i + m. Nothing here uses the library.
namespace oracle {

struct Chain {
  double K = 0.0;
  std::int64_t N = 0;
  std::int64_t m = 0;
};

/// (1/N) sum_i [ (u_{i+1} - u_i)^2 / 2 + K / (4 pi^2) (1 - cos 2 pi u_i) ].
double action(const Chain& c, const std::vector<double>& u);

/// N times the gradient of action(): the discrete Euler-Lagrange left side.
std::vector<double> force(const Chain& c, const std::vector<double>& u);

double sup_abs(const std::vector<double>& v);

struct MinimizeResult {
  std::vector<double> u;
  double action = 0.0;
  double residual = 0.0;  // sup |force|
  int iterations = 0;
};

/// L-BFGS with Armijo backtracking. A pinned site keeps its starting value.
MinimizeResult lbfgs(const Chain& c, std::vector<double> u, double tol, int max_iter,
                     std::optional<std::size_t> pinned = std::nullopt);

/// Lowest-action orbit over `restarts` random starts.
struct RestartResult {
  MinimizeResult best;
  std::vector<double> actions;  // one per restart
};
RestartResult minimize_with_restarts(const Chain& c, int restarts, std::uint64_t seed,
                                     double tol);

/// Hull samples h_k, k = i m mod N, h_k = u_i - floor(i m / N). Requires
/// gcd(m, N) = 1.
std::vector<double> orbit_to_hull(const Chain& c, const std::vector<double>& u);

/// Largest difference between sorted consecutive hull samples, including the
/// wrap difference h_0 + 1 - h_{N-1}.
double largest_gap(const std::vector<double>& hull);

/// Saddle next to a ground state: pin the atom nearest a potential maximum,
/// minimize over the others, and maximize that minimum over the pin position.
struct SaddleResult {
  std::vector<double> u;
  double action = 0.0;
  double residual = 0.0;        // unconstrained sup |force| at the maximizer
  double ground_action = 0.0;
};
SaddleResult constrained_saddle(const Chain& c, const std::vector<double>& ground, double tol);

}  // namespace oracle
