#include "csu/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace csu {

namespace {

constexpr double kSymmetryTol = 1e-9;
constexpr double kOffDiagTol = 1e-12;
constexpr double kRankFloor = 1e-12;

double off_diagonal_norm(const Matrix& a) {
  const Index n = a.rows();
  double sum = 0.0;
  for (Index q = 1; q < n; ++q) {
    const double* col = a.col(q).data();
    for (Index p = 0; p < q; ++p) sum += col[p] * col[p];
  }
  return std::sqrt(2.0 * sum);
}

struct Rotation {
  Index p;
  Index q;
  double s;
  double tau;
  double new_pp;
  double new_qq;
};

// x' = c x - s y, y' = s x + c y, written with tau = s / (1 + c).
inline void rotate_pair(double& x, double& y, double s, double tau) {
  const double a = x;
  const double b = y;
  x = a - s * (b + tau * a);
  y = b + s * (a - tau * b);
}

void rotate_columns(double* x, double* y, Index n, double s, double tau) {
  for (Index k = 0; k < n; ++k) rotate_pair(x[k], y[k], s, tau);
}

// Parallel round-robin ordering. Index 0 is fixed when n is even and the
// remaining M indices are residues u; round k pairs u with (k - u) mod M, and
// the u with 2u = k (mod M) pairs with index 0 (or sits out when n is odd).
// In index order the pairs of a round then form two contiguous segments, each
// paired with its own reverse, so the row pass streams memory.
struct Schedule {
  Index off;  // 1 if index 0 is the fixed player
  Index m;    // number of rotating players, odd
  Index rounds() const { return m; }
};

struct RoundCoefficients {
  std::vector<double> s_lo, tau_lo, s_hi, tau_hi;
  double s_fixed = 0.0;
  double tau_fixed = 0.0;
};

// Rotates x[t] with x[len - 1 - t] for t < len / 2.
void mirror_pass(double* __restrict x, Index len, const double* __restrict s,
                 const double* __restrict tau) {
  const Index half = len / 2;
#pragma GCC ivdep
  for (Index t = 0; t < half; ++t) {
    const double a = x[t];
    const double b = x[len - 1 - t];
    x[t] = a - s[t] * (b + tau[t] * a);
    x[len - 1 - t] = b + s[t] * (a - tau[t] * b);
  }
}

// Computes the rotation that zeroes a(p, q), or returns false when the pair
// needs none. Negligible entries are dropped once the sweep count passes 3.
bool make_rotation(Matrix& a, Index p, Index q, int sweep, Rotation& out) {
  const double apq = a(p, q);
  if (apq == 0.0) return false;
  const double app = a(p, p);
  const double aqq = a(q, q);
  const double g = 100.0 * std::abs(apq);
  if (sweep > 3 && std::abs(app) + g == std::abs(app) && std::abs(aqq) + g == std::abs(aqq)) {
    a(p, q) = 0.0;
    a(q, p) = 0.0;
    return false;
  }
  const double h = aqq - app;
  double t;
  if (std::abs(h) + g == std::abs(h)) {
    t = apq / h;
  } else {
    const double theta = 0.5 * h / apq;
    t = 1.0 / (std::abs(theta) + std::sqrt(1.0 + theta * theta));
    if (theta < 0.0) t = -t;
  }
  const double c = 1.0 / std::sqrt(1.0 + t * t);
  const double s = t * c;
  out = {p, q, s, s / (1.0 + c), app - t * apq, aqq + t * apq};
  return true;
}

// Applies round k: A <- J^T A J, V <- V J. Left and right rotations commute,
// so each column pair gets its column rotation and its row rotations in one
// visit.
void apply_round(Matrix& a, Matrix& v, const Schedule& sch, Index k, int sweep,
                 std::vector<Rotation>& rots, RoundCoefficients& co, std::vector<char>& active) {
  const Index n = a.rows();
  const Index lo_len = k + 1;
  const Index hi_len = sch.m - k - 1;
  const Index lo0 = sch.off;
  const Index hi0 = sch.off + k + 1;
  co.s_lo.assign(static_cast<std::size_t>(lo_len / 2), 0.0);
  co.tau_lo.assign(co.s_lo.size(), 0.0);
  co.s_hi.assign(static_cast<std::size_t>(hi_len / 2), 0.0);
  co.tau_hi.assign(co.s_hi.size(), 0.0);
  co.s_fixed = 0.0;
  co.tau_fixed = 0.0;

  rots.clear();
  Rotation r;
  for (Index t = 0; t < lo_len / 2; ++t)
    if (make_rotation(a, lo0 + t, lo0 + lo_len - 1 - t, sweep, r)) {
      co.s_lo[static_cast<std::size_t>(t)] = r.s;
      co.tau_lo[static_cast<std::size_t>(t)] = r.tau;
      rots.push_back(r);
    }
  for (Index t = 0; t < hi_len / 2; ++t)
    if (make_rotation(a, hi0 + t, hi0 + hi_len - 1 - t, sweep, r)) {
      co.s_hi[static_cast<std::size_t>(t)] = r.s;
      co.tau_hi[static_cast<std::size_t>(t)] = r.tau;
      rots.push_back(r);
    }
  const Index self = lo_len % 2 == 1 ? lo0 + lo_len / 2 : hi0 + hi_len / 2;
  if (sch.off == 1 && make_rotation(a, 0, self, sweep, r)) {
    co.s_fixed = r.s;
    co.tau_fixed = r.tau;
    rots.push_back(r);
  }
  if (rots.empty()) return;

  const auto row_pass = [&](double* col) {
    mirror_pass(col + lo0, lo_len, co.s_lo.data(), co.tau_lo.data());
    mirror_pass(col + hi0, hi_len, co.s_hi.data(), co.tau_hi.data());
    if (sch.off == 1) rotate_pair(col[0], col[self], co.s_fixed, co.tau_fixed);
  };
  std::fill(active.begin(), active.end(), 0);
  for (const auto& rot : rots) {
    double* cp = a.col(rot.p).data();
    double* cq = a.col(rot.q).data();
    rotate_columns(cp, cq, n, rot.s, rot.tau);
    row_pass(cp);
    row_pass(cq);
    active[static_cast<std::size_t>(rot.p)] = 1;
    active[static_cast<std::size_t>(rot.q)] = 1;
  }
  for (Index j = 0; j < n; ++j)
    if (!active[static_cast<std::size_t>(j)]) row_pass(a.col(j).data());
  for (const auto& rot : rots) {
    a(rot.p, rot.p) = rot.new_pp;
    a(rot.q, rot.q) = rot.new_qq;
    a(rot.p, rot.q) = 0.0;
    a(rot.q, rot.p) = 0.0;
  }
  for (const auto& rot : rots)
    rotate_columns(v.col(rot.p).data(), v.col(rot.q).data(), n, rot.s, rot.tau);
}

}  // namespace

double rank_tolerance(Index size, double max_abs_eigenvalue) {
  return std::max(static_cast<double>(size) * std::numeric_limits<double>::epsilon() *
                      max_abs_eigenvalue,
                  kRankFloor);
}

SymEig sym_eig(const Eigen::Ref<const Matrix>& m, const SymEigOptions& options) {
  const Index n = m.rows();
  if (n < 1 || m.cols() != n)
    throw DimensionError("sym_eig: expected a non-empty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i)
      if (!std::isfinite(m(i, j))) throw NonFiniteError(static_cast<std::size_t>(i * n + j));

  const double norm = m.norm();
  const double asym = (m - m.transpose()).norm();
  if (asym > kSymmetryTol * norm)
    throw NotSymmetricError("sym_eig: asymmetry " + std::to_string(asym) + " exceeds 1e-9 * " +
                            std::to_string(norm));

  Matrix a = 0.5 * (m + m.transpose());
  Matrix v = Matrix::Identity(n, n);
  const double stop = kOffDiagTol * (1.0 + norm);

  const Schedule sch{n % 2 == 0 ? 1 : 0, n % 2 == 0 ? n - 1 : n};
  std::vector<Rotation> rots;
  RoundCoefficients co;
  std::vector<char> active(static_cast<std::size_t>(n));
  bool converged = false;
  for (int sweep = 0; sweep <= options.max_sweeps; ++sweep) {
    if (off_diagonal_norm(a) < stop) {
      converged = true;
      break;
    }
    if (sweep == options.max_sweeps) break;
    for (Index k = 0; k < sch.rounds(); ++k) apply_round(a, v, sch, k, sweep, rots, co, active);
  }
  if (!converged)
    throw ConvergenceError("sym_eig: no convergence after " + std::to_string(options.max_sweeps) +
                           " sweeps");

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index i, Index j) { return a(i, i) > a(j, j); });

  SymEig out;
  out.eigenvalues.resize(n);
  out.eigenvectors.resize(n, n);
  for (Index k = 0; k < n; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    out.eigenvalues(k) = a(src, src);
    out.eigenvectors.col(k) = v.col(src);
    Index big = 0;
    out.eigenvectors.col(k).cwiseAbs().maxCoeff(&big);
    if (out.eigenvectors(big, k) < 0.0) out.eigenvectors.col(k) *= -1.0;
  }

  out.rank_tol = rank_tolerance(n, out.eigenvalues.cwiseAbs().maxCoeff());
  for (Index k = 0; k < n; ++k) {
    double& lambda = out.eigenvalues(k);
    if (lambda < 0.0 && lambda >= -out.rank_tol) {
      lambda = 0.0;
    } else if (lambda < -out.rank_tol && options.require_psd) {
      throw NotPsdError("sym_eig: eigenvalue " + std::to_string(lambda) + " below -" +
                        std::to_string(out.rank_tol));
    }
  }
  return out;
}

Matrix psd_sqrt(const SymEig& eig) {
  if ((eig.eigenvalues.array() < 0.0).any())
    throw NotPsdError("psd_sqrt: negative eigenvalue " +
                      std::to_string(eig.eigenvalues.minCoeff()));
  const Matrix scaled = eig.eigenvectors * eig.eigenvalues.cwiseSqrt().asDiagonal();
  const Matrix p = scaled * eig.eigenvectors.transpose();
  return 0.5 * (p + p.transpose());
}

Matrix pseudo_inverse(const SymEig& eig) {
  const Vector inv = eig.eigenvalues.unaryExpr(
      [tol = eig.rank_tol](double lambda) { return lambda > tol ? 1.0 / lambda : 0.0; });
  const Matrix p = eig.eigenvectors * inv.asDiagonal() * eig.eigenvectors.transpose();
  return 0.5 * (p + p.transpose());
}

PseudoLogDet pseudo_det_log(const SymEig& eig) {
  PseudoLogDet out;
  for (Index i = 0; i < eig.size(); ++i) {
    if (eig.eigenvalues(i) > eig.rank_tol) {
      out.log_det += std::log(eig.eigenvalues(i));
      ++out.rank;
    }
  }
  return out;
}

Index numerical_rank(const SymEig& eig) {
  return (eig.eigenvalues.array() > eig.rank_tol).count();
}

Matrix reconstruct(const SymEig& eig) {
  return eig.eigenvectors * eig.eigenvalues.asDiagonal() * eig.eigenvectors.transpose();
}

}  // namespace csu
