#pragma once

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "volcolor/amg.hpp"
#include "volcolor/error.hpp"
#include "volcolor/sparse.hpp"

namespace volcolor {

enum class Preconditioner { none, jacobi, amg };

inline Preconditioner parse_preconditioner(const std::string& s) {
  if (s == "none") return Preconditioner::none;
  if (s == "jacobi") return Preconditioner::jacobi;
  if (s == "amg") return Preconditioner::amg;
  throw validation_error("bad_config", "unknown preconditioner '" + s + "'");
}

inline const char* preconditioner_name(Preconditioner p) {
  switch (p) {
    case Preconditioner::none: return "none";
    case Preconditioner::jacobi: return "jacobi";
    case Preconditioner::amg: return "amg";
  }
  return "?";
}

struct SolverConfig {
  double rel_tolerance = 1e-8;  // on ||r||_2 / ||b||_2
  int max_iterations = 1000;
  Preconditioner preconditioner = Preconditioner::amg;
  AmgParams amg;
  // Treat constants as the null space: b is projected onto its zero-mean part.
  bool project_constant_nullspace = false;

  void validate() const {
    if (!(rel_tolerance > 0.0)) throw validation_error("bad_config", "solver tolerance must be > 0");
    if (max_iterations < 1) throw validation_error("bad_config", "solver max_iterations must be >= 1");
  }
};

struct SolveReport {
  int iterations = 0;
  double relative_residual = 0.0;
  bool converged = false;
  bool breakdown = false;          // nonpositive curvature met (matrix or preconditioner not SPD)
  bool nullspace_projected = false;
  Preconditioner preconditioner = Preconditioner::none;
  std::size_t amg_levels = 0;
};

// Observer hook: called with (iteration, current iterate) after each update.
using IterateMonitor = std::function<void(int, std::span<const double>)>;

namespace solver_detail {
inline void remove_mean(std::span<double> v) {
  if (v.empty()) return;
  double m = 0.0;
  for (double x : v) m += x;
  m /= static_cast<double>(v.size());
  for (double& x : v) x -= m;
}
}  // namespace solver_detail

// Preconditioned conjugate gradients on an abstract SPD operator.
//   apply_a(x, y):  y = A x
//   apply_m(r, z):  z = M^{-1} r
// x holds the initial guess on entry and the best iterate on exit.
template <typename ApplyA, typename ApplyM>
SolveReport pcg(std::size_t n, ApplyA&& apply_a, ApplyM&& apply_m, std::span<const double> b_in,
                std::span<double> x, const SolverConfig& cfg, const IterateMonitor& monitor = {}) {
  cfg.validate();
  if (b_in.size() != n || x.size() != n) throw validation_error("length_mismatch", "solve: vector length mismatch");
  SolveReport rep;
  std::vector<double> b(b_in.begin(), b_in.end());
  if (cfg.project_constant_nullspace) {
    solver_detail::remove_mean(b);
    rep.nullspace_projected = true;
  }
  const double bnorm = norm2(b);
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    rep.converged = true;
    return rep;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  apply_a(std::span<const double>(x), std::span<double>(ap));
  for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
  double rnorm = norm2(r);
  rep.relative_residual = rnorm / bnorm;
  if (rep.relative_residual <= cfg.rel_tolerance) {
    rep.converged = true;
    return rep;
  }
  apply_m(std::span<const double>(r), std::span<double>(z));
  if (cfg.project_constant_nullspace) solver_detail::remove_mean(z);
  p = z;
  double rz = dot(r, z);

  std::vector<double> best(x.begin(), x.end());
  double best_res = rep.relative_residual;
  for (int it = 1; it <= cfg.max_iterations; ++it) {
    apply_a(std::span<const double>(p), std::span<double>(ap));
    const double pap = dot(p, ap);
    if (!(pap > 0.0) || !(rz > 0.0) || !std::isfinite(pap)) {
      rep.breakdown = true;
      break;
    }
    const double alpha = rz / pap;
    axpy(alpha, p, x);
    axpy(-alpha, ap, r);
    rep.iterations = it;
    rnorm = norm2(r);
    rep.relative_residual = rnorm / bnorm;
    if (monitor) monitor(it, x);
    if (rep.relative_residual < best_res) {
      best_res = rep.relative_residual;
      best.assign(x.begin(), x.end());
    }
    if (rep.relative_residual <= cfg.rel_tolerance) {
      rep.converged = true;
      break;
    }
    apply_m(std::span<const double>(r), std::span<double>(z));
    if (cfg.project_constant_nullspace) solver_detail::remove_mean(z);
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  if (!rep.converged) {
    // recompute the true residual of the best iterate
    std::copy(best.begin(), best.end(), x.begin());
    apply_a(std::span<const double>(x), std::span<double>(ap));
    for (std::size_t i = 0; i < n; ++i) r[i] = b[i] - ap[i];
    rep.relative_residual = norm2(r) / bnorm;
    rep.converged = !rep.breakdown && rep.relative_residual <= cfg.rel_tolerance;
  }
  return rep;
}

// Unpreconditioned CG on a sparse matrix.
inline SolveReport cg_solve(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                            SolverConfig cfg, const IterateMonitor& monitor = {}) {
  if (a.rows != a.cols) throw validation_error("not_square", "cg_solve needs a square matrix");
  cfg.preconditioner = Preconditioner::none;
  auto op = [&](std::span<const double> in, std::span<double> out) { matvec(a, in, out); };
  auto id = [](std::span<const double> in, std::span<double> out) { std::copy(in.begin(), in.end(), out.begin()); };
  return pcg(a.rows, op, id, b, x, cfg, monitor);
}

// Reusable preconditioner for one matrix; build once, use for several right-hand sides.
class PreparedSolver {
public:
  PreparedSolver(const SparseMatrix& a, const SolverConfig& cfg) : a_(&a), cfg_(cfg) {
    cfg_.validate();
    if (a.rows != a.cols) throw validation_error("not_square", "solve needs a square matrix");
    if (cfg.preconditioner == Preconditioner::jacobi && a.rows > 0) inv_diag_ = inverse_diagonal(a);
    if (cfg.preconditioner == Preconditioner::amg && a.rows > 0) amg_ = amg_build(a, cfg.amg);
  }

  const std::optional<AmgHierarchy>& hierarchy() const noexcept { return amg_; }

  SolveReport solve(std::span<const double> b, std::span<double> x, const IterateMonitor& monitor = {}) const {
    auto op = [&](std::span<const double> in, std::span<double> out) { matvec(*a_, in, out); };
    SolveReport rep;
    switch (cfg_.preconditioner) {
      case Preconditioner::none: {
        auto id = [](std::span<const double> in, std::span<double> out) {
          std::copy(in.begin(), in.end(), out.begin());
        };
        rep = pcg(a_->rows, op, id, b, x, cfg_, monitor);
        break;
      }
      case Preconditioner::jacobi: {
        auto jac = [&](std::span<const double> in, std::span<double> out) {
          for (std::size_t i = 0; i < in.size(); ++i) out[i] = inv_diag_[i] * in[i];
        };
        rep = pcg(a_->rows, op, jac, b, x, cfg_, monitor);
        break;
      }
      case Preconditioner::amg: {
        auto vc = [&](std::span<const double> in, std::span<double> out) {
          if (amg_) amg_->apply(in, out);
        };
        rep = pcg(a_->rows, op, vc, b, x, cfg_, monitor);
        rep.amg_levels = amg_ ? amg_->num_levels() : 0;
        break;
      }
    }
    rep.preconditioner = cfg_.preconditioner;
    return rep;
  }

private:
  const SparseMatrix* a_;
  SolverConfig cfg_;
  Vector inv_diag_;
  std::optional<AmgHierarchy> amg_;
};

// CG with the configured preconditioner (one V-cycle per iteration for amg).
inline SolveReport solve(const SparseMatrix& a, std::span<const double> b, std::span<double> x,
                         const SolverConfig& cfg) {
  return PreparedSolver(a, cfg).solve(b, x);
}

inline std::pair<Vector, SolveReport> solve(const SparseMatrix& a, std::span<const double> b, const SolverConfig& cfg) {
  Vector x(a.rows, 0.0);
  auto rep = solve(a, b, x, cfg);
  return {std::move(x), rep};
}

}  // namespace volcolor
