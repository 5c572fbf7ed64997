#include "adaplan/qp.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/LU>

#include "adaplan/geometry.hpp"

namespace adaplan {

namespace {

constexpr double kRhoMin = 1e-6;
constexpr double kRhoMax = 1e6;
constexpr double kRhoEqualityScale = 1e3;

double InfNorm(const Eigen::VectorXd& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }

struct Residuals {
  double primal = 0.0;
  double dual = 0.0;
  double eps_primal = 0.0;
  double eps_dual = 0.0;
  double primal_scale = 0.0;
  double dual_scale = 0.0;
};

Residuals ComputeResiduals(const QpProblem& qp, const QpSettings& s,
                           const Eigen::VectorXd& x, const Eigen::VectorXd& z,
                           const Eigen::VectorXd& y) {
  const Eigen::VectorXd ax = qp.A * x;
  const Eigen::VectorXd px = qp.P * x;
  const Eigen::VectorXd aty = qp.A.transpose() * y;
  Residuals r;
  r.primal = InfNorm(ax - z);
  r.dual = InfNorm(px + qp.q + aty);
  r.primal_scale = std::max(InfNorm(ax), InfNorm(z));
  r.dual_scale = std::max({InfNorm(px), InfNorm(aty), InfNorm(qp.q)});
  r.eps_primal = s.eps_abs + s.eps_rel * r.primal_scale;
  r.eps_dual = s.eps_abs + s.eps_rel * r.dual_scale;
  return r;
}

Eigen::VectorXd Project(const Eigen::VectorXd& v, const QpProblem& qp) {
  return v.cwiseMax(qp.l).cwiseMin(qp.u);
}

// Solves the equality-constrained QP on the guessed active set and keeps the
// result only if it is primal feasible with correctly signed multipliers.
// A wrong guess is repaired a few times: the worst wrongly signed row leaves
// the set, or the most violated row joins it.
bool Polish(const QpProblem& qp, const QpSettings& s, QpSolution& sol,
            const Eigen::VectorXd& z) {
  const int n = static_cast<int>(qp.q.size());
  const int m = static_cast<int>(qp.l.size());
  // 0 inactive, -1 at lower bound, +1 at upper bound.
  std::vector<int> side(m, 0);
  for (int i = 0; i < m; ++i) {
    if (z(i) - qp.l(i) < -sol.y(i)) {
      side[i] = -1;
    } else if (qp.u(i) - z(i) < sol.y(i)) {
      side[i] = 1;
    }
  }
  const double tol = std::max(1e-9, s.eps_abs);
  const double delta = 1e-9;
  constexpr int kRepairs = 8;
  for (int attempt = 0; attempt <= kRepairs; ++attempt) {
    std::vector<int> active;
    for (int i = 0; i < m; ++i) {
      if (side[i] != 0) active.push_back(i);
    }
    const int k = static_cast<int>(active.size());
    if (k > n) return false;
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + k, n + k);
    Eigen::VectorXd rhs(n + k);
    kkt.topLeftCorner(n, n) = qp.P;
    rhs.head(n) = -qp.q;
    for (int r = 0; r < k; ++r) {
      const int i = active[r];
      kkt.block(n + r, 0, 1, n) = qp.A.row(i);
      kkt.block(0, n + r, n, 1) = qp.A.row(i).transpose();
      rhs(n + r) = side[i] < 0 ? qp.l(i) : qp.u(i);
    }
    const Eigen::MatrixXd kkt_exact = kkt;
    kkt.topLeftCorner(n, n).diagonal().array() += delta;
    kkt.bottomRightCorner(k, k).diagonal().array() -= delta;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd sol_vec = lu.solve(rhs);
    for (int it = 0; it < 5; ++it) {
      sol_vec += lu.solve(rhs - kkt_exact * sol_vec);
    }
    if (!sol_vec.allFinite()) return false;

    Eigen::VectorXd x = sol_vec.head(n);
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
    for (int r = 0; r < k; ++r) y(active[r]) = sol_vec(n + r);

    int wrong = -1;
    double wrong_size = tol;
    for (int i : active) {
      if (qp.l(i) == qp.u(i)) continue;
      const double bad = side[i] < 0 ? y(i) : -y(i);
      if (bad > wrong_size) {
        wrong_size = bad;
        wrong = i;
      }
    }
    if (wrong >= 0) {
      side[wrong] = 0;
      continue;
    }
    const Eigen::VectorXd ax = qp.A * x;
    int violated = -1;
    double violation = tol;
    for (int i = 0; i < m; ++i) {
      const double v = std::max(qp.l(i) - ax(i), ax(i) - qp.u(i));
      if (v > violation) {
        violation = v;
        violated = i;
      }
    }
    if (violated >= 0) {
      side[violated] = ax(violated) < qp.l(violated) ? -1 : 1;
      continue;
    }
    const Residuals res = ComputeResiduals(qp, s, x, Project(ax, qp), y);
    if (res.dual > std::max(sol.dual_residual, 1e-7) * 10.0) return false;
    sol.x = std::move(x);
    sol.y = std::move(y);
    sol.primal_residual = res.primal;
    sol.dual_residual = res.dual;
    sol.polished = true;
    return true;
  }
  return false;
}


// Ruiz equilibration of the KKT matrix plus a cost scale, as in OSQP.
// The scaled problem is P' = c D P D, q' = c D q, A' = E A D, l' = E l, u' = E u.
struct Scaling {
  Eigen::VectorXd d;
  Eigen::VectorXd e;
  double c = 1.0;
};

Scaling Equilibrate(const QpProblem& qp, int passes, QpProblem& scaled) {
  const int n = static_cast<int>(qp.q.size());
  const int m = static_cast<int>(qp.l.size());
  Scaling sc{Eigen::VectorXd::Ones(n), Eigen::VectorXd::Ones(m), 1.0};
  scaled = qp;
  auto clamp_norm = [](double v) { return std::clamp(v, 1e-4, 1e4); };
  for (int pass = 0; pass < passes; ++pass) {
    Eigen::VectorXd dt(n), et(m);
    for (int j = 0; j < n; ++j) {
      double norm = scaled.P.col(j).cwiseAbs().maxCoeff();
      if (m > 0) norm = std::max(norm, scaled.A.col(j).cwiseAbs().maxCoeff());
      dt(j) = 1.0 / std::sqrt(clamp_norm(norm));
    }
    for (int i = 0; i < m; ++i) et(i) = 1.0 / std::sqrt(clamp_norm(scaled.A.row(i).cwiseAbs().maxCoeff()));
    scaled.P = dt.asDiagonal() * scaled.P * dt.asDiagonal();
    scaled.q = dt.cwiseProduct(scaled.q);
    if (m > 0) scaled.A = et.asDiagonal() * scaled.A * dt.asDiagonal();
    sc.d = sc.d.cwiseProduct(dt);
    sc.e = sc.e.cwiseProduct(et);
    // Cost scale.
    double mean_col = 0.0;
    for (int j = 0; j < n; ++j) mean_col += scaled.P.col(j).cwiseAbs().maxCoeff();
    mean_col /= std::max(n, 1);
    const double ct = 1.0 / clamp_norm(std::max(mean_col, InfNorm(scaled.q)));
    scaled.P *= ct;
    scaled.q *= ct;
    sc.c *= ct;
  }
  for (int i = 0; i < m; ++i) {
    if (scaled.l(i) > -kQpInfinity) scaled.l(i) = qp.l(i) * sc.e(i);
    if (scaled.u(i) < kQpInfinity) scaled.u(i) = qp.u(i) * sc.e(i);
  }
  return sc;
}


// Dense primal-dual interior point (Mehrotra predictor-corrector) on
//   G x + s = h, s >= 0,  E x = b,
// where G stacks the finite one-sided rows of l <= A x <= u and E the rows
// with l == u. Returns false if it does not reach tolerance.
bool InteriorPoint(const QpProblem& qp, const QpSettings& s, QpSolution& sol) {
  const int n = static_cast<int>(qp.q.size());
  const int m = static_cast<int>(qp.l.size());
  std::vector<int> row;   // source row of each inequality
  std::vector<double> sgn;  // +1 upper, -1 lower
  std::vector<int> eq;
  for (int i = 0; i < m; ++i) {
    if (qp.u(i) - qp.l(i) < 1e-12) {
      eq.push_back(i);
      continue;
    }
    if (qp.u(i) < kQpInfinity) {
      row.push_back(i);
      sgn.push_back(1.0);
    }
    if (qp.l(i) > -kQpInfinity) {
      row.push_back(i);
      sgn.push_back(-1.0);
    }
  }
  const int k = static_cast<int>(row.size());
  const int ne = static_cast<int>(eq.size());
  Eigen::MatrixXd G(k, n);
  Eigen::VectorXd h(k);
  for (int r = 0; r < k; ++r) {
    G.row(r) = sgn[r] * qp.A.row(row[r]);
    h(r) = sgn[r] > 0 ? qp.u(row[r]) : -qp.l(row[r]);
  }
  Eigen::MatrixXd E(ne, n);
  Eigen::VectorXd b(ne);
  for (int r = 0; r < ne; ++r) {
    E.row(r) = qp.A.row(eq[r]);
    b(r) = qp.l(eq[r]);
  }

  // Solves [P + G^T W G, E^T; E, 0] [dx; dy] = [r1; r2].
  Eigen::PartialPivLU<Eigen::MatrixXd> lu;
  auto factor = [&](const Eigen::VectorXd& w) {
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + ne, n + ne);
    kkt.topLeftCorner(n, n) = qp.P;
    kkt.topLeftCorner(n, n).noalias() += G.transpose() * w.asDiagonal() * G;
    kkt.topLeftCorner(n, n).diagonal().array() += 1e-10;
    kkt.topRightCorner(n, ne) = E.transpose();
    kkt.bottomLeftCorner(ne, n) = E;
    kkt.bottomRightCorner(ne, ne).diagonal().array() -= 1e-12;
    lu.compute(kkt);
  };
  auto solve = [&](const Eigen::VectorXd& r1, const Eigen::VectorXd& r2, Eigen::VectorXd& dx,
                   Eigen::VectorXd& dy) {
    Eigen::VectorXd rhs(n + ne);
    rhs << r1, r2;
    const Eigen::VectorXd v = lu.solve(rhs);
    dx = v.head(n);
    dy = v.tail(ne);
  };

  Eigen::VectorXd x, y, dx, dy;
  factor(Eigen::VectorXd::Ones(k));
  solve(-qp.q + G.transpose() * h, b, x, y);
  // Least-squares start, both sides shifted into the positive orthant.
  Eigen::VectorXd sl = h - G * x;
  Eigen::VectorXd z = -sl;
  if (k > 0) {
    if (sl.minCoeff() < 1.0) sl.array() += 1.0 - sl.minCoeff();
    if (z.minCoeff() < 1.0) z.array() += 1.0 - z.minCoeff();
  }

  const double q_scale = 1.0 + InfNorm(qp.q);
  const double h_scale = 1.0 + InfNorm(h) + InfNorm(b);
  // Same accuracy as the ADMM stopping rule; polish sharpens it afterwards.
  const double tol = s.eps_abs;
  constexpr int kMaxIter = 60;
  auto max_step = [](const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
    double a = 1.0;
    for (int i = 0; i < v.size(); ++i) {
      if (dv(i) < 0.0) a = std::min(a, -v(i) / dv(i));
    }
    return a;
  };
  for (int it = 0; it < kMaxIter; ++it) {
    const Eigen::VectorXd rd = qp.P * x + qp.q + G.transpose() * z + E.transpose() * y;
    const Eigen::VectorXd rp = G * x + sl - h;
    const Eigen::VectorXd re = E * x - b;
    const double mu = k ? sl.dot(z) / k : 0.0;
    if (InfNorm(rd) <= tol * q_scale && InfNorm(rp) <= tol * h_scale &&
        InfNorm(re) <= tol * h_scale && mu <= tol * 1e-2) {
      sol.x = x;
      sol.y = Eigen::VectorXd::Zero(m);
      for (int r = 0; r < k; ++r) sol.y(row[r]) += sgn[r] * z(r);
      for (int r = 0; r < ne; ++r) sol.y(eq[r]) = y(r);
      sol.iterations += it;
      return true;
    }
    const Eigen::VectorXd w = z.cwiseQuotient(sl);
    factor(w);
    auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& ddx, Eigen::VectorXd& ddy,
                         Eigen::VectorXd& dz, Eigen::VectorXd& ds) {
      // ds = -(rc + S dz)/Z ; dz = W (G dx + rp - rc/Z)
      const Eigen::VectorXd t = rp - rc.cwiseQuotient(z);
      solve(-rd - G.transpose() * w.cwiseProduct(t), -re, ddx, ddy);
      dz = w.cwiseProduct(G * ddx + t);
      ds = -(rc + sl.cwiseProduct(dz)).cwiseQuotient(z);
    };
    Eigen::VectorXd dz, ds;
    direction(sl.cwiseProduct(z), dx, dy, dz, ds);
    const double a_aff = std::min(max_step(sl, ds), max_step(z, dz));
    const double mu_aff = k ? (sl + a_aff * ds).dot(z + a_aff * dz) / k : 0.0;
    const double sigma = mu > 0.0 ? std::pow(mu_aff / mu, 3) : 0.0;
    const Eigen::VectorXd rc =
        sl.cwiseProduct(z) + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(k, sigma * mu);
    direction(rc, dx, dy, dz, ds);
    const double a = std::min(1.0, 0.99 * std::min(max_step(sl, ds), max_step(z, dz)));
    x += a * dx;
    y += a * dy;
    z += a * dz;
    sl += a * ds;
    if (!x.allFinite() || !z.allFinite()) return false;
  }
  return false;
}

}  // namespace

double QpObjective(const QpProblem& problem, const Eigen::VectorXd& x) {
  return 0.5 * x.dot(problem.P * x) + problem.q.dot(x);
}

QpSolution SolveQp(const QpProblem& original, const QpSettings& s, const QpWarmStart* warm) {
  const int n = static_cast<int>(original.q.size());
  const int m = static_cast<int>(original.l.size());
  if (original.P.rows() != n || original.P.cols() != n || original.A.rows() != m ||
      (m > 0 && original.A.cols() != n) || original.u.size() != m) {
    throw NumericFailure("QP dimensions are inconsistent", 0.0);
  }
  if ((original.l.array() > original.u.array()).any()) {
    throw NumericFailure("QP has crossing bounds", 0.0);
  }

  QpProblem qp;
  const Scaling sc = Equilibrate(original, s.scaling_passes, qp);
  // Scaled <-> original variables: x = D x', z = E^-1 z', y = E y' / c.
  auto unscale_x = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return sc.d.cwiseProduct(v); };
  auto unscale_z = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd { return v.cwiseQuotient(sc.e); };
  auto unscale_y = [&](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return sc.e.cwiseProduct(v) / sc.c;
  };

  Eigen::VectorXd x = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(m);
  if (warm != nullptr) {
    if (warm->x.size() == n) x = warm->x.cwiseQuotient(sc.d);
    if (warm->y.size() == m) y = warm->y.cwiseQuotient(sc.e) * sc.c;
  }
  Eigen::VectorXd z = Project(qp.A * x, qp);

  Eigen::VectorXd rho_scale = Eigen::VectorXd::Ones(m);
  for (int i = 0; i < m; ++i) {
    if (qp.l(i) <= -kQpInfinity && qp.u(i) >= kQpInfinity) {
      rho_scale(i) = kRhoMin / s.rho;
    } else if (qp.u(i) - qp.l(i) < 1e-12) {
      rho_scale(i) = kRhoEqualityScale;
    }
  }
  double rho = s.rho;
  Eigen::VectorXd rho_vec = rho * rho_scale;

  auto factor = [&]() {
    Eigen::MatrixXd kkt = qp.P;
    kkt.diagonal().array() += s.sigma;
    kkt.noalias() += qp.A.transpose() * rho_vec.asDiagonal() * qp.A;
    return Eigen::LLT<Eigen::MatrixXd>(kkt);
  };
  Eigen::LLT<Eigen::MatrixXd> llt = factor();
  if (llt.info() != Eigen::Success) throw NumericFailure("QP KKT factorization failed", 0.0);

  QpSolution sol;
  Residuals res;
  int next_polish = s.polish_interval;
  bool fallback_tried = false;
  int iter = 0;
  for (iter = 1; iter <= s.max_iterations; ++iter) {
    const Eigen::VectorXd rhs =
        s.sigma * x - qp.q + qp.A.transpose() * (rho_vec.cwiseProduct(z) - y);
    const Eigen::VectorXd x_tilde = llt.solve(rhs);
    const Eigen::VectorXd z_tilde = qp.A * x_tilde;
    const Eigen::VectorXd z_relaxed = s.alpha * z_tilde + (1.0 - s.alpha) * z;
    x = s.alpha * x_tilde + (1.0 - s.alpha) * x;
    const Eigen::VectorXd z_next =
        Project(z_relaxed + y.cwiseQuotient(rho_vec), qp);
    y += rho_vec.cwiseProduct(z_relaxed - z_next);
    z = z_next;

    if (iter % s.check_interval != 0 && iter != s.max_iterations) continue;
    if (!x.allFinite() || !y.allFinite()) {
      throw NumericFailure("QP iterate became non-finite", res.primal);
    }
    res = ComputeResiduals(original, s, unscale_x(x), unscale_z(z), unscale_y(y));
    if (res.primal <= res.eps_primal && res.dual <= res.eps_dual) {
      sol.status = QpStatus::kSolved;
      break;
    }
    // An accepted polish is an exact KKT point, so ADMM can stop there.
    if (s.polish && m > 0 && s.polish_interval > 0 && iter == next_polish) {
      next_polish += s.polish_interval;
      sol.x = unscale_x(x);
      sol.y = unscale_y(y);
      sol.primal_residual = res.primal;
      sol.dual_residual = res.dual;
      if (Polish(original, s, sol, unscale_z(z))) {
        sol.status = QpStatus::kSolved;
        sol.iterations = iter;
        sol.objective = QpObjective(original, sol.x);
        return sol;
      }
    }
    if (s.fallback_after > 0 && iter >= s.fallback_after && !fallback_tried && m > 0) {
      fallback_tried = true;
      QpSolution ip;
      ip.iterations = iter;
      if (InteriorPoint(qp, s, ip)) {
        const Eigen::VectorXd x_scaled = ip.x;
        const Eigen::VectorXd y_scaled = ip.y;
        ip.x = unscale_x(x_scaled);
        ip.y = unscale_y(y_scaled);
        ip.interior_point = true;
        const Eigen::VectorXd ax = original.A * ip.x;
        const Residuals r = ComputeResiduals(original, s, ip.x, Project(ax, original), ip.y);
        ip.primal_residual = r.primal;
        ip.dual_residual = r.dual;
        const bool accurate = r.primal <= r.eps_primal && r.dual <= r.eps_dual;
        if (s.polish) Polish(original, s, ip, ax);
        if (accurate || ip.polished) {
          ip.status = QpStatus::kSolved;
          ip.objective = QpObjective(original, ip.x);
          return ip;
        }
        // Not tight enough in original units: let ADMM finish from here.
        x = x_scaled;
        y = y_scaled;
        z = Project(qp.A * x, qp);
      }
    }
    if (s.adaptive_rho && iter % (5 * s.check_interval) == 0) {
      Residuals scaled = ComputeResiduals(qp, s, x, z, y);
      const double num = scaled.primal / std::max(scaled.primal_scale, 1e-12);
      const double den = scaled.dual / std::max(scaled.dual_scale, 1e-12);
      const double rho_new =
          std::clamp(rho * std::sqrt(num / std::max(den, 1e-12)), kRhoMin, kRhoMax);
      if (rho_new > 5.0 * rho || rho_new < 0.2 * rho) {
        rho = rho_new;
        rho_vec = rho * rho_scale;
        for (int i = 0; i < m; ++i) {
          if (rho_scale(i) < 1.0) rho_vec(i) = kRhoMin;
        }
        llt = factor();
        if (llt.info() != Eigen::Success) {
          throw NumericFailure("QP KKT refactorization failed", res.primal);
        }
      }
    }
  }
  sol.iterations = std::min(iter, s.max_iterations);
  sol.x = unscale_x(x);
  sol.y = unscale_y(y);
  sol.primal_residual = res.primal;
  sol.dual_residual = res.dual;
  if (s.polish && m > 0) Polish(original, s, sol, unscale_z(z));
  sol.objective = QpObjective(original, sol.x);
  return sol;
}

}  // namespace adaplan
