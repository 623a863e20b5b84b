#include "slicebench/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace slicebench::sdp {
namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Block-diagonal symmetric matrix plus a nonnegative-orthant vector.
struct Point {
  std::vector<MatrixXd> S;
  VectorXd v;

  Point& axpy(double a, const Point& o) {
    for (std::size_t b = 0; b < S.size(); ++b) S[b] += a * o.S[b];
    v += a * o.v;
    return *this;
  }
};

double inner(const Point& a, const Point& b) {
  double s = a.v.dot(b.v);
  for (std::size_t k = 0; k < a.S.size(); ++k) s += (a.S[k].array() * b.S[k].array()).sum();
  return s;
}

double norm(const Point& a) { return std::sqrt(inner(a, a)); }

void symmetrize(MatrixXd& m) { m = 0.5 * (m + m.transpose()).eval(); }

class Solver {
 public:
  Solver(const Problem& p, const Options& o) : p_(p), o_(o), m_(static_cast<int>(p.constraints.size())) {
    nb_ = static_cast<int>(p.block_sizes.size());
    by_block_.resize(nb_);
    for (int i = 0; i < m_; ++i) {
      const auto& c = p.constraints[i];
      for (std::size_t t = 0; t < c.terms.size(); ++t) by_block_[c.terms[t].block].push_back({i, static_cast<int>(t)});
    }
    b_.resize(m_);
    for (int i = 0; i < m_; ++i) b_[i] = p.constraints[i].rhs;
    c_.S = p.cost;
    c_.v = p.linear_cost.size() ? p.linear_cost : VectorXd::Zero(p.linear_size);
  }

  Solution run() {
    initialize();
    Solution out;
    double prev_alpha = 0.0;
    for (int it = 0; it <= o_.max_iters; ++it) {
      out.iterations = it;
      const VectorXd rp = b_ - apply(X_);
      Point rd = c_;
      rd.axpy(-1.0, adjoint(y_)).axpy(-1.0, Z_);

      const double pobj = inner(c_, X_);
      const double dobj = b_.dot(y_);
      const double xz = inner(X_, Z_);
      out.primal_objective = pobj;
      out.dual_objective = dobj;
      out.complementarity = xz;
      out.primal_infeasibility = rp.norm() / (1.0 + b_.norm());
      out.dual_infeasibility = norm(rd) / (1.0 + norm(c_));

      const double scale = 1.0 + std::abs(pobj);
      if (out.primal_infeasibility <= o_.feas_tol && out.dual_infeasibility <= o_.feas_tol &&
          std::abs(pobj - dobj) <= o_.gap_tol * scale && xz <= o_.gap_tol * scale) {
        out.status = Status::optimal;
        break;
      }
      if (dobj > 0.0) {
        // (y, Z) / b'y approaches a ray with b'y = 1, A'(y) + Z = 0, Z PSD.
        Point aty = adjoint(y_);
        aty.axpy(1.0, Z_);
        if (norm(aty) <= o_.infeas_tol * dobj) {
          out.status = Status::primal_infeasible;
          break;
        }
      }
      if (it == o_.max_iters) {
        out.status = Status::max_iterations;
        break;
      }
      if (!step(rp, rd, prev_alpha)) {
        out.status = Status::numerical_failure;
        break;
      }
    }
    out.X = X_.S;
    out.x = X_.v;
    out.Z = Z_.S;
    out.z = Z_.v;
    out.y = y_;
    return out;
  }

 private:
  struct TermRef {
    int constraint;
    int term;
  };

  const LowRankTerm& term(const TermRef& r) const { return p_.constraints[r.constraint].terms[r.term]; }

  // A(P)_i = sum over terms w' diag(F' P F) + a_i' v. P may be non-symmetric.
  VectorXd apply(const Point& P) const {
    VectorXd out = VectorXd::Zero(m_);
    for (int i = 0; i < m_; ++i) {
      const auto& c = p_.constraints[i];
      double s = 0.0;
      for (const auto& t : c.terms) {
        const MatrixXd pf = P.S[t.block] * t.factor;
        for (int r = 0; r < t.factor.cols(); ++r) s += t.weights[r] * t.factor.col(r).dot(pf.col(r));
      }
      for (const auto& [idx, coef] : c.linear) s += coef * P.v[idx];
      out[i] = s;
    }
    return out;
  }

  Point adjoint(const VectorXd& y) const {
    Point out = zero();
    for (int i = 0; i < m_; ++i) {
      if (y[i] == 0.0) continue;
      const auto& c = p_.constraints[i];
      for (const auto& t : c.terms)
        out.S[t.block].noalias() += y[i] * t.factor * t.weights.asDiagonal() * t.factor.transpose();
      for (const auto& [idx, coef] : c.linear) out.v[idx] += y[i] * coef;
    }
    return out;
  }

  Point zero() const {
    Point out;
    for (int n : p_.block_sizes) out.S.push_back(MatrixXd::Zero(n, n));
    out.v = VectorXd::Zero(p_.linear_size);
    return out;
  }

  Point identity(double s) const {
    Point out;
    for (int n : p_.block_sizes) out.S.push_back(s * MatrixXd::Identity(n, n));
    out.v = VectorXd::Constant(p_.linear_size, s);
    return out;
  }

  void initialize() {
    // Starting point scaled to the data, in the spirit of SDPT3.
    int n_total = p_.linear_size;
    for (int n : p_.block_sizes) n_total += n;
    const double root_n = std::sqrt(static_cast<double>(std::max(n_total, 1)));
    double xi = std::max(10.0, root_n);
    double eta = std::max({10.0, root_n, norm(c_)});
    for (int i = 0; i < m_; ++i) {
      VectorXd e = VectorXd::Zero(m_);
      e[i] = 1.0;
      const double an = norm(adjoint(e));
      xi = std::max(xi, n_total * (1.0 + std::abs(b_[i])) / (1.0 + an));
      eta = std::max(eta, an);
    }
    X_ = identity(xi);
    Z_ = identity(eta);
    y_ = VectorXd::Zero(m_);
  }

  // Largest alpha with S + alpha dS PSD (infinity if unbounded).
  static double max_step(const Point& S, const Point& dS) {
    double alpha = std::numeric_limits<double>::infinity();
    for (std::size_t b = 0; b < S.S.size(); ++b) {
      // Smallest eigenvalue of the pencil (dS, S), i.e. of L^-1 dS L^-T.
      Eigen::LLT<MatrixXd> llt(S.S[b]);
      if (llt.info() != Eigen::Success) return 0.0;
      MatrixXd w = llt.matrixL().solve(dS.S[b]);
      w = llt.matrixL().solve(w.transpose().eval());
      symmetrize(w);
      const double lmin = Eigen::SelfAdjointEigenSolver<MatrixXd>(w, Eigen::EigenvaluesOnly).eigenvalues()(0);
      if (lmin < 0.0) alpha = std::min(alpha, -1.0 / lmin);
    }
    for (int k = 0; k < S.v.size(); ++k)
      if (dS.v[k] < 0.0) alpha = std::min(alpha, -S.v[k] / dS.v[k]);
    return alpha;
  }

  bool step(const VectorXd& rp, const Point& rd, double& prev_alpha) {
    int n_total = p_.linear_size;
    for (int n : p_.block_sizes) n_total += n;
    const double mu = inner(X_, Z_) / n_total;

    // Z^{-1}
    Point zinv = zero();
    for (int b = 0; b < nb_; ++b) {
      Eigen::LLT<MatrixXd> llt(Z_.S[b]);
      if (llt.info() != Eigen::Success) return false;
      zinv.S[b] = llt.solve(MatrixXd::Identity(Z_.S[b].rows(), Z_.S[b].cols()));
      symmetrize(zinv.S[b]);
    }
    zinv.v = Z_.v.cwiseInverse();

    // Schur complement M_ij = <A_i, X A_j Z^{-1}> + sum_l a_il a_jl x_l / z_l.
    MatrixXd M = MatrixXd::Zero(m_, m_);
    for (int b = 0; b < nb_; ++b) {
      const auto& refs = by_block_[b];
      std::vector<MatrixXd> xf(refs.size()), zf(refs.size());
      for (std::size_t r = 0; r < refs.size(); ++r) {
        xf[r] = X_.S[b] * term(refs[r]).factor;
        zf[r] = zinv.S[b] * term(refs[r]).factor;
      }
      for (std::size_t r = 0; r < refs.size(); ++r) {
        const auto& ti = term(refs[r]);
        for (std::size_t s = r; s < refs.size(); ++s) {
          const auto& tj = term(refs[s]);
          const MatrixXd pij = ti.factor.transpose() * xf[s];  // F_i' X F_j
          const MatrixXd qji = tj.factor.transpose() * zf[r];  // F_j' Z^{-1} F_i
          const double v =
              (ti.weights.asDiagonal() * pij * tj.weights.asDiagonal()).cwiseProduct(qji.transpose()).sum();
          const int i = refs[r].constraint;
          const int j = refs[s].constraint;
          M(i, j) += v;
          if (r != s) M(j, i) += v;
        }
      }
    }
    if (p_.linear_size > 0) {
      MatrixXd a = MatrixXd::Zero(m_, p_.linear_size);
      for (int i = 0; i < m_; ++i)
        for (const auto& [idx, coef] : p_.constraints[i].linear) a(i, idx) += coef;
      M.noalias() += a * X_.v.cwiseProduct(zinv.v).asDiagonal() * a.transpose();
    }
    Eigen::LLT<MatrixXd> mfac(M);
    Eigen::LDLT<MatrixXd> mfac_ldlt;
    const bool use_llt = mfac.info() == Eigen::Success;
    if (!use_llt) {
      mfac_ldlt.compute(M);
      if (mfac_ldlt.info() != Eigen::Success) return false;
    }
    auto solve_m = [&](const VectorXd& r) -> VectorXd {
      if (use_llt) return mfac.solve(r);
      return mfac_ldlt.solve(r);
    };

    // X Rd Z^{-1} term shared by predictor and corrector.
    Point x_rd_zinv = zero();
    for (int b = 0; b < nb_; ++b) x_rd_zinv.S[b] = X_.S[b] * rd.S[b] * zinv.S[b];
    x_rd_zinv.v = X_.v.cwiseProduct(rd.v).cwiseProduct(zinv.v);
    const VectorXd base_rhs = rp + apply(x_rd_zinv);

    auto direction = [&](const Point& rc, Point& dx, VectorXd& dy, Point& dz) {
      dy = solve_m(base_rhs - apply(rc));
      dz = rd;
      dz.axpy(-1.0, adjoint(dy));
      dx = rc;
      for (int b = 0; b < nb_; ++b) {
        MatrixXd t = X_.S[b] * dz.S[b] * zinv.S[b];
        dx.S[b] -= 0.5 * (t + t.transpose());
      }
      dx.v -= X_.v.cwiseProduct(dz.v).cwiseProduct(zinv.v);
    };

    // Predictor: target mu = 0.
    Point rc = X_;
    for (auto& s : rc.S) s = -s;
    rc.v = -rc.v;
    Point dx_a, dz_a;
    VectorXd dy_a;
    direction(rc, dx_a, dy_a, dz_a);
    const double ap_a = std::min(1.0, max_step(X_, dx_a));
    const double ad_a = std::min(1.0, max_step(Z_, dz_a));
    Point xa = X_, za = Z_;
    xa.axpy(ap_a, dx_a);
    za.axpy(ad_a, dz_a);
    const double mu_aff = inner(xa, za) / n_total;
    const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

    // Corrector with the second-order term.
    Point rc2 = zinv;
    for (auto& s : rc2.S) s *= sigma * mu;
    rc2.v *= sigma * mu;
    rc2.axpy(-1.0, X_);
    for (int b = 0; b < nb_; ++b) {
      MatrixXd t = dx_a.S[b] * dz_a.S[b] * zinv.S[b];
      rc2.S[b] -= 0.5 * (t + t.transpose());
    }
    rc2.v -= dx_a.v.cwiseProduct(dz_a.v).cwiseProduct(zinv.v);
    Point dx, dz;
    VectorXd dy;
    direction(rc2, dx, dy, dz);

    const double frac = 0.9 + 0.09 * prev_alpha;
    const double ap = std::min(1.0, frac * max_step(X_, dx));
    const double ad = std::min(1.0, frac * max_step(Z_, dz));
    if (!(ap > 1e-12) && !(ad > 1e-12)) return false;
    X_.axpy(ap, dx);
    Z_.axpy(ad, dz);
    y_ += ad * dy;
    for (auto& s : X_.S) symmetrize(s);
    for (auto& s : Z_.S) symmetrize(s);
    prev_alpha = std::min(ap, ad);
    return X_.v.allFinite() && Z_.v.allFinite() && y_.allFinite();
  }

  const Problem& p_;
  const Options& o_;
  int m_;
  int nb_ = 0;
  std::vector<std::vector<TermRef>> by_block_;
  VectorXd b_;
  Point c_;
  Point X_, Z_;
  VectorXd y_;
};

}  // namespace

Solution solve(const Problem& problem, const Options& options) { return Solver(problem, options).run(); }

}  // namespace slicebench::sdp
