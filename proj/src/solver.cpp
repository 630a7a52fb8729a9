#include "kslab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <exception>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <thread>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SparseCholesky>

#include "kslab/ansatz.hpp"
#include "kslab/quadrature.hpp"

namespace kslab {

namespace {

// Derivative matrix of the Lagrange basis through the given nodes, evaluated
// at the nodes themselves: D(q, j) = L_j'(x_q), by barycentric weights.
Eigen::MatrixXd lagrange_derivative_matrix(const Eigen::VectorXd& x) {
  const int n = int(x.size());
  Eigen::VectorXd w = Eigen::VectorXd::Ones(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (j != i) w[i] /= (x[i] - x[j]);
  Eigen::MatrixXd d(n, n);
  for (int q = 0; q < n; ++q) {
    Real diag = 0;
    for (int j = 0; j < n; ++j)
      if (j != q) {
        d(q, j) = (w[j] / w[q]) / (x[q] - x[j]);
        diag -= d(q, j);
      }
    d(q, q) = diag;
  }
  return d;
}

struct CellGeometry {
  int theta_cols[2];  // global theta node columns (left, right)
  int z_cols[2];
  Real theta_q[2], theta_w[2];  // cell quadrature in theta
  Real z_q[2], z_w[2];
  Real delta_theta, delta_z;
  Real theta_left, z_left;
};

}  // namespace

// ---------------------------------------------------------------------------
// Grid
// ---------------------------------------------------------------------------

Real Grid3::weight_sum() const {
  Real cross = 0;
  for (int i = 0; i < qtheta_nodes.size(); ++i)
    for (int j = 0; j < qz_nodes.size(); ++j)
      cross += qtheta_weights[i] * qz_weights[j] * measure(i, j);
  return t_weights.sum() * cross;
}

Grid3 make_grid(const ZeroGaussSurface& s, Real h, int n_t, int n_theta, int n_z) {
  if (!(h > 0) || !(h < 1))
    fail(ErrorCode::InvalidArgument, "thickness h must lie in (0, 1)");
  if (n_t < 2 || n_theta < 8 || n_z < 3) {
    std::ostringstream os;
    os << "grid " << n_t << "x" << n_theta << "x" << n_z
       << " below the minimum 2x8x3";
    fail(ErrorCode::ResolutionTooLow, os.str());
  }

  Grid3 g;
  g.h = h;
  g.p = s.p;
  g.z_range = s.z_range;
  g.n_t = n_t;
  g.n_theta = n_theta;
  g.n_z = n_z;

  const Rule1D t_rule = gauss_legendre(n_t, -h / 2, h / 2);
  g.t_nodes = Eigen::Map<const Eigen::VectorXd>(t_rule.nodes.data(), n_t);
  g.t_weights = Eigen::Map<const Eigen::VectorXd>(t_rule.weights.data(), n_t);

  g.theta_nodes.resize(n_theta);
  for (int j = 0; j < n_theta; ++j) g.theta_nodes[j] = s.p * Real(j) / Real(n_theta);
  g.z_nodes.resize(n_z);
  for (int k = 0; k < n_z; ++k)
    g.z_nodes[k] =
        s.z_range.lo + s.z_range.length() * Real(k) / Real(n_z - 1);

  // Two-point Gauss per cell in theta and z.
  const Real gauss_ref = 1.0 / std::sqrt(3.0);
  const Real dth = s.p / Real(n_theta);
  g.qtheta_nodes.resize(2 * n_theta);
  g.qtheta_weights.resize(2 * n_theta);
  for (int j = 0; j < n_theta; ++j) {
    const Real mid = g.theta_nodes[j] + dth / 2;
    g.qtheta_nodes[2 * j] = mid - gauss_ref * dth / 2;
    g.qtheta_nodes[2 * j + 1] = mid + gauss_ref * dth / 2;
    g.qtheta_weights[2 * j] = g.qtheta_weights[2 * j + 1] = dth / 2;
  }
  const int n_zc = n_z - 1;
  const Real dz = s.z_range.length() / Real(n_zc);
  g.qz_nodes.resize(2 * n_zc);
  g.qz_weights.resize(2 * n_zc);
  for (int k = 0; k < n_zc; ++k) {
    const Real mid = g.z_nodes[k] + dz / 2;
    g.qz_nodes[2 * k] = mid - gauss_ref * dz / 2;
    g.qz_nodes[2 * k + 1] = mid + gauss_ref * dz / 2;
    g.qz_weights[2 * k] = g.qz_weights[2 * k + 1] = dz / 2;
  }

  g.measure.resize(2 * n_theta, 2 * n_zc);
  Real max_abs_c = 0, min_a_theta = std::numeric_limits<Real>::max();
  for (int i = 0; i < 2 * n_theta; ++i) {
    const Real th = g.qtheta_nodes[i];
    max_abs_c = std::max(max_abs_c, std::abs(s.c(th)));
    for (int j = 0; j < 2 * n_zc; ++j) {
      const Real z = g.qz_nodes[j];
      const Real a_th = s.A_theta(th, z);
      min_a_theta = std::min(min_a_theta, a_th);
      g.measure(i, j) = s.A_z(z) * a_th;
    }
  }
  if (h * max_abs_c >= min_a_theta) {
    std::ostringstream os;
    os << "h max|c| = " << h * max_abs_c << " reaches min A_theta = " << min_a_theta
       << "; shell too thick for the curvature";
    fail(ErrorCode::DegenerateMetric, os.str());
  }
  return g;
}

// ---------------------------------------------------------------------------
// DOF map
// ---------------------------------------------------------------------------

int DofMap::index(int comp, int i_t, int j_theta, int k_z) const {
  if (comp < 0 || comp >= 3 || i_t < 0 || i_t >= n_t || j_theta < 0 ||
      j_theta >= n_theta_cols || k_z < 0 || k_z >= n_z)
    fail(ErrorCode::InvalidArgument, "dof coordinates out of range");
  return index_map[flat(comp, i_t, j_theta, k_z)];
}

DofMap make_dof_map(const Grid3& grid, BcTag bc) {
  DofMap m;
  m.bc = bc;
  m.n_t = grid.n_t;
  m.n_z = grid.n_z;
  m.n_theta_cols = bc == BcTag::V3 ? grid.n_theta + 1 : grid.n_theta;
  m.index_map.setConstant(3 * m.n_t * m.n_theta_cols * m.n_z, DofMap::kConstrained);

  int next = 0;
  for (int comp = 0; comp < 3; ++comp)
    for (int i_t = 0; i_t < m.n_t; ++i_t)
      for (int j = 0; j < m.n_theta_cols; ++j)
        for (int k = 0; k < m.n_z; ++k) {
          bool constrained = false;
          switch (bc) {
            case BcTag::V1:
              constrained = k == 0 || (k == m.n_z - 1 && comp != 2);
              break;
            case BcTag::V2:
              constrained = (k == 0 || k == m.n_z - 1) && comp != 0;
              break;
            case BcTag::V3:
              // The edge-clamped space keeps the z-end data of V2 and trades
              // theta-periodicity for u_theta = 0 on both theta-edges of the
              // cut; without the z-end data the constant axial translation
              // would sit in the kernel of the full-gradient form on
              // cylinders.
              constrained = ((k == 0 || k == m.n_z - 1) && comp != 0) ||
                            (comp == 1 && (j == 0 || j == m.n_theta_cols - 1));
              break;
            case BcTag::PeriodicOnly:
              break;
          }
          if (!constrained) m.index_map[m.flat(comp, i_t, j, k)] = next++;
        }
  m.n_free = next;
  return m;
}

// ---------------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------------

namespace {

using Triplet = Eigen::Triplet<Real>;

struct ElementWork {
  const ZeroGaussSurface* s;
  const Grid3* grid;
  const DofMap* dofs;
  GradientKind kind;
  Eigen::MatrixXd t_deriv;  // Lagrange derivative matrix at the t nodes
  int n_loc = 0;            // 3 * n_t * 4
};

// Emits the symmetric triplet block of one cell into out_e / out_g.
void assemble_cell(const ElementWork& w, int cell, std::vector<Triplet>& out_e,
                   std::vector<Triplet>& out_g) {
  const Grid3& g = *w.grid;
  const DofMap& d = *w.dofs;
  const int n_zc = g.n_z - 1;
  const int jc = cell / n_zc, kc = cell % n_zc;
  const bool periodic = d.bc != BcTag::V3;

  const int th_cols[2] = {jc, periodic ? (jc + 1) % g.n_theta : jc + 1};
  const int z_cols[2] = {kc, kc + 1};
  const Real dth = g.p / Real(g.n_theta);
  const Real dz = g.z_range.length() / Real(n_zc);
  const Real th_left = g.theta_nodes[jc];
  const Real z_left = g.z_nodes[kc];

  const int n_t = g.n_t;
  const int n_loc = w.n_loc;
  // local dof = ((comp * n_t + i_t) * 2 + lth) * 2 + lz
  std::vector<int> global(n_loc);
  for (int comp = 0; comp < 3; ++comp)
    for (int i_t = 0; i_t < n_t; ++i_t)
      for (int lth = 0; lth < 2; ++lth)
        for (int lz = 0; lz < 2; ++lz)
          global[((comp * n_t + i_t) * 2 + lth) * 2 + lz] =
              d.index_map[d.flat(comp, i_t, th_cols[lth], z_cols[lz])];

  Eigen::MatrixXd ae = Eigen::MatrixXd::Zero(n_loc, n_loc);
  Eigen::MatrixXd ag = Eigen::MatrixXd::Zero(n_loc, n_loc);
  std::vector<Mat3> grads(n_loc);

  for (int qt = 0; qt < n_t; ++qt)
    for (int qth = 0; qth < 2; ++qth)
      for (int qz = 0; qz < 2; ++qz) {
        const Real t = g.t_nodes[qt];
        const Real th = g.qtheta_nodes[2 * jc + qth];
        const Real z = g.qz_nodes[2 * kc + qz];
        const Real wq = g.t_weights[qt] * g.qtheta_weights[2 * jc + qth] *
                        g.qz_weights[2 * kc + qz] * g.measure(2 * jc + qth, 2 * kc + qz);

        const Real th_w = w.s->wrap_theta(th);
        const Real a = w.s->a(th_w), c = w.s->c(th_w);
        const Real a_th = w.s->A_theta(th, z);
        const Real a_z = w.s->A_z(z);
        const Real d_full = a_th + t * c;
        if (!(d_full > 0))
          fail(ErrorCode::DegenerateMetric,
               "A_theta + t c reached zero at an assembly quadrature point");
        const Real den = w.kind == GradientKind::Full ? d_full : a_th;

        // Hat values/derivatives in theta and z; the t basis collocates at
        // the quadrature nodes, so values are Kronecker deltas there.
        const Real hat_th[2] = {(th_left + dth - th) / dth, (th - th_left) / dth};
        const Real dhat_th[2] = {-1 / dth, 1 / dth};
        const Real hat_z[2] = {(z_left + dz - z) / dz, (z - z_left) / dz};
        const Real dhat_z[2] = {-1 / dz, 1 / dz};

        for (int comp = 0; comp < 3; ++comp)
          for (int i_t = 0; i_t < n_t; ++i_t)
            for (int lth = 0; lth < 2; ++lth)
              for (int lz = 0; lz < 2; ++lz) {
                const Real val_t = i_t == qt ? 1.0 : 0.0;
                const Real base = hat_th[lth] * hat_z[lz];
                const Real n_val = val_t * base;
                const Real n_dt = w.t_deriv(qt, i_t) * base;
                const Real n_dth = val_t * dhat_th[lth] * hat_z[lz];
                const Real n_dz = val_t * hat_th[lth] * dhat_z[lz];
                Mat3& m = grads[((comp * n_t + i_t) * 2 + lth) * 2 + lz];
                m.setZero();
                m(comp, 0) = n_dt;
                m(comp, 1) = n_dth / den;
                m(comp, 2) = n_dz / a_z;
                if (comp == 0) m(1, 1) += c * n_val / den;
                if (comp == 1) {
                  m(0, 1) -= c * n_val / den;
                  m(2, 1) -= a * n_val / den;
                }
                if (comp == 2) m(1, 1) += a * n_val / den;
              }

        for (int i = 0; i < n_loc; ++i) {
          if (global[i] < 0) continue;
          for (int j = i; j < n_loc; ++j) {
            if (global[j] < 0) continue;
            const Real dot = grads[i].cwiseProduct(grads[j]).sum();
            const Real dot_t =
                grads[i].cwiseProduct(grads[j].transpose()).sum();
            ag(i, j) += wq * dot;
            ae(i, j) += wq * 0.5 * (dot + dot_t);
          }
        }
      }

  for (int i = 0; i < n_loc; ++i) {
    if (global[i] < 0) continue;
    for (int j = i; j < n_loc; ++j) {
      if (global[j] < 0) continue;
      out_e.emplace_back(global[i], global[j], ae(i, j));
      out_g.emplace_back(global[i], global[j], ag(i, j));
      if (i != j) {
        out_e.emplace_back(global[j], global[i], ae(i, j));
        out_g.emplace_back(global[j], global[i], ag(i, j));
      }
    }
  }
}

}  // namespace

FormPair assemble_forms(const ZeroGaussSurface& s, const Grid3& grid, Real h, BcTag bc,
                        GradientKind kind, int n_threads) {
  if (!(std::abs(h - grid.h) <= 1e-12 * grid.h))
    fail(ErrorCode::InvalidArgument, "thickness disagrees with the grid");
  if (n_threads < 1) n_threads = 1;

  FormPair fp;
  fp.dofs = make_dof_map(grid, bc);
  fp.meta.h = grid.h;
  fp.meta.n_t = grid.n_t;
  fp.meta.n_theta = grid.n_theta;
  fp.meta.n_z = grid.n_z;
  fp.meta.kind = kind;
  fp.meta.bc = bc;

  ElementWork work;
  work.s = &s;
  work.grid = &grid;
  work.dofs = &fp.dofs;
  work.kind = kind;
  work.t_deriv = lagrange_derivative_matrix(grid.t_nodes);
  work.n_loc = 3 * grid.n_t * 4;

  const int n_cells = grid.n_theta * (grid.n_z - 1);
  n_threads = std::min(n_threads, n_cells);

  // Each worker owns a contiguous cell range; concatenating the per-range
  // buffers in range order reproduces the serial triplet sequence exactly,
  // which is what makes the assembly bitwise independent of n_threads.
  std::vector<std::vector<Triplet>> chunk_e(n_threads), chunk_g(n_threads);
  std::vector<std::exception_ptr> errors(n_threads);
  const auto run_chunk = [&](int tid, int lo, int hi) {
    try {
      for (int cell = lo; cell < hi; ++cell)
        assemble_cell(work, cell, chunk_e[tid], chunk_g[tid]);
    } catch (...) {
      errors[tid] = std::current_exception();
    }
  };
  if (n_threads == 1) {
    run_chunk(0, 0, n_cells);
  } else {
    std::vector<std::thread> pool;
    const int per = (n_cells + n_threads - 1) / n_threads;
    for (int tid = 0; tid < n_threads; ++tid)
      pool.emplace_back(run_chunk, tid, tid * per, std::min(n_cells, (tid + 1) * per));
    for (std::thread& th : pool) th.join();
  }
  for (const std::exception_ptr& e : errors)
    if (e) std::rethrow_exception(e);

  std::vector<Triplet> all_e, all_g;
  std::size_t total = 0;
  for (const auto& v : chunk_e) total += v.size();
  all_e.reserve(total);
  all_g.reserve(total);
  for (int tid = 0; tid < n_threads; ++tid) {
    all_e.insert(all_e.end(), chunk_e[tid].begin(), chunk_e[tid].end());
    all_g.insert(all_g.end(), chunk_g[tid].begin(), chunk_g[tid].end());
  }

  fp.a_e.resize(fp.dofs.n_free, fp.dofs.n_free);
  fp.a_g.resize(fp.dofs.n_free, fp.dofs.n_free);
  fp.a_e.setFromTriplets(all_e.begin(), all_e.end());
  fp.a_g.setFromTriplets(all_g.begin(), all_g.end());
  return fp;
}

// ---------------------------------------------------------------------------
// Field interpolation and quotients
// ---------------------------------------------------------------------------

Eigen::VectorXd interpolate_field(const ZeroGaussSurface& s, const Grid3& grid,
                                  const DofMap& dofs, const DisplacementField& u) {
  (void)s;
  Eigen::VectorXd x = Eigen::VectorXd::Zero(dofs.n_free);
  for (int comp = 0; comp < 3; ++comp) {
    const ComponentTZ& f = comp == 0 ? u.u_t : comp == 1 ? u.u_theta : u.u_z;
    for (int i_t = 0; i_t < dofs.n_t; ++i_t)
      for (int j = 0; j < dofs.n_theta_cols; ++j)
        for (int k = 0; k < dofs.n_z; ++k) {
          const int idx = dofs.index_map[dofs.flat(comp, i_t, j, k)];
          if (idx < 0) continue;
          const Real theta = grid.p * Real(j) / Real(grid.n_theta);
          x[idx] = f.value(grid.t_nodes[i_t], theta, grid.z_nodes[k]);
        }
  }
  return x;
}

Real form_quotient(const FormPair& fp, const Eigen::VectorXd& x) {
  if (x.size() != fp.a_g.rows())
    fail(ErrorCode::InvalidArgument, "vector size disagrees with the forms");
  const Real den = x.dot(fp.a_g * x);
  if (!(den > 0))
    fail(ErrorCode::ZeroDenominator, "full-gradient form vanishes on this vector");
  return x.dot(fp.a_e * x) / den;
}

// ---------------------------------------------------------------------------
// Eigensolver
// ---------------------------------------------------------------------------

EigResult min_generalized_eig(const FormPair& fp, Real tol, int maxit,
                              std::uint64_t seed) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& a_e = fp.a_e;
  const auto& a_g = fp.a_g;
  const Eigen::Index n = a_g.rows();
  if (n < 1 || a_g.cols() != n || a_e.rows() != n || a_e.cols() != n)
    fail(ErrorCode::InvalidArgument, "forms must be square and equally sized");
  if (!(tol > 0) || maxit < 1)
    fail(ErrorCode::InvalidArgument, "need tol > 0 and maxit >= 1");

  // Definiteness probe: a factorization with a positive diagonal.
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> probe(a_g);
  if (probe.info() != Eigen::Success || probe.vectorD().minCoeff() <= 0)
    fail(ErrorCode::NotPD, "full-gradient form is not positive definite");

  // Preconditioner (a_e + sigma a_g)^-1 with a small spectral shift: close to
  // a_e^-1 where a_e is definite, well defined even when it is only
  // semidefinite.
  const Real tr_e = a_e.diagonal().sum(), tr_g = a_g.diagonal().sum();
  const Real sigma = 1e-6 * std::max(tr_e, Real(1e-300)) / tr_g;
  Eigen::SparseMatrix<Real> shifted = a_e + sigma * a_g;
  Eigen::SimplicialLDLT<Eigen::SparseMatrix<Real>> prec(shifted);
  const bool have_prec =
      prec.info() == Eigen::Success && prec.vectorD().minCoeff() > 0;

  std::mt19937_64 rng(seed);
  Eigen::VectorXd x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = (rng() >> 11) * 0x1.0p-53 - 0.5;
  x /= std::sqrt(x.dot(a_g * x));

  EigResult out;
  out.seed = seed;
  Eigen::VectorXd p_dir;
  bool have_p = false;
  bool converged = false;
  Real lam_prev = std::numeric_limits<Real>::infinity();

  for (int it = 1; it <= maxit; ++it) {
    const Eigen::VectorXd ex = a_e * x;
    const Eigen::VectorXd gx = a_g * x;
    const Real lam = x.dot(ex) / x.dot(gx);
    const Eigen::VectorXd r = ex - lam * gx;
    const Real res = r.norm() / gx.norm();

    out.lambda = lam;
    out.iterations = it;
    out.residual = res;
    out.quotient_history.push_back(lam);
    if (it > 1 && std::abs(lam_prev - lam) <= tol * std::max(std::abs(lam), Real(1e-300)) &&
        res <= tol) {
      converged = true;
      break;
    }
    lam_prev = lam;

    const Eigen::VectorXd w = have_prec ? prec.solve(r).eval() : r;

    // B-orthonormal Rayleigh-Ritz over span{x, w, previous direction}.
    std::vector<Eigen::VectorXd> basis;
    basis.push_back(x);
    std::vector<const Eigen::VectorXd*> candidates = {&w};
    if (have_p) candidates.push_back(&p_dir);
    for (const Eigen::VectorXd* cand : candidates) {
      Eigen::VectorXd v = *cand;
      for (const Eigen::VectorXd& b : basis) v -= b * b.dot(a_g * v);
      const Real nrm = std::sqrt(std::max(Real(0), v.dot(a_g * v)));
      if (nrm > 1e-9) basis.push_back(v / nrm);
    }
    const int k = int(basis.size());
    Eigen::MatrixXd he(k, k);
    for (int i = 0; i < k; ++i) {
      const Eigen::VectorXd aei = a_e * basis[i];
      for (int j = i; j < k; ++j) he(i, j) = he(j, i) = basis[j].dot(aei);
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(he);
    const Eigen::VectorXd y = es.eigenvectors().col(0);

    Eigen::VectorXd x_new = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < k; ++i) x_new += y[i] * basis[i];
    p_dir = x_new - y[0] * basis[0];
    have_p = p_dir.norm() > 0;
    x = x_new / std::sqrt(x_new.dot(a_g * x_new));
  }

  if (!converged) {
    std::ostringstream os;
    os << "eigensolver did not converge in " << maxit
       << " iterations (last residual " << out.residual << ")";
    fail(ErrorCode::NonConvergence, os.str());
  }
  out.vector = x;
  out.wall_time = std::chrono::duration<Real>(std::chrono::steady_clock::now() - t0).count();
  return out;
}

EigResult korn_constant(const ZeroGaussSurface& s, Real h, BcTag bc,
                        const ResolutionPolicy& policy, GradientKind kind, Real tol,
                        int maxit, std::uint64_t seed) {
  if (bc == BcTag::PeriodicOnly)
    fail(ErrorCode::InvalidArgument,
         "the periodic-only space contains rigid motions; use V1, V2, or V3");
  if (!(h > 0) || !(h < 1))
    fail(ErrorCode::InvalidArgument, "thickness h must lie in (0, 1)");
  const int n_theta =
      policy.n_theta > 0
          ? policy.n_theta
          : std::max(64, 40 * int(std::ceil(3.5 * std::pow(h, -0.25))));
  const Grid3 grid = make_grid(s, h, policy.n_t, n_theta, policy.n_z);
  const FormPair fp = assemble_forms(s, grid, h, bc, kind);
  return min_generalized_eig(fp, tol, maxit, seed);
}

// ---------------------------------------------------------------------------
// Binary container
// ---------------------------------------------------------------------------

namespace {

void put_u64(std::ostream& os, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = (v >> (8 * i)) & 0xff;
  os.write(reinterpret_cast<const char*>(b), 8);
}

void put_f64(std::ostream& os, Real v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(os, bits);
}

std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8] = {};
  is.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= std::uint64_t(b[i]) << (8 * i);
  return v;
}

Real get_f64(std::istream& is) {
  const std::uint64_t bits = get_u64(is);
  Real v;
  std::memcpy(&v, &bits, 8);
  return v;
}

void put_matrix(std::ostream& os, const Eigen::SparseMatrix<Real>& m) {
  for (int k = 0; k < m.outerSize(); ++k)
    for (Eigen::SparseMatrix<Real>::InnerIterator it(m, k); it; ++it) {
      put_u64(os, std::uint64_t(it.row()));
      put_u64(os, std::uint64_t(it.col()));
      put_f64(os, it.value());
    }
}

Eigen::SparseMatrix<Real> get_matrix(std::istream& is, std::uint64_t n,
                                     std::uint64_t nnz) {
  std::vector<Triplet> trips;
  trips.reserve(nnz);
  for (std::uint64_t i = 0; i < nnz; ++i) {
    const std::uint64_t r = get_u64(is), c = get_u64(is);
    const Real v = get_f64(is);
    if (!is || r >= n || c >= n)
      fail(ErrorCode::ParseError, "malformed triplet record");
    trips.emplace_back(int(r), int(c), v);
  }
  const Eigen::Index dim = Eigen::Index(n);
  Eigen::SparseMatrix<Real> m(dim, dim);
  m.setFromTriplets(trips.begin(), trips.end());
  return m;
}

constexpr char kMagic[4] = {'K', 'S', 'L', 'F'};
constexpr std::uint64_t kVersion = 1;

}  // namespace

void write_form_pair(const FormPair& fp, const std::string& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) fail(ErrorCode::IoFailure, "cannot open " + path + " for writing");
  os.write(kMagic, 4);
  put_u64(os, kVersion);
  put_u64(os, std::uint64_t(fp.dofs.n_free));
  put_u64(os, std::uint64_t(fp.meta.n_t));
  put_u64(os, std::uint64_t(fp.meta.n_theta));
  put_u64(os, std::uint64_t(fp.meta.n_z));
  put_f64(os, fp.meta.h);
  put_u64(os, fp.meta.kind == GradientKind::Full ? 0 : 1);
  put_u64(os, std::uint64_t(fp.meta.bc));
  put_u64(os, std::uint64_t(fp.a_e.nonZeros()));
  put_u64(os, std::uint64_t(fp.a_g.nonZeros()));
  put_matrix(os, fp.a_e);
  put_matrix(os, fp.a_g);
  if (!os.good()) fail(ErrorCode::IoFailure, "short write to " + path);
}

FormPairFile read_form_pair(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::IoFailure, "cannot open " + path + " for reading");
  char magic[4];
  is.read(magic, 4);
  if (!is || std::memcmp(magic, kMagic, 4) != 0)
    fail(ErrorCode::ParseError, "not a form-pair container (bad magic)");
  if (get_u64(is) != kVersion) fail(ErrorCode::ParseError, "unsupported version");

  FormPairFile out;
  const std::uint64_t n = get_u64(is);
  out.meta.n_t = int(get_u64(is));
  out.meta.n_theta = int(get_u64(is));
  out.meta.n_z = int(get_u64(is));
  out.meta.h = get_f64(is);
  out.meta.kind = get_u64(is) == 0 ? GradientKind::Full : GradientKind::Simplified;
  out.meta.bc = BcTag(get_u64(is));
  const std::uint64_t nnz_e = get_u64(is), nnz_g = get_u64(is);
  if (!is || n > (1u << 30) || nnz_e > (std::uint64_t(1) << 40) ||
      nnz_g > (std::uint64_t(1) << 40))
    fail(ErrorCode::ParseError, "implausible header dimensions");
  out.n_free = int(n);
  out.a_e = get_matrix(is, n, nnz_e);
  out.a_g = get_matrix(is, n, nnz_g);
  if (!is) fail(ErrorCode::ParseError, "truncated container");
  return out;
}

}  // namespace kslab
