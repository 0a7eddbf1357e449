//! Dense convex QP solver for
//!
//! ```text
//! minimize   ½ vᵀ P v + qᵀ v
//! subject to G v <= h
//! ```
//!
//! Two methods are available. The default is a primal-dual interior-point
//! method with Mehrotra's predictor-corrector, which needs a few dozen
//! factorizations regardless of scaling. The alternative is an
//! operator-splitting scheme (ADMM with over-relaxation and adaptive step
//! size) on the split `z = G v`, `z <= h`. Both finish by solving the reduced
//! KKT system on the identified active set to polish the solution.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn, LU};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, GmrsError, Result};
use crate::linalg::inf_norm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QpMethod {
    #[default]
    InteriorPoint,
    Admm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QpSettings {
    pub method: QpMethod,
    /// Iteration cap of the interior-point method.
    pub ipm_max_iter: usize,
    /// Initial ADMM penalty.
    pub rho: f64,
    /// Proximal regularization on the primal variable.
    pub sigma: f64,
    /// Over-relaxation factor in (0, 2).
    pub alpha: f64,
    pub eps_abs: f64,
    pub eps_rel: f64,
    pub max_iter: usize,
    /// Iterations between residual-balancing updates of `rho`.
    pub adapt_interval: usize,
    pub polish: bool,
}

impl Default for QpSettings {
    fn default() -> Self {
        Self {
            method: QpMethod::InteriorPoint,
            ipm_max_iter: 200,
            rho: 0.1,
            sigma: 1e-6,
            alpha: 1.6,
            eps_abs: 1e-8,
            eps_rel: 1e-6,
            max_iter: 50_000,
            adapt_interval: 25,
            polish: true,
        }
    }
}

/// Infinity-norm KKT residuals of a candidate primal/dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct KktResiduals {
    /// `‖P v + q + Gᵀ μ‖`
    pub stationarity: f64,
    /// `‖max(G v − h, 0)‖`
    pub primal: f64,
    /// `‖max(−μ, 0)‖`
    pub dual: f64,
    /// `max |μᵢ (G v − h)ᵢ|`
    pub complementarity: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity
            .max(self.primal)
            .max(self.dual)
            .max(self.complementarity)
    }
}

#[derive(Debug, Clone)]
pub struct QpSolution {
    pub x: DVector<f64>,
    /// Multipliers of `G v <= h`.
    pub multipliers: DVector<f64>,
    pub objective: f64,
    pub iterations: usize,
    pub polished: bool,
    pub kkt: KktResiduals,
}

/// A QP in inequality form. `P` must be symmetric positive semidefinite.
#[derive(Debug, Clone)]
pub struct QpProblem {
    pub p: DMatrix<f64>,
    pub q: DVector<f64>,
    pub g: DMatrix<f64>,
    pub h: DVector<f64>,
}

impl QpProblem {
    pub fn new(p: DMatrix<f64>, q: DVector<f64>, g: DMatrix<f64>, h: DVector<f64>) -> Result<Self> {
        let n = q.len();
        check_dim(n, p.nrows())?;
        check_dim(n, p.ncols())?;
        check_dim(h.len(), g.nrows())?;
        if g.nrows() > 0 {
            check_dim(n, g.ncols())?;
        }
        Ok(Self { p, q, g, h })
    }

    pub fn objective(&self, x: &DVector<f64>) -> f64 {
        0.5 * x.dot(&(&self.p * x)) + self.q.dot(x)
    }

    pub fn kkt(&self, x: &DVector<f64>, mu: &DVector<f64>) -> KktResiduals {
        let slack = &self.g * x - &self.h;
        let grad = &self.p * x + &self.q + self.g.transpose() * mu;
        KktResiduals {
            stationarity: inf_norm(&grad),
            primal: slack.iter().fold(0.0, |m, s| m.max(*s)),
            dual: mu.iter().fold(0.0, |m, v| m.max(-*v)),
            complementarity: slack.iter().zip(mu.iter()).fold(0.0, |m, (s, v)| m.max((s * v).abs())),
        }
    }
}

/// KKT residual below which a solution is accepted.
pub const KKT_TOL: f64 = 1e-6;

/// Solves `min ½vᵀPv + qᵀv  s.t.  Gv <= h`.
pub fn solve_qp(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution> {
    let finite = |v: &f64| v.is_finite();
    if !(problem.h.iter().all(finite)
        && problem.q.iter().all(finite)
        && problem.p.iter().all(finite)
        && problem.g.iter().all(finite))
    {
        return Err(GmrsError::InvalidArgument("QP data must be finite".into()));
    }
    match settings.method {
        QpMethod::InteriorPoint => solve_interior_point(problem, settings),
        QpMethod::Admm => solve_admm(problem, settings),
    }
}

fn solve_interior_point(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution> {
    let n = problem.q.len();
    let m = problem.h.len();
    let g = &problem.g;
    let gt = g.transpose();
    let tol = 1e-11;
    let q_scale = 1.0 + inf_norm(&problem.q);
    let h_scale = 1.0 + inf_norm(&problem.h);

    let mut x = DVector::zeros(n);
    let mut s = (&problem.h - g * &x).map(|v| v.max(1.0));
    let mut z = DVector::from_element(m, 1.0);
    let mut iterations = 0;
    for k in 1..=settings.ipm_max_iter {
        iterations = k;
        let rd = &problem.p * &x + &problem.q + &gt * &z;
        let rp = g * &x + &s - &problem.h;
        let mu = if m == 0 { 0.0 } else { s.dot(&z) / m as f64 };
        if inf_norm(&rd) <= tol * q_scale && inf_norm(&rp) <= tol * h_scale && mu <= tol {
            break;
        }
        if m > 0 && is_primal_infeasible(problem, &z) {
            return Err(GmrsError::QpInfeasible(
                "found a certificate of primal infeasibility".into(),
            ));
        }

        let w = z.component_div(&s);
        let mut wg = g.clone();
        for (i, mut row) in wg.row_iter_mut().enumerate() {
            row *= w[i];
        }
        let kmat = &problem.p + &gt * &wg;
        let Some(factor) = regularized_factor(&kmat) else {
            break;
        };
        let newton = |rc: &DVector<f64>| {
            let rhs = -&rd + &gt * (rc - z.component_mul(&rp)).component_div(&s);
            let dx = factor.solve(&rhs);
            let gdx = g * &dx;
            let dz = (-rc + z.component_mul(&rp) + z.component_mul(&gdx)).component_div(&s);
            let ds = -&rp - gdx;
            (dx, ds, dz)
        };
        let max_step = |v: &DVector<f64>, dv: &DVector<f64>| {
            v.iter()
                .zip(dv.iter())
                .filter(|(_, d)| **d < 0.0)
                .fold(1.0f64, |a, (v, d)| a.min(-v / d))
        };

        let (_, ds_aff, dz_aff) = newton(&s.component_mul(&z));
        let a_aff = max_step(&s, &ds_aff).min(max_step(&z, &dz_aff));
        let mu_aff = if m == 0 {
            0.0
        } else {
            (&s + a_aff * &ds_aff).dot(&(&z + a_aff * &dz_aff)) / m as f64
        };
        let centering = if mu > 0.0 { (mu_aff / mu).powi(3) } else { 0.0 };
        let rc = s.component_mul(&z) + ds_aff.component_mul(&dz_aff) - DVector::from_element(m, centering * mu);
        let (dx, ds, dz) = newton(&rc);
        let a_max = max_step(&s, &ds).min(max_step(&z, &dz));
        let a = (0.99 * a_max).min(1.0);
        if a < 1e-14 {
            break;
        }
        x += a * dx;
        s += a * ds;
        z += a * dz;
    }

    let mut best = QpSolution {
        objective: problem.objective(&x),
        kkt: problem.kkt(&x, &z),
        x,
        multipliers: z.clone(),
        iterations,
        polished: false,
    };
    if settings.polish && best.kkt.max() > 1e-10 {
        let active: Vec<usize> = (0..m).filter(|&i| s[i] < z[i]).collect();
        if let Some(mut sol) = polish(problem, &active, 8) {
            if sol.kkt.max() < best.kkt.max() {
                sol.iterations = iterations;
                best = sol;
            }
        }
    }
    if best.kkt.max() <= KKT_TOL {
        Ok(best)
    } else {
        Err(GmrsError::QpNotConverged {
            iterations,
            primal: best.kkt.primal,
            dual: best.kkt.stationarity,
        })
    }
}

/// Cholesky of a symmetric positive semidefinite matrix, shifted slightly
/// when it is numerically singular.
fn regularized_factor(k: &DMatrix<f64>) -> Option<Cholesky<f64, Dyn>> {
    if let Some(c) = Cholesky::new(k.clone()) {
        return Some(c);
    }
    let scale = k.diagonal().amax().max(1.0);
    [1e-14, 1e-12, 1e-10].iter().find_map(|r| {
        let mut shifted = k.clone();
        for i in 0..shifted.nrows() {
            shifted[(i, i)] += r * scale;
        }
        Cholesky::new(shifted)
    })
}

fn solve_admm(problem: &QpProblem, settings: &QpSettings) -> Result<QpSolution> {
    let n = problem.q.len();
    let m = problem.h.len();

    let gt = problem.g.transpose();
    let gtg = &gt * &problem.g;
    let mut rho = settings.rho;
    let mut factor = factorize(&problem.p, &gtg, settings.sigma, rho)?;

    let mut x = DVector::zeros(n);
    let mut z = DVector::zeros(m);
    let mut y = DVector::zeros(m);

    let polish_check = |y: &DVector<f64>, z: &DVector<f64>| {
        let active = active_set_guess(problem, y, z);
        polish(problem, &active, 4).filter(|sol| sol.kkt.max() <= 1e-9)
    };

    let mut iterations = 0;
    let mut converged = false;
    let mut last_polish_attempt = 0;
    for k in 1..=settings.max_iter {
        iterations = k;
        let y_prev = y.clone();

        let rhs = settings.sigma * &x - &problem.q + &gt * (rho * &z - &y);
        let x_tilde = factor.solve(&rhs);
        let z_tilde = &problem.g * &x_tilde;
        x = settings.alpha * &x_tilde + (1.0 - settings.alpha) * &x;
        let z_relaxed = settings.alpha * &z_tilde + (1.0 - settings.alpha) * &z;
        z = (&z_relaxed + &y / rho).zip_map(&problem.h, |v, u| v.min(u));
        y += rho * (&z_relaxed - &z);

        let check = k % settings.adapt_interval == 0 || k == settings.max_iter;
        if !check {
            continue;
        }

        let gx = &problem.g * &x;
        let px = &problem.p * &x;
        let gty = &gt * &y;
        let r_prim = inf_norm(&(&gx - &z));
        let r_dual = inf_norm(&(&px + &problem.q + &gty));
        let prim_scale = inf_norm(&gx).max(inf_norm(&z));
        let dual_scale = inf_norm(&px).max(inf_norm(&gty)).max(inf_norm(&problem.q));
        let eps_prim = settings.eps_abs + settings.eps_rel * prim_scale;
        let eps_dual = settings.eps_abs + settings.eps_rel * dual_scale;

        if r_prim <= eps_prim && r_dual <= eps_dual {
            converged = true;
            break;
        }

        if is_primal_infeasible(problem, &(&y - &y_prev)) {
            return Err(GmrsError::QpInfeasible(
                "found a certificate of primal infeasibility".into(),
            ));
        }

        // The iterates usually settle on the right active set long before the
        // residuals reach the termination tolerances.
        if settings.polish && r_prim <= 1e-3 * (1.0 + prim_scale) && k >= last_polish_attempt + 200 {
            last_polish_attempt = k;
            if let Some(mut sol) = polish_check(&y, &z) {
                sol.iterations = k;
                return Ok(sol);
            }
        }

        // residual balancing
        let ratio = ((r_prim / prim_scale.max(1e-30)) / (r_dual / dual_scale.max(1e-30)).max(1e-30)).sqrt();
        let new_rho = (rho * ratio).clamp(1e-6, 1e6);
        if ratio.is_finite() && !(0.2..=5.0).contains(&ratio) {
            rho = new_rho;
            factor = factorize(&problem.p, &gtg, settings.sigma, rho)?;
        }
    }

    let admm_mu = y.map(|v| v.max(0.0));
    let mut best = QpSolution {
        objective: problem.objective(&x),
        kkt: problem.kkt(&x, &admm_mu),
        x: x.clone(),
        multipliers: admm_mu,
        iterations,
        polished: false,
    };
    if settings.polish {
        let active = active_set_guess(problem, &y, &z);
        if let Some(mut sol) = polish(problem, &active, 2 * m + 2) {
            if sol.kkt.max() <= best.kkt.max() {
                sol.iterations = iterations;
                best = sol;
            }
        }
    }
    if converged || best.kkt.max() <= KKT_TOL {
        Ok(best)
    } else {
        Err(GmrsError::QpNotConverged {
            iterations,
            primal: best.kkt.primal,
            dual: best.kkt.stationarity,
        })
    }
}

fn factorize(p: &DMatrix<f64>, gtg: &DMatrix<f64>, sigma: f64, rho: f64) -> Result<Cholesky<f64, Dyn>> {
    let mut k = p + rho * gtg;
    for i in 0..k.nrows() {
        k[(i, i)] += sigma;
    }
    Cholesky::new(k).ok_or(GmrsError::NotPositiveDefinite { jitter: sigma })
}

fn active_set_guess(problem: &QpProblem, y: &DVector<f64>, z: &DVector<f64>) -> Vec<usize> {
    (0..problem.h.len()).filter(|&i| problem.h[i] - z[i] < y[i]).collect()
}

/// Farkas-type certificate: `Gᵀδy ≈ 0`, `δy >= 0`, `hᵀδy < 0`.
fn is_primal_infeasible(problem: &QpProblem, dy: &DVector<f64>) -> bool {
    let norm = inf_norm(dy);
    if norm < 1e-12 {
        return false;
    }
    let eps = 1e-6;
    let dy = dy / norm;
    if dy.iter().any(|v| *v < -eps) {
        return false;
    }
    let dy = dy.map(|v| v.max(0.0));
    inf_norm(&(problem.g.transpose() * &dy)) <= eps && problem.h.dot(&dy) < -eps
}

/// Solves the equality-constrained problem on the guessed active set, then
/// corrects the set (dropping negative multipliers, adding violated rows)
/// until the KKT conditions hold or the budget runs out.
fn polish(problem: &QpProblem, active: &[usize], rounds: usize) -> Option<QpSolution> {
    let m = problem.h.len();
    let mut active: Vec<usize> = active.to_vec();
    let mut best: Option<QpSolution> = None;
    for _ in 0..rounds {
        let (x, mu_active) = solve_reduced_kkt(problem, &active)?;
        let mut mu = DVector::zeros(m);
        for (j, &i) in active.iter().enumerate() {
            mu[i] = mu_active[j];
        }
        let kkt = problem.kkt(&x, &mu);
        let candidate = QpSolution {
            objective: problem.objective(&x),
            x: x.clone(),
            multipliers: mu.clone(),
            iterations: 0,
            polished: true,
            kkt,
        };
        if best.as_ref().is_none_or(|b| kkt.max() < b.kkt.max()) {
            best = Some(candidate);
        }
        if kkt.max() <= 1e-10 {
            break;
        }

        let tol = 1e-10;
        let most_negative = active
            .iter()
            .enumerate()
            .filter(|(j, _)| mu_active[*j] < -tol)
            .min_by(|a, b| mu_active[a.0].total_cmp(&mu_active[b.0]));
        if let Some((j, _)) = most_negative {
            active.remove(j);
            continue;
        }
        let slack = &problem.g * &x - &problem.h;
        let most_violated = (0..m)
            .filter(|i| !active.contains(i) && slack[*i] > tol)
            .max_by(|a, b| slack[*a].total_cmp(&slack[*b]));
        match most_violated {
            Some(i) => active.push(i),
            None => break,
        }
    }
    best
}

fn solve_reduced_kkt(problem: &QpProblem, active: &[usize]) -> Option<(DVector<f64>, DVector<f64>)> {
    let n = problem.q.len();
    let a = active.len();
    let delta = 1e-10;
    let mut kkt = DMatrix::zeros(n + a, n + a);
    kkt.view_mut((0, 0), (n, n)).copy_from(&problem.p);
    for (j, &i) in active.iter().enumerate() {
        for c in 0..n {
            kkt[(n + j, c)] = problem.g[(i, c)];
            kkt[(c, n + j)] = problem.g[(i, c)];
        }
    }
    let mut rhs = DVector::zeros(n + a);
    rhs.rows_mut(0, n).copy_from(&(-&problem.q));
    for (j, &i) in active.iter().enumerate() {
        rhs[n + j] = problem.h[i];
    }

    // Regularized factorization followed by iterative refinement against the
    // exact system handles rank-deficient active sets.
    let mut reg = kkt.clone();
    for i in 0..n {
        reg[(i, i)] += delta;
    }
    for i in n..n + a {
        reg[(i, i)] -= delta;
    }
    let lu = LU::new(reg);
    let mut sol = lu.solve(&rhs)?;
    for _ in 0..10 {
        let r = &rhs - &kkt * &sol;
        if inf_norm(&r) < 1e-14 {
            break;
        }
        sol += lu.solve(&r)?;
    }
    if sol.iter().any(|v| !v.is_finite()) {
        return None;
    }
    Some((sol.rows(0, n).into_owned(), sol.rows(n, a).into_owned()))
}
