use crate::linalg::max_abs;
use crate::solver::qp::QpProblem;
use crate::Vector;

/// Infinity-norm KKT residuals of a candidate primal-dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct KktResiduals {
    pub stationarity: f64,
    pub primal: f64,
    pub complementarity: f64,
    /// Largest negative part of the inequality multipliers.
    pub dual: f64,
}

impl KktResiduals {
    pub fn max(&self) -> f64 {
        self.stationarity.max(self.primal).max(self.complementarity).max(self.dual)
    }
}

/// Checks `H z + g = E' lambda + C' mu`, `E z = e`, `C z >= c`, `mu >= 0`
/// and `mu_k (C_k z - c_k) = 0` for `min 1/2 z'Hz + g'z`.
pub fn audit_kkt(p: &QpProblem, z: &Vector, eq_duals: &Vector, ineq_duals: &Vector) -> KktResiduals {
    let mut station = &p.h * z + &p.g;
    if p.eq_mat.nrows() > 0 {
        station -= p.eq_mat.transpose() * eq_duals;
    }
    if p.ineq_mat.nrows() > 0 {
        station -= p.ineq_mat.transpose() * ineq_duals;
    }
    let eq_res = if p.eq_mat.nrows() > 0 { max_abs(&(&p.eq_mat * z - &p.eq_rhs)) } else { 0.0 };
    let mut primal = eq_res;
    let mut comp: f64 = 0.0;
    let mut dual: f64 = 0.0;
    for k in 0..p.ineq_mat.nrows() {
        let slack = p.ineq_mat.row(k).dot(&z.transpose()) - p.ineq_rhs[k];
        primal = primal.max(-slack);
        comp = comp.max((ineq_duals[k] * slack).abs());
        dual = dual.max(-ineq_duals[k]);
    }
    KktResiduals { stationarity: max_abs(&station), primal, complementarity: comp, dual }
}

/// How well `(lambda, u)` certifies infeasibility of `E z = e, C z >= c`:
/// a certificate has `E' lambda + C' u = 0`, `u >= 0` and `e' lambda + c' u > 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FarkasGap {
    pub combination: f64,
    pub bound: f64,
    pub min_multiplier: f64,
}

pub fn farkas_certificate_gap(p: &QpProblem, eq_duals: &Vector, ineq_duals: &Vector) -> FarkasGap {
    let n = p.dim();
    let mut comb = Vector::zeros(n);
    let mut bound = 0.0;
    if p.eq_mat.nrows() > 0 {
        comb += p.eq_mat.transpose() * eq_duals;
        bound += p.eq_rhs.dot(eq_duals);
    }
    if p.ineq_mat.nrows() > 0 {
        comb += p.ineq_mat.transpose() * ineq_duals;
        bound += p.ineq_rhs.dot(ineq_duals);
    }
    let min_multiplier = ineq_duals.iter().cloned().fold(f64::INFINITY, f64::min);
    FarkasGap { combination: max_abs(&comb), bound, min_multiplier }
}
