use crate::linalg::{least_squares, max_abs, solve_spd};
use crate::{Matrix, Vector};

/// `min f(z)  s.t.  g_k(z) >= 0` with `f` convex and each `g_k` concave.
pub trait BarrierProblem {
    fn dim(&self) -> usize;

    fn num_constraints(&self) -> usize;

    /// Value, gradient and Hessian of the objective.
    fn objective(&self, z: &Vector) -> (f64, Vector, Matrix);

    /// Value, gradient and Hessian of every constraint, or `None` when `z`
    /// is outside the domain where they are defined.
    fn constraints(&self, z: &Vector) -> Option<Vec<(f64, Vector, Matrix)>>;
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BarrierSettings {
    pub initial_weight: f64,
    pub shrink: f64,
    /// Stop once `weight * (1 + #constraints)` drops to this value.
    pub stop: f64,
    pub max_newton: usize,
}

impl Default for BarrierSettings {
    fn default() -> Self {
        Self { initial_weight: 1.0, shrink: 0.2, stop: 1e-10, max_newton: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BarrierResult {
    pub z: Vector,
    /// Multiplier estimates: `weight / g_k(z)`, refined by least squares for
    /// nearly active constraints.
    pub duals: Vector,
    pub iterations: usize,
    pub weight: f64,
    /// `|| grad f - sum_k duals_k grad g_k ||_inf` at the returned point.
    pub stationarity: f64,
    /// `max_k duals_k g_k`.
    pub complementarity: f64,
    pub converged: bool,
}

/// Log-barrier path following with damped Newton centering. `z0` must be
/// strictly feasible.
pub fn barrier_minimize<P: BarrierProblem>(
    problem: &P,
    z0: Vector,
    settings: &BarrierSettings,
) -> BarrierResult {
    let m = problem.num_constraints();
    let mut z = z0;
    let mut weight = settings.initial_weight;
    let mut iterations = 0;
    let mut converged = true;

    loop {
        let (used, ok) = center(problem, &mut z, weight, settings.max_newton);
        iterations += used;
        converged &= ok;
        if weight * (1.0 + m as f64) <= settings.stop {
            break;
        }
        weight *= settings.shrink;
    }

    let cons = problem.constraints(&z).expect("iterates stay in the domain");
    let (_, grad_f, _) = problem.objective(&z);
    let duals = refine_duals(&grad_f, &cons, weight);
    let mut station = grad_f;
    let mut comp: f64 = 0.0;
    for (k, (g, dg, _)) in cons.iter().enumerate() {
        station -= dg * duals[k];
        comp = comp.max(duals[k] * g);
    }
    BarrierResult {
        stationarity: max_abs(&station),
        complementarity: comp,
        z,
        duals,
        iterations,
        weight,
        converged,
    }
}

/// Multipliers from the final iterate. `weight / g_k` carries the relative
/// rounding error of `g_k`, which is large for nearly active constraints, so
/// the multipliers of those constraints are recomputed by least squares on
/// the stationarity condition (falling back to `weight / g_k` if that yields
/// a negative value).
fn refine_duals(grad_f: &Vector, cons: &[(f64, Vector, Matrix)], weight: f64) -> Vector {
    let m = cons.len();
    let mut duals = Vector::from_fn(m, |k, _| weight / cons[k].0);
    let threshold = weight.sqrt();
    let active: Vec<usize> = (0..m).filter(|&k| cons[k].0 <= threshold).collect();
    if active.is_empty() {
        return duals;
    }
    let n = grad_f.len();
    let mut rhs = grad_f.clone();
    for k in 0..m {
        if !active.contains(&k) {
            rhs -= &cons[k].1 * duals[k];
        }
    }
    let mut jac = Matrix::zeros(n, active.len());
    for (col, &k) in active.iter().enumerate() {
        jac.set_column(col, &cons[k].1);
    }
    let lam = least_squares(&jac, &rhs);
    if lam.iter().all(|l| *l >= 0.0) {
        for (col, &k) in active.iter().enumerate() {
            duals[k] = lam[col];
        }
    }
    duals
}

fn barrier_value<P: BarrierProblem>(problem: &P, z: &Vector, weight: f64) -> Option<f64> {
    let cons = problem.constraints(z)?;
    let mut value = problem.objective(z).0;
    for (g, _, _) in &cons {
        if !(*g > 0.0) {
            return None;
        }
        value -= weight * g.ln();
    }
    Some(value)
}

/// Newton iterations on `f - weight * sum log g_k`. Returns the number of
/// steps and whether the Newton decrement reached its tolerance.
fn center<P: BarrierProblem>(problem: &P, z: &mut Vector, weight: f64, max_newton: usize) -> (usize, bool) {
    for step in 0..max_newton {
        let cons = problem.constraints(z).expect("iterates stay in the domain");
        let (f, mut grad, mut hess) = problem.objective(z);
        let mut value = f;
        for (g, dg, d2g) in &cons {
            value -= weight * g.ln();
            grad -= dg * (weight / g);
            hess += (dg * dg.transpose()) * (weight / (g * g)) - d2g * (weight / g);
        }
        let dir = -solve_spd(&hess, &grad);
        let slope = grad.dot(&dir);
        // Squared Newton decrement of the scaled barrier f / weight - sum log g.
        let dec2 = -slope / weight;
        if !(slope < 0.0) || dec2 <= 1e-20 {
            return (step, true);
        }
        let mut t = 1.0;
        let mut accepted = false;
        while t > 1e-20 {
            let trial = &*z + &dir * t;
            if trial == *z {
                // Below the resolution of the iterate.
                return (step + 1, dec2 <= 1e-8);
            }
            if let Some(v) = barrier_value(problem, &trial, weight) {
                // Inside the quadratic convergence region the Armijo test is
                // swamped by rounding in f, so only the domain is checked.
                if dec2 < 0.25 || v <= value + 0.25 * t * slope {
                    *z = trial;
                    accepted = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !accepted {
            return (step + 1, dec2 <= 1e-8);
        }
    }
    (max_newton, false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    /// min (z - 3)^2 s.t. 1 - z^2 >= 0
    struct Interval;

    impl BarrierProblem for Interval {
        fn dim(&self) -> usize {
            1
        }
        fn num_constraints(&self) -> usize {
            1
        }
        fn objective(&self, z: &Vector) -> (f64, Vector, Matrix) {
            let d = z[0] - 3.0;
            (d * d, Vector::from_element(1, 2.0 * d), Matrix::from_element(1, 1, 2.0))
        }
        fn constraints(&self, z: &Vector) -> Option<Vec<(f64, Vector, Matrix)>> {
            Some(vec![(
                1.0 - z[0] * z[0],
                Vector::from_element(1, -2.0 * z[0]),
                Matrix::from_element(1, 1, -2.0),
            )])
        }
    }

    #[test]
    fn boundary_optimum() {
        let r = barrier_minimize(&Interval, Vector::zeros(1), &BarrierSettings::default());
        assert!(r.converged);
        assert_abs_diff_eq!(r.z[0], 1.0, epsilon = 1e-9);
        // grad f = -4 = dual * grad g = dual * (-2)
        assert_abs_diff_eq!(r.duals[0], 2.0, epsilon = 1e-6);
        assert!(r.stationarity <= 1e-8);
    }
}
