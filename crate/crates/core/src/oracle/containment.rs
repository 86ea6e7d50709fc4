use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::model::{Ball, Ellipsoid, ParaboloidComplement, Region};
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub enum Containment {
    Contained,
    /// A point of the closed ball outside the region. For paraboloid
    /// complements the ball and the witness live in `(x, w)` space.
    Violated(Vector),
}

impl Containment {
    pub fn is_contained(&self) -> bool {
        matches!(self, Containment::Contained)
    }
}

/// `B(mu, sqrt(rho)) ⊆ P`, exact for polyhedra, multistart for ellipsoids.
pub fn check_ball_containment(region: &Region, ball: &Ball) -> Containment {
    check_ball_containment_tol(region, ball, 0.0)
}

/// As [`check_ball_containment`], allowing the ball to cross the boundary
/// by `tol` (a distance for polyhedra, a constraint value for ellipsoids).
pub fn check_ball_containment_tol(region: &Region, ball: &Ball, tol: f64) -> Containment {
    match region {
        Region::Polyhedron(p) => polyhedron(p.normals(), p.offsets(), ball, tol),
        Region::ParaboloidComplement(r) => paraboloid(r, ball, tol),
        Region::Ellipsoid(e) => ellipsoid(e, ball, tol),
    }
}

/// `a_j'x >= b_j` for all `j`: compare each facet distance with the radius.
fn polyhedron(normals: &[Vector], offsets: &[f64], ball: &Ball, tol: f64) -> Containment {
    let r = ball.radius();
    for (a, b) in normals.iter().zip(offsets) {
        let n = a.norm();
        let dist = (a.dot(&ball.center) - b) / n;
        if dist < r - tol {
            return Containment::Violated(&ball.center - a * (r / n));
        }
    }
    Containment::Contained
}

/// `P` as the polyhedron `-a_i'x + w >= -b_i` in `(x, w)`.
fn paraboloid(r: &ParaboloidComplement, ball: &Ball, tol: f64) -> Containment {
    let d = r.dim();
    let normals: Vec<Vector> = r
        .normals()
        .iter()
        .map(|a| {
            let mut v = Vector::zeros(d + 1);
            v.rows_mut(0, d).copy_from(&(-a));
            v[d] = 1.0;
            v
        })
        .collect();
    let offsets: Vec<f64> = r.offsets().iter().map(|b| -b).collect();
    polyhedron(&normals, &offsets, ball, tol)
}

/// Maximizes `f(x) = x'Ax - 2c'x + b` over the sphere `||x - mu|| = r`.
/// Uses the closed form when `A` is a multiple of the identity and
/// otherwise 64 starts of the ascent `u <- normalize(grad f(mu + r u))`,
/// which increases a convex `f` at every step.
fn ellipsoid(e: &Ellipsoid, ball: &Ball, tol: f64) -> Containment {
    let mu = &ball.center;
    let r = ball.radius();
    let a = e.matrix();
    let c = e.linear();
    let d = e.dim();
    let grad = |x: &Vector| (a * x - c) * 2.0;

    if e.value(mu) > tol {
        return Containment::Violated(mu.clone());
    }
    if r == 0.0 {
        return Containment::Contained;
    }

    let kappa = a[(0, 0)];
    let scalar = (0..d).all(|i| (0..d).all(|j| a[(i, j)] == if i == j { kappa } else { 0.0 }));
    if scalar {
        let g = grad(mu);
        let gn = g.norm();
        let u = if gn > 0.0 { g / gn } else { Vector::from_fn(d, |k, _| if k == 0 { 1.0 } else { 0.0 }) };
        let x = mu + u * r;
        return if e.value(&x) > tol { Containment::Violated(x) } else { Containment::Contained };
    }

    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut starts: Vec<Vector> = Vec::with_capacity(64);
    // Axis and gradient starts first, then random directions.
    let g0 = grad(mu);
    if g0.norm() > 0.0 {
        starts.push(g0.normalize());
    }
    for k in 0..d {
        let mut axis = Vector::zeros(d);
        axis[k] = 1.0;
        let dir = a * &axis;
        let dir = if dir.norm() > 0.0 { dir.normalize() } else { axis };
        starts.push(dir.clone());
        starts.push(-dir);
    }
    while starts.len() < 64 {
        let v = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        if v.norm() > 0.0 {
            starts.push(v.normalize());
        }
    }

    let mut best: Option<(f64, Vector)> = None;
    for mut u in starts {
        let mut val = e.value(&(mu + &u * r));
        for _ in 0..5000 {
            let g = grad(&(mu + &u * r));
            let gn = g.norm();
            if gn == 0.0 {
                break;
            }
            let next = g / gn;
            let next_val = e.value(&(mu + &next * r));
            if next_val <= val + 1e-16 * (1.0 + val.abs()) {
                if next_val > val {
                    u = next;
                    val = next_val;
                }
                break;
            }
            u = next;
            val = next_val;
        }
        if best.as_ref().is_none_or(|(v, _)| val > *v) {
            best = Some((val, u));
        }
    }
    let (val, u) = best.expect("at least one start");
    if val > tol {
        Containment::Violated(mu + u * r)
    } else {
        Containment::Contained
    }
}
