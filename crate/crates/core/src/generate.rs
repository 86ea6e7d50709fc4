//! Seeded random instances for tests, benchmarks and the `gen` command.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

use crate::instance::{Bounds, Instance};
use crate::model::{Ellipsoid, ParaboloidComplement, Polyhedron, QuadraticForm, Query, Region};
use crate::oracle::facet_center;
use crate::solver::{solve_qp, QpProblem, QpSettings, SolveStatus};
use crate::{Matrix, Vector};

pub fn random_unit<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Vector {
    loop {
        let v = Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-9 {
            return v / n;
        }
    }
}

/// Polyhedron with `m` unit normals around a center drawn from `[-1, 1]^d`,
/// each facet at distance `[0.5, 2]` from the center. Pairs of normals are
/// kept at least `acos(0.9)` apart so that no facet pair is nearly parallel.
///
/// Panics for `d = 1, m > 2`: a line has only two facet directions.
pub fn random_polyhedron<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> Polyhedron {
    assert!(d >= 2 || m <= 2, "a polyhedron in dimension 1 has at most 2 facets");
    let center = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let mut normals: Vec<Vector> = Vec::with_capacity(m);
    let mut attempts = 0;
    while normals.len() < m {
        attempts += 1;
        let a = random_unit(rng, d);
        let limit = if attempts < 10_000 { 0.9 } else { 0.999 };
        if normals.iter().all(|b| a.dot(b) <= limit) {
            normals.push(a);
        }
    }
    let offsets: Vec<f64> = normals.iter().map(|a| a.dot(&center) - rng.random_range(0.5..2.0)).collect();
    Polyhedron::with_interior_point(normals, offsets, center).expect("center is strictly interior")
}

/// Random rotation (QR of a Gaussian matrix).
pub fn random_rotation<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Matrix {
    let g = Matrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for k in 0..d {
        if r[(k, k)] < 0.0 {
            let col = -q.column(k);
            q.set_column(k, &col);
        }
    }
    q
}

/// Ellipsoid `(x - x0)'A(x - x0) <= K` with eigenvalues of `A` in `[0.5, 4]`,
/// `x0` in `[-1, 1]^d` and `K` in `[0.5, 2]`.
pub fn random_ellipsoid<R: Rng + ?Sized>(rng: &mut R, d: usize) -> Ellipsoid {
    let u = random_rotation(rng, d);
    let lambda = Vector::from_fn(d, |_, _| rng.random_range(0.5..4.0));
    let a = &u * Matrix::from_diagonal(&lambda) * u.transpose();
    let a = (&a + a.transpose()) * 0.5;
    let x0 = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
    let level = rng.random_range(0.5..2.0);
    let c = &a * &x0;
    let b = x0.dot(&c) - level;
    Ellipsoid::new(a, c, b).expect("symmetric positive definite")
}

/// Paraboloid complement with Gaussian normals and offsets.
pub fn random_paraboloid<R: Rng + ?Sized>(rng: &mut R, d: usize, m: usize) -> ParaboloidComplement {
    let normals = (0..m).map(|_| Vector::from_fn(d, |_, _| rng.sample::<f64, _>(StandardNormal))).collect();
    let offsets = (0..m).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
    ParaboloidComplement::new(normals, offsets).expect("finite data")
}

/// Point in the relative interior of facet `i`: start at the facet's
/// innermost point and move a random fraction of the way to the facet's
/// boundary along a random direction in `H_i`. `None` if the facet is empty.
pub fn random_facet_point<R: Rng + ?Sized>(rng: &mut R, p: &Polyhedron, i: usize) -> Option<Vector> {
    let (center, depth) = facet_center(p, i)?;
    if depth <= 1e-8 {
        return None;
    }
    let a = p.normal(i);
    let v = random_unit(rng, p.dim());
    let v = &v - a * (a.dot(&v) / a.norm_squared());
    let n = v.norm();
    if n <= 1e-12 {
        return Some(center);
    }
    let v = v / n;
    let mut reach = 10.0_f64;
    for j in (0..p.num_facets()).filter(|&j| j != i) {
        let rate = p.normal(j).dot(&v);
        if rate < 0.0 {
            reach = reach.min(p.slack(j, &center) / -rate);
        }
    }
    let y = center + v * (reach * rng.random_range(0.0..0.999));
    // Put y back on H_i exactly up to rounding.
    Some(&y - a * (p.slack(i, &y) / a.norm_squared()))
}

/// `x` whose envelope maximizer is facet `i` strictly, or `None` when facet
/// `i` never attains the envelope.
pub fn random_paraboloid_facet_point<R: Rng + ?Sized>(
    rng: &mut R,
    r: &ParaboloidComplement,
    i: usize,
) -> Option<Vector> {
    let d = r.dim();
    let m = r.num_facets();
    // max t  s.t.  level_i(x) - level_j(x) >= t (j != i),  t <= 1,  |x_k| <= 10.
    let n = d + 1;
    let mut rows: Vec<(Vector, f64)> = Vec::new();
    for j in (0..m).filter(|&j| j != i) {
        let mut row = Vector::zeros(n);
        row.rows_mut(0, d).copy_from(&(r.normal(i) - r.normal(j)));
        row[d] = -1.0;
        rows.push((row, r.offset(i) - r.offset(j)));
    }
    let mut cap = Vector::zeros(n);
    cap[d] = -1.0;
    rows.push((cap, -1.0));
    for k in 0..d {
        for sign in [1.0, -1.0] {
            let mut row = Vector::zeros(n);
            row[k] = sign;
            rows.push((row, -10.0));
        }
    }
    let mut ineq = Matrix::zeros(rows.len(), n);
    let mut rhs = Vector::zeros(rows.len());
    for (k, (row, c)) in rows.iter().enumerate() {
        ineq.set_row(k, &row.transpose());
        rhs[k] = *c;
    }
    let mut g = Vector::zeros(n);
    g[d] = -1.0;
    let qp = QpProblem::new(Matrix::zeros(n, n), g).with_inequalities(ineq, rhs);
    let out = solve_qp(&qp, &QpSettings { max_iter: 50 * (n + rows.len()), ..QpSettings::default() });
    if out.status != SolveStatus::Optimal || out.primal[d] <= 1e-8 {
        return None;
    }
    let center = out.primal.rows(0, d).into_owned();
    let v = random_unit(rng, d);
    let mut reach = 10.0_f64;
    for j in (0..m).filter(|&j| j != i) {
        let rate = (r.normal(i) - r.normal(j)).dot(&v);
        let gap = r.level(i, &center) - r.level(j, &center);
        if rate < 0.0 {
            reach = reach.min(gap / -rate);
        }
    }
    Some(center + v * (reach * rng.random_range(0.0..0.999)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceKind {
    Polyhedron,
    Ellipsoid,
    Paraboloid,
}

/// Instance with `Q(x) = ||x||^2`, a query strictly inside the region with
/// `q*` below the paraboloid, and a box of half-width 5 around the query.
/// `m` is ignored for ellipsoids.
pub fn random_instance<R: Rng + ?Sized>(rng: &mut R, kind: InstanceKind, d: usize, m: usize) -> Instance {
    let (region, x, w) = match kind {
        InstanceKind::Polyhedron => {
            let p = random_polyhedron(rng, d, m);
            let c = p.interior_point().clone();
            let x = &c + random_unit(rng, d) * (p.depth(&c) * rng.random_range(0.0..0.9));
            (Region::Polyhedron(p), x, None)
        }
        InstanceKind::Ellipsoid => {
            let e = random_ellipsoid(rng, d);
            let c = e.center();
            // Inside: (x - c)'A(x - c) = t^2 u'Au < K.
            let u = random_unit(rng, d);
            let t = (e.center_level() / u.dot(&(e.matrix() * &u))).sqrt() * rng.random_range(0.0..0.9);
            (Region::Ellipsoid(e), c + u * t, None)
        }
        InstanceKind::Paraboloid => {
            let r = random_paraboloid(rng, d, m);
            let x = Vector::from_fn(d, |_, _| rng.random_range(-1.0..1.0));
            let w = r.envelope(&x).0 + rng.random_range(0.1..1.0);
            (Region::ParaboloidComplement(r), x, Some(w))
        }
    };
    let q = x.norm_squared() - rng.random_range(0.1..1.0);
    let query = Query { x: x.clone(), w, q };
    let bounds = Bounds {
        lo: x.map(|v| v - 5.0),
        hi: x.map(|v| v + 5.0),
        q_lo: q - 10.0,
        q_hi: x.norm_squared() + 50.0 * (1.0 + d as f64),
    };
    Instance::new(QuadraticForm::squared_norm(d), region, query)
        .and_then(|i| i.with_bounds(bounds))
        .expect("generated data is consistent")
}

/// [`random_instance`] driven by a ChaCha8 stream seeded with `seed`.
pub fn seeded_instance(seed: u64, kind: InstanceKind, d: usize, m: usize) -> Instance {
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    random_instance(&mut rng, kind, d, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn facet_points_lie_on_their_facet() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..20 {
            let p = random_polyhedron(&mut rng, 3, 8);
            for i in 0..p.num_facets() {
                if let Some(y) = random_facet_point(&mut rng, &p, i) {
                    assert!(p.slack(i, &y).abs() <= 1e-10);
                    assert!(p.contains(&y, 1e-10));
                }
            }
        }
    }

    #[test]
    fn ellipsoids_are_bounded_with_interior() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for d in 1..=5 {
            let e = random_ellipsoid(&mut rng, d);
            assert!(e.is_bounded());
            assert!(e.center_level() > 0.0);
        }
    }

    #[test]
    fn paraboloid_facet_points_select_their_facet() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let r = random_paraboloid(&mut rng, 2, 5);
        for i in 0..5 {
            if let Some(x) = random_paraboloid_facet_point(&mut rng, &r, i) {
                assert_eq!(r.envelope(&x).1, i);
            }
        }
    }
}
