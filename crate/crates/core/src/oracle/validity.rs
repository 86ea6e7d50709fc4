use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::model::{Ball, Cut, ParaboloidCut, Polyhedron, Provenance, Region, SeparatedCut};
use crate::oracle::containment::{check_ball_containment, Containment};
use crate::Vector;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityOptions {
    /// Number of random points drawn from the complement of `int P`.
    pub budget: usize,
    pub seed: u64,
    /// A residual below `-tol` is a counterexample.
    pub tol: f64,
    pub rays: usize,
}

impl Default for ValidityOptions {
    fn default() -> Self {
        Self { budget: 10_000, seed: 42, tol: 1e-7, rays: 100 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Validity {
    Valid { samples: usize },
    /// `point` is `x`; `w` is set for paraboloid complements. `residual`
    /// is the cut's slack at `q = ||x||^2`.
    CounterExample { point: Vector, w: Option<f64>, residual: f64, samples: usize },
}

impl Validity {
    pub fn is_valid(&self) -> bool {
        matches!(self, Validity::Valid { .. })
    }

    pub fn samples(&self) -> usize {
        match self {
            Validity::Valid { samples } | Validity::CounterExample { samples, .. } => *samples,
        }
    }
}

/// Slack of the cut at `(x, w, ||x||^2)`.
fn residual(cut: &SeparatedCut, d: usize, x: &Vector, w: f64) -> f64 {
    let q = x.norm_squared();
    match cut {
        SeparatedCut::Paraboloid(c) => c.evaluate(x, w, q),
        SeparatedCut::Standard(c) if c.dim() == d => c.evaluate(x, q),
        SeparatedCut::Standard(c) => {
            let beta_x = c.beta.rows(0, d);
            c.delta * q - 2.0 * beta_x.dot(x) - 2.0 * c.beta[d] * w - c.beta0
        }
    }
}

fn outside_interior(region: &Region, x: &Vector, w: f64) -> bool {
    match region {
        Region::Polyhedron(p) => !p.in_interior(x),
        Region::Ellipsoid(e) => !e.in_interior(x),
        Region::ParaboloidComplement(r) => !r.in_interior(x, w),
    }
}

fn check_shapes(region: &Region, cut: &SeparatedCut) -> Result<()> {
    let d = region.dim();
    let ok = match (region, cut) {
        (Region::ParaboloidComplement(_), SeparatedCut::Paraboloid(c)) => c.dim() == d,
        (Region::ParaboloidComplement(_), SeparatedCut::Standard(c)) => c.dim() == d || c.dim() == d + 1,
        (_, SeparatedCut::Standard(c)) => c.dim() == d,
        (_, SeparatedCut::Paraboloid(_)) => {
            return Err(Error::InvalidCut("paraboloid cuts need a paraboloid-complement region".into()))
        }
    };
    if ok {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected: d, found: cut_dim(cut) })
    }
}

fn cut_dim(cut: &SeparatedCut) -> usize {
    match cut {
        SeparatedCut::Standard(c) => c.dim(),
        SeparatedCut::Paraboloid(c) => c.dim(),
    }
}

/// Re-checks a reported counterexample from scratch: the point must be
/// outside `int P` and the cut's slack below `-tol`.
pub fn verify_counterexample(region: &Region, cut: &SeparatedCut, x: &Vector, w: Option<f64>, tol: f64) -> bool {
    if check_shapes(region, cut).is_err() || x.len() != region.dim() {
        return false;
    }
    let w = w.unwrap_or(0.0);
    outside_interior(region, x, w) && residual(cut, region.dim(), x, w) < -tol
}

/// `q = ||x||^2` form of a cut over `(x, w)`:
/// `q >= x_coeff'x + w_coeff w + constant`, when `delta > 0`.
fn affine_form(cut: &SeparatedCut, d: usize) -> Option<(Vector, f64, f64)> {
    match cut {
        SeparatedCut::Paraboloid(c) => Some((c.x_coeff.clone(), c.w_coeff, c.constant)),
        SeparatedCut::Standard(c) if c.delta > 0.0 => {
            let bx = c.beta.rows(0, d).into_owned() * (2.0 / c.delta);
            let bw = if c.dim() > d { 2.0 * c.beta[d] / c.delta } else { 0.0 };
            Some((bx, bw, c.beta0 / c.delta))
        }
        SeparatedCut::Standard(_) => None,
    }
}

/// Projection onto `H_j`, pushed outward by a relative `1e-12` so that
/// rounding cannot leave it in the open interior.
fn onto_facet(p: &Polyhedron, j: usize, x: &Vector) -> Vector {
    let a = p.normal(j);
    let an = a.norm();
    let y = x - a * (p.slack(j, x) / (an * an));
    let push = 1e-12 * (1.0 + y.amax());
    &y - a * (push / an)
}

struct Probe {
    x: Vector,
    w: f64,
}

/// Points where a failure is most likely: the violating-ball center, its
/// projections onto each facet hyperplane, the crossing of the ellipsoid
/// boundary toward a containment witness, and for paraboloid complements
/// the minimizer of the slack over each facet halfspace.
fn targeted_probes(region: &Region, cut: &SeparatedCut) -> Vec<Probe> {
    let d = region.dim();
    let mut probes = Vec::new();
    let Some((xc, wc, _)) = affine_form(cut, d) else {
        return probes;
    };
    match region {
        Region::Polyhedron(p) => {
            let center = &xc * 0.5;
            for j in 0..p.num_facets() {
                probes.push(Probe { x: onto_facet(p, j, &center), w: 0.0 });
            }
            probes.push(Probe { x: center, w: 0.0 });
        }
        Region::Ellipsoid(e) => {
            let center = &xc * 0.5;
            let Some(c) = cut.as_standard() else { return probes };
            let rho = c.beta.norm_squared() / (c.delta * c.delta) + c.beta0 / c.delta;
            if !e.in_interior(&center) || !(rho > 0.0) {
                probes.push(Probe { x: center, w: 0.0 });
                return probes;
            }
            if let Containment::Violated(wit) = check_ball_containment(region, &Ball { center: center.clone(), rho }) {
                // Bisection for the boundary crossing on [center, witness].
                let (mut lo, mut hi) = (0.0, 1.0);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    if e.value(&(&center + (&wit - &center) * mid)) >= 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                    }
                }
                probes.push(Probe { x: &center + (&wit - &center) * hi, w: 0.0 });
            }
        }
        Region::ParaboloidComplement(r) => {
            for j in 0..r.num_facets() {
                let x = (&xc + r.normal(j) * wc) * 0.5;
                let w = r.level(j, &x);
                probes.push(Probe { x, w });
            }
        }
    }
    probes
}

fn unit(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = v.norm();
        if norm > 1e-12 {
            return v / norm;
        }
    }
}

/// Samples the complement of `int P` (half uniformly in a box scaled to the
/// instance, half on the boundary), evaluates the cut at `q = ||x||^2`, adds
/// targeted probes and `rays` far-away points along random directions.
pub fn check_cut_validity(region: &Region, cut: &SeparatedCut, options: &ValidityOptions) -> Result<Validity> {
    check_shapes(region, cut)?;
    let d = region.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    let mut samples = 0usize;
    let mut worst: Option<(Vector, f64, f64)> = None;

    let test = |x: &Vector, w: f64, worst: &mut Option<(Vector, f64, f64)>, samples: &mut usize| {
        if !x.iter().all(|v| v.is_finite()) || !w.is_finite() || !outside_interior(region, x, w) {
            return;
        }
        *samples += 1;
        let r = residual(cut, d, x, w);
        if r < -options.tol && worst.as_ref().is_none_or(|(_, _, best)| r < *best) {
            *worst = Some((x.clone(), w, r));
        }
    };

    for probe in targeted_probes(region, cut) {
        test(&probe.x, probe.w, &mut worst, &mut samples);
    }

    // Box scale: ten times the radius that covers the region's reference
    // point, the cut's anchor and its violating ball.
    let (center, mut spread) = match region {
        Region::Polyhedron(p) => (p.interior_point().clone(), 0.0),
        Region::Ellipsoid(e) => {
            let axis = (e.center_level().max(0.0) / e.lambda_min().max(1e-300)).sqrt();
            (e.center(), axis)
        }
        Region::ParaboloidComplement(r) => {
            let anchor = cut.as_paraboloid().map(|c| c.anchor.clone()).unwrap_or_else(|| Vector::zeros(r.dim()));
            (anchor, 0.0)
        }
    };
    if let Some((xc, _, constant)) = affine_form(cut, d) {
        let beta = &xc * 0.5;
        spread = spread.max(beta.norm() + (beta.norm_squared() + constant).max(0.0).sqrt());
    }
    if let SeparatedCut::Standard(c) = cut {
        spread = spread.max(c.beta.norm());
    }
    let radius = 10.0 * (1.0 + center.norm() + spread);

    let uniform = options.budget / 2;
    let boundary = options.budget - uniform;
    let box_point = |rng: &mut ChaCha8Rng| Vector::from_fn(d, |k, _| center[k] + radius * rng.random_range(-1.0..1.0));

    match region {
        Region::ParaboloidComplement(r) => {
            for _ in 0..uniform {
                let x = box_point(&mut rng);
                let w = r.envelope(&x).0 - radius * rng.random::<f64>();
                test(&x, w, &mut worst, &mut samples);
            }
            for k in 0..boundary {
                let x = box_point(&mut rng);
                let w = if k % 2 == 0 { r.envelope(&x).0 } else { r.level(rng.random_range(0..r.num_facets()), &x) };
                test(&x, w, &mut worst, &mut samples);
            }
        }
        Region::Polyhedron(p) => {
            let mut drawn = 0;
            let mut attempts = 0;
            while drawn < uniform && attempts < 50 * uniform.max(1) {
                attempts += 1;
                let x = box_point(&mut rng);
                if !p.in_interior(&x) {
                    drawn += 1;
                    test(&x, 0.0, &mut worst, &mut samples);
                }
            }
            for _ in 0..boundary {
                let x = box_point(&mut rng);
                let j = rng.random_range(0..p.num_facets());
                test(&onto_facet(p, j, &x), 0.0, &mut worst, &mut samples);
            }
        }
        Region::Ellipsoid(e) => {
            let mut drawn = 0;
            let mut attempts = 0;
            while drawn < uniform && attempts < 50 * uniform.max(1) {
                attempts += 1;
                let x = box_point(&mut rng);
                if !e.in_interior(&x) {
                    drawn += 1;
                    test(&x, 0.0, &mut worst, &mut samples);
                }
            }
            let ec = e.center();
            let level = e.center_level();
            for _ in 0..boundary {
                let u = unit(&mut rng, d);
                let t = (level / u.dot(&(e.matrix() * &u))).sqrt() * (1.0 + 1e-12);
                test(&(&ec + u * t), 0.0, &mut worst, &mut samples);
            }
        }
    }

    // Far points along rays; a downward ray in w first for paraboloids.
    let n = match region {
        Region::ParaboloidComplement(_) => d + 1,
        _ => d,
    };
    for k in 0..options.rays {
        let u = if n > d && k == 0 {
            Vector::from_fn(n, |i, _| if i == d { -1.0 } else { 0.0 })
        } else {
            unit(&mut rng, n)
        };
        for scale in [1e1, 1e3, 1e6] {
            let t = scale * radius;
            let x = Vector::from_fn(d, |i, _| center[i] + t * u[i]);
            let w = if n > d { t * u[d] } else { 0.0 };
            test(&x, w, &mut worst, &mut samples);
        }
    }

    Ok(match worst {
        None => Validity::Valid { samples },
        Some((point, w, residual)) => Validity::CounterExample {
            point,
            w: matches!(region, Region::ParaboloidComplement(_)).then_some(w),
            residual,
            samples,
        },
    })
}

/// The same cut with its lifting coefficient raised by `delta`, when the
/// provenance records one.
pub fn inflate_lifting(region: &Region, cut: &SeparatedCut, delta: f64) -> Option<SeparatedCut> {
    match (region, cut) {
        (Region::Polyhedron(p), SeparatedCut::Standard(c)) => match &c.provenance {
            Provenance::LiftedFirstOrder { anchor, facet, alpha } => {
                let alpha = alpha + delta;
                Some(SeparatedCut::Standard(Cut {
                    delta: 1.0,
                    beta: anchor + p.normal(*facet) * alpha,
                    beta0: -anchor.norm_squared() - 2.0 * alpha * p.offset(*facet),
                    provenance: Provenance::LiftedFirstOrder { anchor: anchor.clone(), facet: *facet, alpha },
                }))
            }
            _ => None,
        },
        (Region::ParaboloidComplement(r), SeparatedCut::Paraboloid(c)) => {
            let alpha = c.alpha + delta;
            Some(SeparatedCut::Paraboloid(ParaboloidCut {
                x_coeff: &c.anchor * 2.0 - r.normal(c.facet) * alpha,
                w_coeff: alpha,
                constant: alpha * r.offset(c.facet) - c.anchor.norm_squared(),
                alpha,
                ..c.clone()
            }))
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Ellipsoid, ParaboloidComplement, Polyhedron};
    use crate::Matrix;

    fn v2(a: f64, b: f64) -> Vector {
        Vector::from_row_slice(&[a, b])
    }

    fn opts() -> ValidityOptions {
        ValidityOptions { budget: 10_000, ..ValidityOptions::default() }
    }

    #[test]
    fn inscribed_ball_cut_is_valid() {
        let sq = Region::Polyhedron(Polyhedron::cube(2, 0.0, 1.0).unwrap());
        let cut = SeparatedCut::Standard(Cut::from_ball(&Ball::new(v2(0.5, 0.5), 0.25).unwrap()));
        assert!(check_cut_validity(&sq, &cut, &opts()).unwrap().is_valid());
    }

    #[test]
    fn oversized_ball_cut_fails_and_reverifies() {
        let sq = Region::Polyhedron(Polyhedron::cube(2, 0.0, 1.0).unwrap());
        // q >= x1 + x2 - 0.2, ball of squared radius 0.3.
        let cut = SeparatedCut::Standard(Cut::from_ball(&Ball::new(v2(0.5, 0.5), 0.3).unwrap()));
        match check_cut_validity(&sq, &cut, &opts()).unwrap() {
            Validity::CounterExample { point, w, .. } => {
                assert!(verify_counterexample(&sq, &cut, &point, w, 1e-7));
            }
            Validity::Valid { .. } => panic!("expected a counterexample"),
        }
    }

    #[test]
    fn vee_cut_is_valid() {
        let r = ParaboloidComplement::from_rows(&[&[1.0], &[-1.0]], &[0.0, 0.0]).unwrap();
        let cut = crate::paraboloid::paraboloid_cut(&r, &Vector::from_element(1, 1.0), 0, 2.0).unwrap();
        let region = Region::ParaboloidComplement(r);
        let sep = SeparatedCut::Paraboloid(cut);
        assert!(check_cut_validity(&region, &sep, &opts()).unwrap().is_valid());
        let bigger = inflate_lifting(&region, &sep, 1e-3).unwrap();
        assert!(!check_cut_validity(&region, &bigger, &opts()).unwrap().is_valid());
    }

    #[test]
    fn ellipsoid_ball_cut() {
        let disk = Region::Ellipsoid(Ellipsoid::new(Matrix::identity(2, 2), Vector::zeros(2), -1.0).unwrap());
        let ok = SeparatedCut::Standard(Cut::from_ball(&Ball::new(v2(0.5, 0.0), 0.25).unwrap()));
        assert!(check_cut_validity(&disk, &ok, &opts()).unwrap().is_valid());
        let bad = SeparatedCut::Standard(Cut::from_ball(&Ball::new(v2(0.5, 0.0), 0.26).unwrap()));
        assert!(!check_cut_validity(&disk, &bad, &opts()).unwrap().is_valid());
    }

    #[test]
    fn complement_halfspace_and_rays() {
        let half = Region::Polyhedron(Polyhedron::from_rows(&[&[1.0, 0.0]], &[0.0]).unwrap());
        // x1 <= 0 holds off int P; x1 <= -1 does not.
        let good = Cut { delta: 0.0, beta: v2(0.5, 0.0), beta0: 0.0, provenance: Provenance::External };
        assert!(check_cut_validity(&half, &SeparatedCut::Standard(good), &opts()).unwrap().is_valid());
        let bad = Cut { delta: 0.0, beta: v2(0.5, 0.0), beta0: 1.0, provenance: Provenance::External };
        assert!(!check_cut_validity(&half, &SeparatedCut::Standard(bad), &opts()).unwrap().is_valid());
    }
}
