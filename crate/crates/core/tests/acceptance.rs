//! Acceptance run: one PASS/FAIL line per criterion. Exits nonzero if any
//! criterion fails.

use std::time::Instant;

use liftcut::ellipsoid::{containment_margin, fixed_rho_separate, max_inscribed_rho, separate_ellipsoid};
use liftcut::generate::{
    random_ellipsoid, random_facet_point, random_paraboloid, random_paraboloid_facet_point, random_polyhedron,
    random_unit, seeded_instance, InstanceKind,
};
use liftcut::cutloop::{demo_loop, LoopOptions, Objective};
use liftcut::model::{Ball, Ellipsoid, ParaboloidComplement, Polyhedron, Region};
use liftcut::oracle::{
    brute_force_alpha, check_ball_containment, check_cut_validity, inflate_lifting, probe_concavity_values,
    Concavity, ValidityOptions,
};
use liftcut::paraboloid::{lifting_quadratic, paraboloid_alpha};
use liftcut::poly::{max_alpha, separate_poly, SeparationOptions};
use liftcut::Vector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// 500 polyhedra, d in {2, 3, 5}, m <= 12: analytic lifting vs bisection.
fn c1_affine_lifting() -> Outcome {
    let mut r = rng(1);
    let (mut worst, mut checked) = (0.0f64, 0);
    let mut failures = 0;
    let mut k = 0;
    while checked < 500 {
        k += 1;
        let d = [2, 3, 5][k % 3];
        let m = r.random_range(d + 1..=12);
        let p = random_polyhedron(&mut r, d, m);
        let i = r.random_range(0..m);
        let Some(y) = random_facet_point(&mut r, &p, i) else { continue };
        let a = max_alpha(&p, &y, i).unwrap();
        let b = brute_force_alpha(&p, &y, i).unwrap();
        checked += 1;
        let err = if a.is_infinite() && b.is_infinite() { 0.0 } else { (a - b).abs() };
        worst = worst.max(err);
        if !(err <= 1e-8) {
            failures += 1;
        }
    }
    outcome(failures == 0, format!("{checked} instances, max |diff| {worst:.2e}, {failures} over 1e-8"))
}

fn mixed_instance(k: u64) -> liftcut::Instance {
    let d = 2 + (k as usize % 4);
    let m = d + 2 + (k as usize % 5);
    let kind = [InstanceKind::Polyhedron, InstanceKind::Ellipsoid, InstanceKind::Paraboloid][k as usize % 3];
    seeded_instance(1000 + k, kind, d, m)
}

/// Every separated cut on 200 instances passes the sampling oracle.
fn c2_validity() -> Outcome {
    let opts = ValidityOptions { budget: 10_000, ..ValidityOptions::default() };
    let mut bad = Vec::new();
    let mut worst = 0.0f64;
    for k in 0..200 {
        let inst = mixed_instance(k);
        let report = inst.separate(&SeparationOptions::default()).unwrap();
        match check_cut_validity(&inst.region, &report.cut, &opts).unwrap() {
            liftcut::oracle::Validity::Valid { .. } => {}
            liftcut::oracle::Validity::CounterExample { residual, .. } => {
                worst = worst.min(residual);
                bad.push(k);
            }
        }
    }
    outcome(bad.is_empty(), format!("200 cuts, {} counterexamples (worst residual {worst:.2e}) {bad:?}", bad.len()))
}

/// Raising a finite lifting coefficient by 1e-3 breaks validity.
fn c3_maximality() -> Outcome {
    let opts = ValidityOptions { budget: 10_000, ..ValidityOptions::default() };
    let (mut tested, mut survived) = (0, Vec::new());
    for k in 0..200 {
        let inst = mixed_instance(k);
        let report = inst.separate(&SeparationOptions::default()).unwrap();
        let Some(inflated) = inflate_lifting(&inst.region, &report.cut, 1e-3) else { continue };
        tested += 1;
        if check_cut_validity(&inst.region, &inflated, &opts).unwrap().is_valid() {
            survived.push(k);
        }
    }
    outcome(
        survived.is_empty() && tested > 0,
        format!("{tested} lifted cuts inflated, {} still valid {survived:?}", survived.len()),
    )
}

fn c4_unit_square() -> Outcome {
    let p = Polyhedron::cube(2, 0.0, 1.0).unwrap();
    let rep = separate_poly(&p, &Vector::from_row_slice(&[0.5, 0.5]), 0.5).unwrap();
    let cut = rep.cut.as_standard().unwrap();
    let ok = (rep.violation - 0.25).abs() <= 1e-6
        && (cut.beta[0] - 0.5).abs() <= 1e-6
        && (cut.beta[1] - 0.5).abs() <= 1e-6
        && (cut.beta0 + 0.25).abs() <= 1e-6
        && cut.delta == 1.0;
    outcome(ok, format!("violation {:.12}, beta ({:.9}, {:.9}), beta0 {:.9}", rep.violation, cut.beta[0], cut.beta[1], cut.beta0))
}

/// Sign of the S-lemma margin vs the multistart geometric oracle.
fn c5_slemma_soundness() -> Outcome {
    let mut r = rng(5);
    let (mut disagree, mut near, mut contained) = (0, 0, 0);
    for k in 0..500 {
        let d = 2 + k % 4;
        let e = random_ellipsoid(&mut r, d);
        let rho_max = max_inscribed_rho(&e).unwrap();
        let center = e.center() + random_unit(&mut r, d) * r.random_range(0.0..1.0) * rho_max.sqrt();
        let ball = Ball::new(center, r.random_range(0.0..1.5) * rho_max).unwrap();
        let (margin, _) = containment_margin(&e, &ball).unwrap();
        let inside = check_ball_containment(&Region::Ellipsoid(e), &ball).is_contained();
        contained += inside as usize;
        if (margin >= 0.0) != inside {
            if margin.abs() <= 1e-6 {
                near += 1;
            } else {
                disagree += 1;
            }
        }
    }
    outcome(
        disagree == 0 && contained > 50 && contained < 450,
        format!("500 pairs ({contained} contained), {disagree} disagreements, {near} within |margin| <= 1e-6"),
    )
}

fn c6_unit_disk() -> Outcome {
    let disk = Ellipsoid::ball(&Vector::zeros(2), 1.0).unwrap();
    let mut r = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..500 {
        let mu = random_unit(&mut r, 2) * r.random_range(0.0..1.5);
        let rho: f64 = r.random_range(0.0..1.5);
        let (margin, _) = containment_margin(&disk, &Ball::new(mu.clone(), rho).unwrap()).unwrap();
        let closed = 1.0 - (mu.norm() + rho.sqrt()).powi(2);
        worst = worst.max((margin - closed).abs());
    }
    let rep = separate_ellipsoid(&disk, &Vector::zeros(2), 0.0).unwrap();
    let cut = rep.cut.as_standard().unwrap();
    let cut_ok = (rep.violation - 1.0).abs() <= 1e-5 && cut.beta.amax() <= 1e-5 && (cut.beta0 - 1.0).abs() <= 1e-5;
    outcome(
        worst <= 1e-7 && cut_ok,
        format!("max margin error {worst:.2e}; origin violation {:.9}, cut beta0 {:.9}", rep.violation, cut.beta0),
    )
}

fn ellipsoid_query(r: &mut ChaCha8Rng, e: &Ellipsoid) -> (Vector, f64) {
    let d = e.dim();
    let u = random_unit(r, d);
    let t = (e.center_level() / u.dot(&(e.matrix() * &u))).sqrt() * r.random_range(0.0..0.9);
    let x = e.center() + u * t;
    let q = x.norm_squared() - r.random_range(0.1..1.0);
    (x, q)
}

/// Theta concave and N convex on 100-point grids, 50 ellipsoids.
fn c7_concavity() -> Outcome {
    let mut r = rng(7);
    let (mut theta_bad, mut n_bad) = (0, 0);
    for k in 0..50 {
        let e = random_ellipsoid(&mut r, 2 + k % 3);
        let (x, q) = ellipsoid_query(&mut r, &e);
        let rho_max = max_inscribed_rho(&e).unwrap();
        let grid: Vec<f64> = (0..100).map(|s| rho_max * s as f64 / 99.0).collect();
        let mut theta = Vec::new();
        let mut neg_n = Vec::new();
        for &rho in &grid {
            let out = fixed_rho_separate(&e, &x, q, rho).unwrap();
            theta.push(out.theta);
            neg_n.push(-(&x - &out.mu).norm_squared());
        }
        if !matches!(probe_concavity_values(&grid, &theta, 1e-6), Concavity::Concave(_)) {
            theta_bad += 1;
        }
        if !matches!(probe_concavity_values(&grid, &neg_n, 1e-6), Concavity::Concave(_)) {
            n_bad += 1;
        }
    }
    outcome(theta_bad == 0 && n_bad == 0, format!("50 instances, Theta non-concave {theta_bad}, N non-convex {n_bad}"))
}

/// Golden-section result vs a 200-point scan of Theta.
fn c8_golden_section() -> Outcome {
    let mut r = rng(8);
    let (mut worst, mut bad) = (f64::NEG_INFINITY, 0);
    for k in 0..50 {
        let e = random_ellipsoid(&mut r, 2 + k % 3);
        let (x, q) = ellipsoid_query(&mut r, &e);
        let rho_max = max_inscribed_rho(&e).unwrap();
        let grid_best = (0..200)
            .map(|s| fixed_rho_separate(&e, &x, q, rho_max * s as f64 / 199.0).unwrap().theta)
            .fold(f64::NEG_INFINITY, f64::max);
        let rep = separate_ellipsoid(&e, &x, q).unwrap();
        let gap = grid_best - rep.violation;
        worst = worst.max(gap);
        if gap > 1e-4 {
            bad += 1;
        }
    }
    outcome(bad == 0, format!("50 instances, max (grid - golden) {worst:.2e}, {bad} over 1e-4"))
}

fn c9_paraboloid() -> Outcome {
    let vee = ParaboloidComplement::from_rows(&[&[1.0], &[-1.0]], &[0.0, 0.0]).unwrap();
    let fixture = paraboloid_alpha(&vee, &Vector::from_row_slice(&[1.0]), 0, 1).unwrap();
    let mut r = rng(9);
    let (mut root_worst, mut affine_worst, mut pairs) = (0.0f64, 0.0f64, 0);
    while pairs < 500 {
        let d = 1 + pairs % 4;
        let m = r.random_range(2..=6);
        let reg = random_paraboloid(&mut r, d, m);
        let i = r.random_range(0..m);
        let Some(x) = random_paraboloid_facet_point(&mut r, &reg, i) else { continue };
        let j = (i + 1 + r.random_range(0..m - 1)) % m;
        let Ok(alpha) = paraboloid_alpha(&reg, &x, i, j) else { continue };
        pairs += 1;
        root_worst = root_worst.max(lifting_quadratic(&reg, &x, i, j, alpha).abs() / (1.0 + alpha * alpha));
        // Second difference along a random direction, small enough to stay
        // where facet i is the envelope maximizer.
        let u = random_unit(&mut r, d) * 1e-3;
        let at = |t: f64| paraboloid_alpha(&reg, &(&x + &u * t), i, j);
        if let (Ok(a0), Ok(a2)) = (at(-1.0), at(1.0)) {
            affine_worst = affine_worst.max((a0 - 2.0 * alpha + a2).abs() / (1.0 + alpha.abs()));
        }
    }
    outcome(
        (fixture - 2.0).abs() <= 1e-12 && root_worst <= 1e-9 && affine_worst <= 1e-9,
        format!("fixture alpha {fixture}, max root residual {root_worst:.2e}, max second difference {affine_worst:.2e}"),
    )
}

/// Lower bound never decreases and no cut is added twice.
fn c10_demo_loop() -> Outcome {
    let (mut nonmono, mut repeats, mut rounds) = (0, 0, 0);
    for k in 0..20u64 {
        let kind = if k % 2 == 0 { InstanceKind::Polyhedron } else { InstanceKind::Ellipsoid };
        let d = 2 + (k as usize % 2);
        let inst = seeded_instance(2000 + k, kind, d, 6);
        let mut r = rng(k);
        let obj = Objective { c_x: Vector::from_fn(d, |_, _| r.random_range(-1.0..1.0)), c_q: 1.0 };
        let opts = LoopOptions { max_rounds: 60, ..LoopOptions::default() };
        let log = demo_loop(&inst, &obj, &opts).unwrap();
        rounds += log.rounds.len();
        nonmono += !log.is_monotone() as usize;
        repeats += log.has_repeats(1e-10) as usize;
    }
    outcome(nonmono == 0 && repeats == 0, format!("20 loops, {rounds} rounds, {nonmono} non-monotone, {repeats} with repeated cuts"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("1 affine lifting vs brute force", c1_affine_lifting),
        ("2 cut validity", c2_validity),
        ("3 lifting maximality", c3_maximality),
        ("4 unit-square benchmark", c4_unit_square),
        ("5 S-lemma soundness", c5_slemma_soundness),
        ("6 unit-disk closed forms", c6_unit_disk),
        ("7 concavity/convexity probes", c7_concavity),
        ("8 golden-section optimality", c8_golden_section),
        ("9 paraboloid closed form", c9_paraboloid),
        ("10 demo-loop monotonicity", c10_demo_loop),
    ];
    let results: Vec<(Outcome, f64)> = std::thread::scope(|s| {
        let handles: Vec<_> = criteria
            .iter()
            .map(|(_, f)| {
                s.spawn(move || {
                    let start = Instant::now();
                    (f(), start.elapsed().as_secs_f64())
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("criterion panicked")).collect()
    });
    let mut failed = 0;
    for ((name, _), (o, secs)) in criteria.iter().zip(&results) {
        println!("{} criterion {name}: {} [{secs:.1}s]", if o.pass { "PASS" } else { "FAIL" }, o.detail);
        failed += !o.pass as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}
