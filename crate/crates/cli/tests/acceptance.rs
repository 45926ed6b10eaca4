//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails. Expected values come from oracles written here,
//! independent of the library code paths they check.

mod common;

use std::f64::consts::FRAC_PI_2;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use reciprocal::hamilton::{
    check_hsp_membership, flow_jacobian, verify_hamilton_structure, Builtin, BuiltinKind, ExtendedState, Verdict,
};
use reciprocal::phase_space::Displacement;
use reciprocal::phase_space::{null_velocity, null_velocity_report, KinematicState};
use reciprocal::planck::{planck_from_cbh, planck_from_cgh, verify_identities, CODATA_C, CODATA_G, CODATA_HBAR};
use reciprocal::rng::SweepRng;
use reciprocal::transforms::{
    born_invariance_residual, contraction_b_fit, contraction_c_fit, explicit_transform, metric_c_fit,
};
use reciprocal::weyl_heisenberg::{
    conjugate, conjugation_preserves_commutators, AutomorphismElement, HeisenbergAlgebraElement, HeisenbergElement,
};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

// Oracles.

/// Group matrix built from the layout, not from the library.
fn upsilon(p: &[f64], q: &[f64], iota: f64) -> DMatrix<f64> {
    let n = p.len();
    let m = 2 * n + 2;
    let mut u = DMatrix::identity(m, m);
    for i in 0..n {
        u[(i, m - 1)] = q[i];
        u[(n + i, m - 1)] = p[i];
        u[(2 * n, i)] = p[i];
        u[(2 * n, n + i)] = -q[i];
    }
    u[(2 * n, m - 1)] = 2.0 * iota;
    u
}

fn read_upsilon(u: &DMatrix<f64>) -> (Vec<f64>, Vec<f64>, f64) {
    let m = u.nrows();
    let n = (m - 2) / 2;
    let p = (0..n).map(|i| u[(2 * n, i)]).collect();
    let q = (0..n).map(|i| u[(i, m - 1)]).collect();
    (p, q, u[(2 * n, m - 1)] / 2.0)
}

fn gap(a: &HeisenbergElement, p: &[f64], q: &[f64], iota: f64) -> f64 {
    a.p()
        .iter()
        .zip(p)
        .chain(a.q().iter().zip(q))
        .map(|(x, y)| (x - y).abs())
        .fold((a.iota() - iota).abs(), f64::max)
}

fn random_element(rng: &mut SweepRng, n: usize) -> HeisenbergElement {
    let p = rng.vector(n, -1.0, 1.0);
    let q = rng.vector(n, -1.0, 1.0);
    HeisenbergElement::new(p, q, rng.uniform(-1.0, 1.0)).unwrap()
}

/// The n = 1 transformation, written out independently.
fn oracle_transform(v: f64, f: f64, r: f64, c: f64, b: f64, d: [f64; 4]) -> [f64; 4] {
    let [dt, dq, de, dp] = d;
    let g = 1.0 / (1.0 - v * v / (c * c) - f * f / (b * b) + r * r / (b * b * c * c)).sqrt();
    [
        g * (dt + v * dq / (c * c) - r * de / (b * b * c * c) + f * dp / (b * b)),
        g * (dq + v * dt - f * de / (b * b) + r * dp / (b * b)),
        g * (de + v * dp - f * dq + r * dt),
        g * (dp + f * dt - r * dq / (c * c) + v * de / (c * c)),
    ]
}

fn oracle_ds2(c: f64, b: f64, d: [f64; 4]) -> f64 {
    let [dt, dq, de, dp] = d;
    dt * dt - dq * dq / (c * c) + de * de / (b * b * c * c) - dp * dp / (b * b)
}

fn oracle_limit(v: f64, f: f64, r: f64, c: f64, d: [f64; 4]) -> [f64; 4] {
    let [dt, dq, de, dp] = d;
    let g = 1.0 / (1.0 - v * v / (c * c)).sqrt();
    [
        g * (dt + v * dq / (c * c)),
        g * (dq + v * dt),
        g * (de + v * dp - f * dq + r * dt),
        g * (dp + f * dt - r * dq / (c * c) + v * de / (c * c)),
    ]
}

fn oracle_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let k = lx.len() as f64;
    let (mx, my) = (lx.iter().sum::<f64>() / k, ly.iter().sum::<f64>() / k);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

// Criteria.

fn group_law() -> Outcome {
    let start = Instant::now();
    let mut rng = SweepRng::new(1);
    let (mut law, mut assoc, mut layout) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let n = rng.pick(1, 3);
        let (a, b, c) = (
            random_element(&mut rng, n),
            random_element(&mut rng, n),
            random_element(&mut rng, n),
        );
        let ua = upsilon(a.p(), a.q(), a.iota());
        layout = layout.max((a.matrix() - &ua).amax());
        let (p, q, iota) = read_upsilon(&(&ua * upsilon(b.p(), b.q(), b.iota())));
        let ab = a.compose(&b).unwrap();
        law = law.max(gap(&ab, &p, &q, iota));
        let left = ab.compose(&c).unwrap();
        let right = a.compose(&b.compose(&c).unwrap()).unwrap();
        assoc = assoc.max(gap(&left, right.p(), right.q(), right.iota()));
    }
    let took = start.elapsed();
    outcome(
        law <= 1e-12 && assoc <= 1e-12 && layout == 0.0 && took < Duration::from_secs(5),
        format!("1000 triples: compose vs product {law:.1e}, associativity {assoc:.1e}, {took:.2?}"),
    )
}

fn commutator_table() -> Outcome {
    let mut exact = true;
    for n in 1..=3 {
        let id = HeisenbergAlgebraElement::central(n).matrix();
        let zero = DMatrix::<f64>::zeros(id.nrows(), id.ncols());
        for i in 0..n {
            for j in 0..n {
                let q = HeisenbergAlgebraElement::generator_q(n, i).matrix();
                let p = HeisenbergAlgebraElement::generator_p(n, j).matrix();
                let bracket = &q * &p - &p * &q;
                exact &= bracket == if i == j { id.clone() } else { zero.clone() };
            }
        }
    }
    // Regression: with these matrices [P, Q] = -I, the opposite of the bracket
    // usually written for this algebra.
    let pq = HeisenbergAlgebraElement::generator_p(1, 0)
        .commutator(&HeisenbergAlgebraElement::generator_q(1, 0))
        .unwrap();
    let inverted = pq.iota_coeff == -1.0 && pq.p_coeff == [0.0] && pq.q_coeff == [0.0];
    outcome(
        exact && inverted,
        format!("[Qi,Pj] = δij I exact for n ≤ 3: {exact}; [P,Q] = -I: {inverted}"),
    )
}

fn automorphisms() -> Outcome {
    let start = Instant::now();
    let mut rng = SweepRng::new(2);
    let (mut preserved, mut worst, mut oracle_gap) = (0, 0.0f64, 0.0f64);
    for _ in 0..500 {
        let n = rng.pick(1, 3);
        let u = AutomorphismElement::random(&mut rng, n);
        let g = random_element(&mut rng, n);
        preserved += usize::from(u.commutator_preserved(1e-10));
        let h = u.apply(&g).unwrap();
        let m = u.matrix();
        let image = &m * upsilon(g.p(), g.q(), g.iota()) * m.clone().try_inverse().unwrap();
        let (p, q, iota) = read_upsilon(&image);
        oracle_gap = oracle_gap.max(gap(&h, &p, &q, iota));
        let (back, _) = conjugate(&u.inverse_matrix().unwrap(), &h, 1e-9).unwrap();
        worst = worst.max(gap(&back, g.p(), g.q(), g.iota()));
    }
    let mut rejected = 0;
    for _ in 0..100 {
        let n = rng.pick(1, 3);
        let u = AutomorphismElement::random(&mut rng, n);
        let mut m = u.matrix();
        for i in 0..2 * n {
            for j in 0..2 * n {
                m[(i, j)] += rng.uniform(-0.5, 0.5);
            }
        }
        rejected += usize::from(!conjugation_preserves_commutators(&m, 1e-10));
    }
    let took = start.elapsed();
    outcome(
        preserved == 500 && worst <= 1e-10 && oracle_gap <= 1e-10 && rejected == 100 && took < Duration::from_secs(10),
        format!(
            "{preserved}/500 preserve brackets, round trip {worst:.1e}, apply vs oracle {oracle_gap:.1e}, {rejected}/100 perturbations rejected, {took:.2?}"
        ),
    )
}

fn born_invariance() -> Outcome {
    let (c, b) = (2.0, 0.5);
    let slices = [
        ("v", 0.7 * c, 0.0, 0.0),
        ("f", 0.0, 0.6 * b, 0.0),
        ("r", 0.0, 0.0, 1.3 * b * c),
        ("v,f", 0.4 * c, -0.5 * b, 0.0),
        ("v,f,r", 0.4 * c, -0.3 * b, 0.8 * b * c),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (k, (name, v, f, r)) in slices.into_iter().enumerate() {
        let s = KinematicState::scalar(v, f, r);
        let lib = born_invariance_residual(&s, c, b, 10_000, 10 + k as u64).unwrap();
        let mut rng = SweepRng::new(100 + k as u64);
        let (mut oracle, mut agree) = (0.0f64, 0.0f64);
        for _ in 0..10_000 {
            let d = [
                rng.uniform(-1.0, 1.0),
                c * rng.uniform(-1.0, 1.0),
                b * c * rng.uniform(-1.0, 1.0),
                b * rng.uniform(-1.0, 1.0),
            ];
            let img = oracle_transform(v, f, r, c, b, d);
            oracle = oracle.max((oracle_ds2(c, b, img) - oracle_ds2(c, b, d)).abs());
            let got = explicit_transform(&s, &Displacement::from_slice(&d).unwrap(), c, b)
                .unwrap()
                .to_vec();
            agree = agree.max(got.iter().zip(img).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max));
        }
        let limit = if name == "v,f,r" { 1e-8 } else { 1e-12 };
        pass &= lib <= limit && oracle <= limit && agree <= 1e-12;
        lines.push(format!("{name}: {lib:.1e}"));
    }
    outcome(
        pass,
        format!("max |Δds²| over 10000 displacements: {}", lines.join(", ")),
    )
}

fn null_anchors() -> Outcome {
    let (c, b) = (3.0, 2.0);
    let rel = |x: f64, y: f64| if y == 0.0 { x.abs() } else { ((x - y) / y).abs() };
    let (v0, w0) = null_velocity(0.0, 0.0, c, b).unwrap();
    let (v1, w1) = null_velocity(b, 0.0, c, b).unwrap();
    let rep = null_velocity_report(0.0, 2.0 * b * c, c, b).unwrap();
    let sqrt5 = 5f64.sqrt() * c;
    let pass = rel(v0, c) <= 1e-14
        && rel(w0, -c) <= 1e-14
        && v1.abs() <= 1e-14
        && w1.abs() <= 1e-14
        && rel(rep.v_plus, sqrt5) <= 1e-14
        && rel(rep.v_minus, -sqrt5) <= 1e-14
        && rep.notes.iter().any(|n| n.contains("sqrt(5)") && n.contains("2c"));
    outcome(
        pass,
        format!(
            "±c: {v0}, {w0}; f = b: {v1}; r = 2bc: ±{} = ±√5·c, note present: {}",
            rep.v_plus,
            !rep.notes.is_empty()
        ),
    )
}

fn contraction() -> Outcome {
    let (v, f, r, c) = (0.5, 0.8, 0.3, 1.0);
    let s = KinematicState::scalar(v, f, r);
    let bs = [1e2, 1e3, 1e4, 1e5];
    let fit = contraction_b_fit(&s, c, &bs).unwrap();
    // Oracle: column-by-column max deviation of the written-out maps.
    let devs: Vec<f64> = bs
        .iter()
        .map(|&b| {
            (0..4)
                .map(|j| {
                    let mut e = [0.0; 4];
                    e[j] = 1.0;
                    let full = oracle_transform(v, f, r, c, b, e);
                    let lim = oracle_limit(v, f, r, c, e);
                    full.iter().zip(lim).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
                })
                .fold(0.0, f64::max)
        })
        .collect();
    let slope = oracle_slope(&bs, &devs);
    let cs = [1e1, 1e2, 1e3, 1e4];
    let c_fit = contraction_c_fit(&s, &cs).unwrap();
    let m_fit = metric_c_fit(&Displacement::scalar(1.0, 0.5, 0.8, 0.3), &cs).unwrap();
    let pass = (fit.slope + 2.0).abs() <= 0.1
        && (slope + 2.0).abs() <= 0.1
        && fit.monotone()
        && c_fit.monotone()
        && m_fit.monotone();
    outcome(
        pass,
        format!(
            "b-sweep slope {:.4} (oracle {slope:.4}); c-sweep monotone: transform {}, line element {}",
            fit.slope,
            c_fit.monotone(),
            m_fit.monotone()
        ),
    )
}

fn planck_scales() -> Outcome {
    let b = CODATA_C.powi(4) / CODATA_G;
    let s = planck_from_cbh(CODATA_C, b, CODATA_HBAR).unwrap();
    let g = planck_from_cgh(CODATA_C, CODATA_G, CODATA_HBAR).unwrap();
    let diff = s.max_relative_diff(&g);
    let oracle_t = (CODATA_HBAR * CODATA_G / CODATA_C.powi(5)).sqrt();
    let res = verify_identities(&s, CODATA_C, b, CODATA_HBAR).max();
    let off = (s.lambda_t / 5.391e-44 - 1.0).abs();
    let pass = diff <= 1e-14 && res <= 1e-14 && off <= 1e-3 && ((s.lambda_t - oracle_t) / oracle_t).abs() <= 1e-14;
    outcome(
        pass,
        format!("cbh vs cGh {diff:.1e}, identities {res:.1e}, λt = {:.6e} s", s.lambda_t),
    )
}

fn hamilton_flow() -> Outcome {
    let start = Instant::now();
    let (steps, h, tol) = (10_000, 1e-5, 1e-5);
    let z0 = ExtendedState::scalar(0.3, 0.8, 0.1, -0.4);
    // Analytic (v, f, r) = (∂H/∂p, -∂H/∂q, ∂H/∂t) at z0.
    let (t, q, p) = (0.3, 0.8, -0.4);
    let expected = [
        (BuiltinKind::Zero, [0.0, 0.0, 0.0]),
        (BuiltinKind::Free, [p, 0.0, 0.0]),
        (BuiltinKind::Harmonic, [p, -q, 0.0]),
        (BuiltinKind::Driven, [p, -(q + 0.1 * t), 0.1 * q]),
    ];
    let mut pass = true;
    let mut worst = (0.0f64, 0.0f64);
    for (kind, want) in expected {
        let sys = Builtin::new(kind, 1);
        let long = flow_jacobian(&sys, &z0, 1.0, steps, h).unwrap();
        let m = check_hsp_membership(&long, tol);
        let short = flow_jacobian(&sys, &z0, 1e-3, steps, h).unwrap();
        let rep = verify_hamilton_structure(&short, &sys, tol).unwrap();
        let analytic = [rep.v_slot[0] - want[0], rep.f_slot[0] - want[1], rep.r_slot - want[2]];
        let analytic = analytic.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        pass &= m.pass && rep.verdict == Verdict::Pass && analytic <= tol;
        worst = (
            worst.0.max(m.symplectic_residual),
            worst.1.max(rep.slot_error.max(analytic)),
        );
    }
    let ho = Builtin::new(BuiltinKind::Harmonic, 1);
    let j = flow_jacobian(&ho, &ExtendedState::scalar(0.0, 1.0, 0.0, 0.0), FRAC_PI_2, steps, h).unwrap();
    let rot = [[0.0, 1.0], [-1.0, 0.0]];
    let idx = [1, 3];
    let mut rot_gap = 0.0f64;
    for a in 0..2 {
        for b in 0..2 {
            rot_gap = rot_gap.max((j.matrix[(idx[a], idx[b])] - rot[a][b]).abs());
        }
    }
    let took = start.elapsed();
    pass &= rot_gap <= tol && took < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "4 systems: symplectic {:.1e}, generator {:.1e}, quarter-period rotation {rot_gap:.1e}, {took:.2?}",
            worst.0, worst.1
        ),
    )
}

fn cli_golden() -> Outcome {
    let failures: Vec<String> = common::CASES.iter().filter_map(|c| common::check(c).err()).collect();
    let commands = [
        "wh",
        "metric",
        "transform",
        "nullcone",
        "contract",
        "planck",
        "hamilton",
    ];
    let covered = commands
        .iter()
        .all(|cmd| common::CASES.iter().any(|c| c.args.contains(cmd)));
    let detail = if failures.is_empty() {
        format!(
            "{} golden files byte-identical, all subcommands covered: {covered}",
            common::CASES.len()
        )
    } else {
        failures.join("; ")
    };
    outcome(failures.is_empty() && covered, detail)
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("group law", group_law),
        ("commutator table", commutator_table),
        ("automorphisms", automorphisms),
        ("Born-metric invariance", born_invariance),
        ("null-surface anchors", null_anchors),
        ("contraction convergence", contraction),
        ("Planck scales", planck_scales),
        ("Hamilton flow", hamilton_flow),
        ("CLI determinism", cli_golden),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!(
            "{} criterion {}: {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            i + 1,
            o.detail
        );
    }
    println!("acceptance: {}/{} passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
