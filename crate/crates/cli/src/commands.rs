use std::fs;
use std::path::PathBuf;

use nalgebra::DMatrix;
use reciprocal::hamilton::{
    check_hsp_membership, flow_jacobian, verify_hamilton_structure, Builtin, BuiltinKind, ExtendedState, Hamiltonian,
    PolynomialHamiltonian, Verdict,
};
use reciprocal::linalg::{commutator, to_rows};
use reciprocal::phase_space::{
    gamma_factor, interval_class, line_element, mass_line_element, mass_rate_squared, null_cone_sample,
    null_surface_residual, null_velocity_report, Displacement, KinematicState, MetricSpec, NULL_TOL,
};
use reciprocal::planck::{planck_from_cgh, verify_identities, ScaleConstants, CODATA_C, CODATA_G, CODATA_HBAR};
use reciprocal::rng::SweepRng;
use reciprocal::transforms::{
    born_invariance_residual, contraction_b_fit, contraction_c_fit, explicit_transform, metric_b_fit, metric_c_fit,
    ScaleFit, UnitaryElement,
};
use reciprocal::weyl_heisenberg::{
    conjugate, conjugation_preserves_commutators, symplectic_residual, AutomorphismElement, HeisenbergAlgebraElement,
    HeisenbergElement, DECOMPOSITION_TOL,
};
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::output::{flat_csv, json, table_csv, Format};
use crate::{Cli, Command, HamiltonAction, SystemArg};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] reciprocal::Error),
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("bad argument: {0}")]
    Arg(String),
}

type Result<T> = std::result::Result<T, CliError>;

pub struct Outcome {
    pub text: String,
    pub failure: Option<String>,
}

fn parse_displacement(s: &str) -> Result<Displacement> {
    let values = s
        .split(',')
        .map(|x| {
            x.trim()
                .parse::<f64>()
                .map_err(|_| CliError::Arg(format!("not a number: {x:?} in --d")))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Displacement::from_slice(&values)?)
}

fn emit(command: &str, format: Format, body: Value) -> Result<String> {
    Ok(match format {
        Format::Json => json(command, body)?,
        Format::Csv => flat_csv(command, &body)?,
    })
}

fn verdict(pass: bool, what: impl FnOnce() -> String) -> Option<String> {
    (!pass).then(what)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Wh {
            trials,
            automorphisms,
            perturbations,
            max_n,
        } => wh(cli, *trials, *automorphisms, *perturbations, *max_n as usize),
        Command::Metric { scales, state, d } => {
            let d = parse_displacement(d)?;
            let tol = cli.tol.unwrap_or(NULL_TOL);
            let born = MetricSpec::born(d.n(), scales.c, scales.b)?;
            let mut body = json!({
                "c": scales.c,
                "b": scales.b,
                "displacement": d,
                "line_element": {
                    "born": line_element(&born, &d)?,
                    "minkowski": line_element(&MetricSpec::minkowski(d.n(), scales.c)?, &d)?,
                    "newton": line_element(&MetricSpec::newton(d.n()), &d)?,
                },
                "mass_line_element": mass_line_element(&d, scales.c),
                "class": interval_class(&born, &d, tol)?,
                "tol": tol,
            });
            let s = KinematicState::new(vec![state.v], vec![state.f], state.r)?;
            body["state"] = json!({
                "v": state.v,
                "f": state.f,
                "r": state.r,
                "gamma": gamma_factor(&s, scales.c, scales.b).ok(),
                "mass_rate_squared": mass_rate_squared(&s, scales.c),
                "null_surface_residual": null_surface_residual(&s, scales.c, scales.b),
                "null_velocity": null_velocity_report(state.f.abs(), state.r, scales.c, scales.b).ok(),
            });
            let format = cli.output.unwrap_or(Format::Json);
            Ok(Outcome {
                text: emit("metric", format, body)?,
                failure: None,
            })
        }
        Command::Transform {
            scales,
            state,
            d,
            trials,
        } => {
            let (c, b) = (scales.c, scales.b);
            let d = parse_displacement(d)?;
            let s = KinematicState::scalar(state.v, state.f, state.r);
            let image = explicit_transform(&s, &d, c, b)?;
            let metric = MetricSpec::born(1, c, b)?;
            let (before, after) = (line_element(&metric, &d)?, line_element(&metric, &image)?);
            let invariance = born_invariance_residual(&s, c, b, *trials, cli.seed)?;
            let u = UnitaryElement::with_tolerance(
                reciprocal::transforms::explicit_matrix(&s, c, b)?,
                c,
                b,
                f64::INFINITY,
            )?;
            let tol = cli.tol.unwrap_or(1e-10);
            let gap = (after - before).abs();
            let pass = invariance <= tol && gap <= tol * before.abs().max(1.0);
            let body = json!({
                "c": c,
                "b": b,
                "state": s,
                "gamma": gamma_factor(&s, c, b)?,
                "input": d,
                "image": image,
                "line_element": { "input": before, "image": after },
                "invariance": { "trials": trials, "seed": cli.seed, "max_residual": invariance },
                "matrix": to_rows(u.matrix()),
                "metric_residual": u.metric_residual(),
                "block_residual": u.block_residual(),
                "tol": tol,
                "pass": pass,
            });
            let failure = verdict(pass, || {
                format!("line element changed by {gap:e}; sweep residual {invariance:e}")
            });
            Ok(Outcome {
                text: emit("transform", cli.output.unwrap_or(Format::Json), body)?,
                failure,
            })
        }
        Command::Nullcone { scales, r, count } => {
            let points = null_cone_sample(*r, scales.c, scales.b, *count)?;
            let tol = cli.tol.unwrap_or(1e-12);
            let worst = points.iter().map(|p| p.residual.abs()).fold(0.0, f64::max);
            let failure = verdict(worst <= tol, || format!("null residual {worst:e} exceeds {tol:e}"));
            let text = match cli.output.unwrap_or(Format::Csv) {
                Format::Csv => table_csv(&points)?,
                Format::Json => json(
                    "nullcone",
                    json!({ "r": r, "c": scales.c, "b": scales.b, "points": points, "max_residual": worst, "tol": tol }),
                )?,
            };
            Ok(Outcome { text, failure })
        }
        Command::Contract {
            state,
            c,
            b_values,
            c_values,
            d,
        } => contract(
            cli,
            KinematicState::scalar(state.v, state.f, state.r),
            *c,
            b_values,
            c_values,
            d,
        ),
        Command::Planck { c, hbar, b, g, alpha_g } => planck(cli, *c, *hbar, *b, *g, *alpha_g),
        Command::Hamilton { action } => hamilton(cli, action),
    }
}

fn coord_gap(a: &HeisenbergElement, b: &HeisenbergElement) -> f64 {
    a.p()
        .iter()
        .zip(b.p())
        .chain(a.q().iter().zip(b.q()))
        .map(|(x, y)| (x - y).abs())
        .fold((a.iota() - b.iota()).abs(), f64::max)
}

fn random_element(rng: &mut SweepRng, n: usize) -> Result<HeisenbergElement> {
    let p = rng.vector(n, -1.0, 1.0);
    let q = rng.vector(n, -1.0, 1.0);
    Ok(HeisenbergElement::new(p, q, rng.uniform(-1.0, 1.0))?)
}

fn wh(cli: &Cli, trials: usize, automorphisms: usize, perturbations: usize, max_n: usize) -> Result<Outcome> {
    let mut rng = SweepRng::new(cli.seed);
    let law_tol = cli.tol.unwrap_or(1e-12);
    let aut_tol = cli.tol.unwrap_or(1e-10);

    let (mut compose_res, mut assoc_res) = (0.0f64, 0.0f64);
    for _ in 0..trials {
        let n = rng.pick(1, max_n);
        let (a, b, c) = (
            random_element(&mut rng, n)?,
            random_element(&mut rng, n)?,
            random_element(&mut rng, n)?,
        );
        let ab = a.compose(&b)?;
        let (oracle, _) = HeisenbergElement::project(&(a.matrix() * b.matrix()))?;
        compose_res = compose_res.max(coord_gap(&ab, &oracle));
        assoc_res = assoc_res.max(coord_gap(&ab.compose(&c)?, &a.compose(&b.compose(&c)?)?));
    }

    let mut exact = true;
    for n in 1..=max_n {
        let id = HeisenbergAlgebraElement::central(n).matrix();
        for i in 0..n {
            for j in 0..n {
                let qp = commutator(
                    &HeisenbergAlgebraElement::generator_q(n, i).matrix(),
                    &HeisenbergAlgebraElement::generator_p(n, j).matrix(),
                );
                let expected = if i == j {
                    id.clone()
                } else {
                    DMatrix::zeros(id.nrows(), id.ncols())
                };
                exact &= qp == expected;
            }
        }
    }

    let (mut preserved, mut round_trip) = (0usize, 0.0f64);
    for _ in 0..automorphisms {
        let n = rng.pick(1, max_n);
        let u = AutomorphismElement::random(&mut rng, n);
        let g = random_element(&mut rng, n)?;
        preserved += usize::from(u.commutator_preserved(aut_tol));
        let residual = u
            .apply_with_tolerance(&g, DECOMPOSITION_TOL)
            .and_then(|h| conjugate(&u.inverse_matrix()?, &h, DECOMPOSITION_TOL))
            .map(|(back, _)| coord_gap(&back, &g))
            .unwrap_or(f64::INFINITY);
        round_trip = round_trip.max(residual);
    }

    let mut rejected = 0usize;
    for _ in 0..perturbations {
        let n = rng.pick(1, max_n);
        let u = AutomorphismElement::random(&mut rng, n);
        let mut a = u.a().clone();
        for x in a.iter_mut() {
            *x += rng.uniform(-0.5, 0.5);
        }
        let mut m = u.matrix();
        m.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&(&a * u.delta()));
        let off = symplectic_residual(&a)? > aut_tol;
        let refused = AutomorphismElement::new(a, u.z().to_vec(), u.iota(), u.delta(), u.epsilon()).is_err();
        rejected += usize::from(off && refused && !conjugation_preserves_commutators(&m, aut_tol));
    }

    let pass = compose_res <= law_tol
        && assoc_res <= law_tol
        && exact
        && preserved == automorphisms
        && round_trip <= aut_tol
        && rejected == perturbations;
    let body = json!({
        "seed": cli.seed,
        "max_n": max_n,
        "group_law": {
            "trials": trials,
            "max_compose_residual": compose_res,
            "max_associativity_residual": assoc_res,
            "tol": law_tol,
        },
        "commutators": { "qp_is_identity": exact, "bracket_qp": 1, "bracket_pq": -1 },
        "automorphisms": {
            "trials": automorphisms,
            "commutators_preserved": preserved,
            "max_round_trip_residual": round_trip,
            "perturbations": perturbations,
            "perturbations_rejected": rejected,
            "tol": aut_tol,
        },
        "pass": pass,
    });
    let failure = verdict(pass, || {
        format!("compose {compose_res:e}, associativity {assoc_res:e}, round trip {round_trip:e}, preserved {preserved}/{automorphisms}, rejected {rejected}/{perturbations}")
    });
    Ok(Outcome {
        text: emit("wh", cli.output.unwrap_or(Format::Json), body)?,
        failure,
    })
}

#[derive(Serialize)]
struct SweepRow {
    sweep: &'static str,
    scale: f64,
    deviation: f64,
    slope: Option<f64>,
}

fn fit_rows(name: &'static str, fit: &ScaleFit, rows: &mut Vec<SweepRow>) -> Option<f64> {
    let slope = fit
        .deviations
        .iter()
        .any(|&d| d > 0.0)
        .then_some(fit.slope)
        .filter(|s| s.is_finite());
    for (&scale, &deviation) in fit.scales.iter().zip(&fit.deviations) {
        rows.push(SweepRow {
            sweep: name,
            scale,
            deviation,
            slope,
        });
    }
    slope
}

fn contract(cli: &Cli, s: KinematicState, c: f64, b_values: &[f64], c_values: &[f64], d: &str) -> Result<Outcome> {
    let d = parse_displacement(d)?;
    let tol = cli.tol.unwrap_or(0.1);
    let fits = [
        ("transform_b", contraction_b_fit(&s, c, b_values)?),
        ("transform_c", contraction_c_fit(&s, c_values)?),
        ("metric_b", metric_b_fit(&d, c, b_values)?),
        ("metric_c", metric_c_fit(&d, c_values)?),
    ];
    let mut rows = Vec::new();
    let mut problems = Vec::new();
    for (name, fit) in &fits {
        let slope = fit_rows(name, fit, &mut rows);
        if !fit.monotone() {
            problems.push(format!("{name} not monotone"));
        }
        if let Some(k) = slope {
            if (k + 2.0).abs() > tol {
                problems.push(format!("{name} slope {k}"));
            }
        }
    }
    let failure = (!problems.is_empty()).then(|| problems.join("; "));
    let text = match cli.output.unwrap_or(Format::Csv) {
        Format::Csv => table_csv(&rows)?,
        Format::Json => json(
            "contract",
            json!({ "state": s, "c": c, "displacement": d, "rows": rows, "tol": tol, "pass": failure.is_none() }),
        )?,
    };
    Ok(Outcome { text, failure })
}

fn planck(cli: &Cli, c: Option<f64>, hbar: Option<f64>, b: Option<f64>, g: Option<f64>, alpha: f64) -> Result<Outcome> {
    let (c, hbar) = (c.unwrap_or(CODATA_C), hbar.unwrap_or(CODATA_HBAR));
    let g = if b.is_none() && g.is_none() { Some(CODATA_G) } else { g };
    let k = ScaleConstants::new(c, hbar, b, g, Some(alpha))?;
    let scales = k.scales()?;
    let force = k.force_scale();
    let residuals = verify_identities(&scales, c, force, hbar);
    let agreement = planck_from_cgh(c, c.powi(4) / force, hbar)?.max_relative_diff(&scales);
    let tol = cli.tol.unwrap_or(1e-14);
    let pass = residuals.max() <= tol && agreement <= tol;
    let body = json!({
        "inputs": { "c": c, "hbar": hbar, "b": force, "G": k.gravitational(), "alpha_G": k.alpha_g() },
        "scales": scales,
        "residuals": residuals,
        "cgh_relative_diff": agreement,
        "tol": tol,
        "pass": pass,
    });
    let failure = verdict(pass, || {
        format!(
            "identity residual {:e}, parameterization gap {agreement:e}",
            residuals.max()
        )
    });
    Ok(Outcome {
        text: emit("planck", cli.output.unwrap_or(Format::Json), body)?,
        failure,
    })
}

fn hamilton(cli: &Cli, action: &HamiltonAction) -> Result<Outcome> {
    let HamiltonAction::Verify {
        system,
        file,
        t,
        q,
        e,
        p,
        t1,
        steps,
        h,
        dt,
    } = action;
    let (sys, label): (Box<dyn Hamiltonian>, String) = match (system, file) {
        (_, Some(path)) => {
            let text = fs::read_to_string(path).map_err(|source| CliError::Io {
                path: path.clone(),
                source,
            })?;
            (Box::new(PolynomialHamiltonian::from_json(&text)?), "polynomial".into())
        }
        (Some(kind), None) => {
            let kind = match kind {
                SystemArg::Zero => BuiltinKind::Zero,
                SystemArg::Free => BuiltinKind::Free,
                SystemArg::Harmonic => BuiltinKind::Harmonic,
                SystemArg::Driven => BuiltinKind::Driven,
            };
            (Box::new(Builtin::new(kind, 1)), kind.name().into())
        }
        (None, None) => return Err(CliError::Arg("one of --system or --file is required".into())),
    };
    let tol = cli.tol.unwrap_or(1e-5);
    let z0 = ExtendedState::scalar(*t, *q, *e, *p);
    let long = flow_jacobian(sys.as_ref(), &z0, *t1, *steps, *h)?;
    let membership = check_hsp_membership(&long, tol);
    let short = flow_jacobian(sys.as_ref(), &z0, *dt, *steps, *h)?;
    let structure = verify_hamilton_structure(&short, sys.as_ref(), tol)?;
    let pass = membership.pass && structure.verdict == Verdict::Pass && long.energy_column_residual() <= tol;
    let body = json!({
        "system": label,
        "base": z0,
        "t1": t1,
        "steps": steps,
        "h": h,
        "jacobian": to_rows(&long.matrix),
        "membership": membership,
        "energy_column_residual": long.energy_column_residual(),
        "structure": structure,
        "tol": tol,
        "pass": pass,
    });
    let failure = verdict(pass, || {
        format!(
            "symplectic {:e}, time row {:e}, generator {:?} (slot error {:e})",
            membership.symplectic_residual, membership.time_row_residual, structure.verdict, structure.slot_error
        )
    });
    Ok(Outcome {
        text: emit("hamilton", cli.output.unwrap_or(Format::Json), body)?,
        failure,
    })
}
