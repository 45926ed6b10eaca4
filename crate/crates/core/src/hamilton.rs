//! Hamiltonian flows on extended phase space.
//!
//! The flow of `H(p, q, t)` is extended to `(t, q, e, p)` by
//!
//! ```text
//! ṫ = 1,  q̇ = ∂H/∂p,  ṗ = -∂H/∂q,  ė = ∂H/∂t
//! ```
//!
//! so `e - H` is constant along trajectories. Its Jacobian should preserve
//! `ω = -de∧dt + dpᵢ∧dqⁱ` and leave `dt` alone; [`check_hsp_membership`]
//! measures both. [`verify_hamilton_structure`] reads the generator
//! `(v, f, r) = (q̇, ṗ, ė)` off a short trajectory and compares it with
//! finite-difference gradients of `H`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{same_dim, Error, Result};
use crate::linalg::max_abs_diff;
use crate::phase_space::Displacement;
use crate::rng::SweepRng;

/// Default finite-difference step for Jacobians.
pub const JACOBIAN_STEP: f64 = 1e-5;
/// Base step for finite-difference gradients of `H`, scaled by `max(1, |x|)`.
pub const GRADIENT_STEP: f64 = 1e-6;

/// Partial derivatives of `H` at a point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gradient {
    pub dp: Vec<f64>,
    pub dq: Vec<f64>,
    pub dt: f64,
}

impl Gradient {
    fn is_finite(&self) -> bool {
        self.dp.iter().chain(&self.dq).all(|x| x.is_finite()) && self.dt.is_finite()
    }
}

pub trait Hamiltonian: Sync {
    fn n(&self) -> usize;

    fn energy(&self, p: &[f64], q: &[f64], t: f64) -> f64;

    /// Analytic gradient, if known. Falls back to [`numeric_gradient`].
    fn gradient(&self, _p: &[f64], _q: &[f64], _t: f64) -> Option<Gradient> {
        None
    }
}

fn central<F: Fn(f64) -> f64>(f: F, x: f64) -> f64 {
    let h = GRADIENT_STEP * x.abs().max(1.0);
    (f(x + h) - f(x - h)) / (2.0 * h)
}

/// Central differences of `H` in every argument.
pub fn numeric_gradient<H: Hamiltonian + ?Sized>(h: &H, p: &[f64], q: &[f64], t: f64) -> Gradient {
    let along = |v: &[f64], i: usize, x: f64| {
        let mut w = v.to_vec();
        w[i] = x;
        w
    };
    Gradient {
        dp: (0..p.len())
            .map(|i| central(|x| h.energy(&along(p, i, x), q, t), p[i]))
            .collect(),
        dq: (0..q.len())
            .map(|i| central(|x| h.energy(p, &along(q, i, x), t), q[i]))
            .collect(),
        dt: central(|x| h.energy(p, q, x), t),
    }
}

pub fn gradient_of<H: Hamiltonian + ?Sized>(h: &H, p: &[f64], q: &[f64], t: f64) -> Gradient {
    h.gradient(p, q, t).unwrap_or_else(|| numeric_gradient(h, p, q, t))
}

/// Largest relative gap between the analytic and numeric gradients over
/// `probes` random points in `[-2, 2]`. Zero when no analytic gradient exists.
pub fn gradient_consistency<H: Hamiltonian + ?Sized>(h: &H, probes: usize, seed: u64) -> f64 {
    let mut rng = SweepRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..probes {
        let p = rng.vector(h.n(), -2.0, 2.0);
        let q = rng.vector(h.n(), -2.0, 2.0);
        let t = rng.uniform(-2.0, 2.0);
        let Some(a) = h.gradient(&p, &q, t) else { return 0.0 };
        let b = numeric_gradient(h, &p, &q, t);
        let pairs =
            a.dp.iter()
                .chain(&a.dq)
                .chain([&a.dt])
                .zip(b.dp.iter().chain(&b.dq).chain([&b.dt]));
        for (x, y) in pairs {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()).max(1.0));
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BuiltinKind {
    /// `H = 0`
    Zero,
    /// `H = p²/2`
    Free,
    /// `H = (p² + q²)/2`
    Harmonic,
    /// `H = (p² + q²)/2 + 0.1 q t`, summed over components
    Driven,
}

impl BuiltinKind {
    pub const ALL: [BuiltinKind; 4] = [Self::Zero, Self::Free, Self::Harmonic, Self::Driven];

    pub fn name(self) -> &'static str {
        match self {
            Self::Zero => "zero",
            Self::Free => "free",
            Self::Harmonic => "harmonic",
            Self::Driven => "driven",
        }
    }
}

impl std::str::FromStr for BuiltinKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter {
                name: "system",
                reason: format!("unknown system {s:?}"),
            })
    }
}

const DRIVE: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Builtin {
    pub kind: BuiltinKind,
    pub n: usize,
}

impl Builtin {
    pub fn new(kind: BuiltinKind, n: usize) -> Self {
        Self { kind, n }
    }
}

impl Hamiltonian for Builtin {
    fn n(&self) -> usize {
        self.n
    }

    fn energy(&self, p: &[f64], q: &[f64], t: f64) -> f64 {
        let p2: f64 = p.iter().map(|x| x * x).sum();
        let q2: f64 = q.iter().map(|x| x * x).sum();
        match self.kind {
            BuiltinKind::Zero => 0.0,
            BuiltinKind::Free => p2 / 2.0,
            BuiltinKind::Harmonic => (p2 + q2) / 2.0,
            BuiltinKind::Driven => (p2 + q2) / 2.0 + DRIVE * t * q.iter().sum::<f64>(),
        }
    }

    fn gradient(&self, p: &[f64], q: &[f64], t: f64) -> Option<Gradient> {
        let n = self.n;
        Some(match self.kind {
            BuiltinKind::Zero => Gradient {
                dp: vec![0.0; n],
                dq: vec![0.0; n],
                dt: 0.0,
            },
            BuiltinKind::Free => Gradient {
                dp: p.to_vec(),
                dq: vec![0.0; n],
                dt: 0.0,
            },
            BuiltinKind::Harmonic => Gradient {
                dp: p.to_vec(),
                dq: q.to_vec(),
                dt: 0.0,
            },
            BuiltinKind::Driven => Gradient {
                dp: p.to_vec(),
                dq: q.iter().map(|x| x + DRIVE * t).collect(),
                dt: DRIVE * q.iter().sum::<f64>(),
            },
        })
    }
}

/// `H = Σ k pᵃ qᵇ tᶜ` in one degree of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialHamiltonian {
    terms: Vec<([i32; 3], f64)>,
}

impl PolynomialHamiltonian {
    pub fn new(terms: Vec<([i32; 3], f64)>) -> Result<Self> {
        for (e, k) in &terms {
            if e.iter().any(|&d| d < 0) || !k.is_finite() {
                return Err(Error::Polynomial(format!("bad term {e:?} -> {k}")));
            }
        }
        Ok(Self { terms })
    }

    /// Parses a JSON object whose keys are `"a,b,c"` exponent triples for
    /// `p`, `q` and `t` and whose values are coefficients, e.g.
    /// `{"2,0,0": 0.5, "0,2,0": 0.5}` for the harmonic oscillator.
    pub fn from_json(text: &str) -> Result<Self> {
        let map: BTreeMap<String, f64> = serde_json::from_str(text).map_err(|e| Error::Polynomial(e.to_string()))?;
        let terms = map
            .into_iter()
            .map(|(key, k)| {
                let parts: Vec<&str> = key.split(',').map(str::trim).collect();
                let exps: Vec<i32> = parts
                    .iter()
                    .map(|s| s.parse::<u16>().map(i32::from))
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|_| Error::Polynomial(format!("bad exponent key {key:?}")))?;
                match exps[..] {
                    [a, b, c] => Ok(([a, b, c], k)),
                    _ => Err(Error::Polynomial(format!("key {key:?} needs three exponents"))),
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(terms)
    }

    pub fn terms(&self) -> &[([i32; 3], f64)] {
        &self.terms
    }
}

fn pow(x: f64, k: i32) -> f64 {
    if k == 0 {
        1.0
    } else {
        x.powi(k)
    }
}

fn dpow(x: f64, k: i32) -> f64 {
    if k == 0 {
        0.0
    } else {
        k as f64 * pow(x, k - 1)
    }
}

impl Hamiltonian for PolynomialHamiltonian {
    fn n(&self) -> usize {
        1
    }

    fn energy(&self, p: &[f64], q: &[f64], t: f64) -> f64 {
        self.terms
            .iter()
            .map(|([a, b, c], k)| k * pow(p[0], *a) * pow(q[0], *b) * pow(t, *c))
            .sum()
    }

    fn gradient(&self, p: &[f64], q: &[f64], t: f64) -> Option<Gradient> {
        let (p, q) = (p[0], q[0]);
        let mut g = Gradient {
            dp: vec![0.0],
            dq: vec![0.0],
            dt: 0.0,
        };
        for &([a, b, c], k) in &self.terms {
            g.dp[0] += k * dpow(p, a) * pow(q, b) * pow(t, c);
            g.dq[0] += k * pow(p, a) * dpow(q, b) * pow(t, c);
            g.dt += k * pow(p, a) * pow(q, b) * dpow(t, c);
        }
        Some(g)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtendedState {
    pub t: f64,
    pub q: Vec<f64>,
    pub e: f64,
    pub p: Vec<f64>,
}

impl ExtendedState {
    pub fn new(t: f64, q: Vec<f64>, e: f64, p: Vec<f64>) -> Result<Self> {
        same_dim(q.len(), p.len())?;
        let z = Self { t, q, e, p };
        if !z.to_vec().iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: "entries must be finite".into(),
            });
        }
        Ok(z)
    }

    pub fn scalar(t: f64, q: f64, e: f64, p: f64) -> Self {
        Self {
            t,
            q: vec![q],
            e,
            p: vec![p],
        }
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// `(t, q, e, p)` layout.
    pub fn to_vec(&self) -> Vec<f64> {
        Displacement {
            dt: self.t,
            dq: self.q.clone(),
            de: self.e,
            dp: self.p.clone(),
        }
        .to_vec()
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        let d = Displacement::from_slice(v)?;
        Ok(Self {
            t: d.dt,
            q: d.dq,
            e: d.de,
            p: d.dp,
        })
    }
}

/// Extended Hamiltonian vector field at `z` in `(t, q, e, p)` layout.
pub fn hamiltonian_field<H: Hamiltonian + ?Sized>(h: &H, z: &[f64]) -> Option<Vec<f64>> {
    let n = (z.len() - 2) / 2;
    let (t, q, p) = (z[0], &z[1..=n], &z[n + 2..]);
    let g = gradient_of(h, p, q, t);
    if !g.is_finite() || g.dp.len() != n || g.dq.len() != n {
        return None;
    }
    let mut dz = Vec::with_capacity(z.len());
    dz.push(1.0);
    dz.extend_from_slice(&g.dp);
    dz.push(g.dt);
    dz.extend(g.dq.iter().map(|x| -x));
    Some(dz)
}

/// Classical fourth-order Runge-Kutta over a duration (which may be
/// negative). The field returns `None` where it is undefined or non-finite.
pub fn integrate_field<F>(field: &F, z0: &[f64], duration: f64, steps: usize) -> Result<Vec<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + ?Sized,
{
    if steps == 0 {
        return Err(Error::InvalidParameter {
            name: "steps",
            reason: "must be at least 1".into(),
        });
    }
    let h = duration / steps as f64;
    let mut z = z0.to_vec();
    let axpy = |z: &[f64], k: &[f64], a: f64| z.iter().zip(k).map(|(x, y)| x + a * y).collect::<Vec<_>>();
    for _ in 0..steps {
        let fail = || Error::IntegrationFailure {
            t: z[0],
            last_good: z.clone(),
        };
        let k1 = field(&z).ok_or_else(fail)?;
        let k2 = field(&axpy(&z, &k1, h / 2.0)).ok_or_else(fail)?;
        let k3 = field(&axpy(&z, &k2, h / 2.0)).ok_or_else(fail)?;
        let k4 = field(&axpy(&z, &k3, h)).ok_or_else(fail)?;
        let next: Vec<f64> = (0..z.len())
            .map(|i| z[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
            .collect();
        if !next.iter().all(|x| x.is_finite()) {
            return Err(fail());
        }
        z = next;
    }
    Ok(z)
}

/// Advance `z0` along the extended flow of `h` for elapsed time `t1`.
pub fn integrate_flow<H: Hamiltonian + ?Sized>(
    h: &H,
    z0: &ExtendedState,
    t1: f64,
    steps: usize,
) -> Result<ExtendedState> {
    same_dim(h.n(), z0.n())?;
    let z = integrate_field(&|z: &[f64]| hamiltonian_field(h, z), &z0.to_vec(), t1, steps)?;
    ExtendedState::from_slice(&z)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowJacobian {
    pub matrix: DMatrix<f64>,
    pub base: ExtendedState,
    pub elapsed: f64,
    pub steps: usize,
}

impl FlowJacobian {
    pub fn n(&self) -> usize {
        self.base.n()
    }

    pub fn identity(base: ExtendedState) -> Self {
        let m = 2 * base.n() + 2;
        Self {
            matrix: DMatrix::identity(m, m),
            base,
            elapsed: 0.0,
            steps: 1,
        }
    }

    /// `max |∂q̃/∂e|, |∂p̃/∂e|`.
    pub fn energy_column_residual(&self) -> f64 {
        let n = self.n();
        (0..2 * n + 2)
            .filter(|&i| i != 0 && i != n + 1)
            .map(|i| self.matrix[(i, n + 1)].abs())
            .fold(0.0, f64::max)
    }

    /// Deviation of the first row from `(1, 0, …, 0)`.
    pub fn time_row_residual(&self) -> f64 {
        (0..self.matrix.ncols())
            .map(|j| (self.matrix[(0, j)] - if j == 0 { 1.0 } else { 0.0 }).abs())
            .fold(0.0, f64::max)
    }
}

fn fd_columns<F>(field: &F, z0: &[f64], t1: f64, steps: usize, h: f64) -> Result<DMatrix<f64>>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + ?Sized,
{
    let m = z0.len();
    let mut j = DMatrix::zeros(m, m);
    for col in 0..m {
        let shifted = |s: f64| {
            let mut z = z0.to_vec();
            z[col] += s;
            integrate_field(field, &z, t1, steps)
        };
        let (plus, minus) = (shifted(h)?, shifted(-h)?);
        for row in 0..m {
            j[(row, col)] = (plus[row] - minus[row]) / (2.0 * h);
        }
    }
    Ok(j)
}

/// Jacobian of the time-`t1` map of an arbitrary field on `(t, q, e, p)`,
/// by central differences with step `h`. With `richardson`, the `h` and
/// `h/2` estimates are combined to cancel the leading error term.
pub fn field_jacobian<F>(
    field: &F,
    z0: &ExtendedState,
    t1: f64,
    steps: usize,
    h: f64,
    richardson: bool,
) -> Result<FlowJacobian>
where
    F: Fn(&[f64]) -> Option<Vec<f64>> + ?Sized,
{
    if !(h > 0.0) {
        return Err(Error::InvalidParameter {
            name: "h",
            reason: "must be positive".into(),
        });
    }
    let z = z0.to_vec();
    let mut matrix = fd_columns(field, &z, t1, steps, h)?;
    if richardson {
        let half = fd_columns(field, &z, t1, steps, h / 2.0)?;
        matrix = (half * 4.0 - matrix) / 3.0;
    }
    Ok(FlowJacobian {
        matrix,
        base: z0.clone(),
        elapsed: t1,
        steps,
    })
}

pub fn flow_jacobian<H: Hamiltonian + ?Sized>(
    sys: &H,
    z0: &ExtendedState,
    t1: f64,
    steps: usize,
    h: f64,
) -> Result<FlowJacobian> {
    same_dim(sys.n(), z0.n())?;
    field_jacobian(&|z: &[f64]| hamiltonian_field(sys, z), z0, t1, steps, h, false)
}

/// The matrix `Ω` with `ω(d₁, d₂) = d₁ᵗ Ω d₂`.
pub fn omega_matrix(n: usize) -> DMatrix<f64> {
    let mut w = DMatrix::zeros(2 * n + 2, 2 * n + 2);
    w[(0, n + 1)] = 1.0;
    w[(n + 1, 0)] = -1.0;
    for i in 0..n {
        w[(n + 2 + i, 1 + i)] = 1.0;
        w[(1 + i, n + 2 + i)] = -1.0;
    }
    w
}

/// `ω(d₁, d₂) = -(de₁dt₂ - dt₁de₂) + Σ(dp₁ᵢdq₂ⁱ - dq₁ⁱdp₂ᵢ)`.
pub fn symplectic_two_form(d1: &Displacement, d2: &Displacement) -> Result<f64> {
    same_dim(d1.n(), d2.n())?;
    let mut w = -(d1.de * d2.dt - d1.dt * d2.de);
    for i in 0..d1.n() {
        w += d1.dp[i] * d2.dq[i] - d1.dq[i] * d2.dp[i];
    }
    Ok(w)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MembershipReport {
    pub symplectic_residual: f64,
    pub time_row_residual: f64,
    pub pass: bool,
}

pub fn check_hsp_membership(j: &FlowJacobian, tol: f64) -> MembershipReport {
    let w = omega_matrix(j.n());
    let symplectic_residual = max_abs_diff(&(j.matrix.transpose() * &w * &j.matrix), &w);
    let time_row_residual = j.time_row_residual();
    MembershipReport {
        symplectic_residual,
        time_row_residual,
        pass: symplectic_residual <= tol && time_row_residual <= tol,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureReport {
    /// `(v, f, r)` read off the trajectory.
    pub v_slot: Vec<f64>,
    pub f_slot: Vec<f64>,
    pub r_slot: f64,
    /// `(∂H/∂p, -∂H/∂q, ∂H/∂t)` by finite differences.
    pub v_expected: Vec<f64>,
    pub f_expected: Vec<f64>,
    pub r_expected: f64,
    pub slot_error: f64,
    /// Gap between the `δt` and `δt/2` generator estimates.
    pub second_order_residual: f64,
    pub energy_column_residual: f64,
    pub time_row_residual: f64,
    pub verdict: Verdict,
}

/// Compare the generator of the flow behind `j` against the gradients of
/// `sys` at `j.base`.
///
/// The generator is estimated from the trajectory through the base state by
/// centered differences over `±δt` and `±δt/2`, `δt = j.elapsed`, combined by
/// Richardson extrapolation. If the two estimates differ by more than `tol`
/// the flow is too nonlinear over `δt` and the verdict is inconclusive.
/// Otherwise the verdict passes iff the slots match and `j` satisfies the
/// zero pattern `∂q̃/∂e = ∂p̃/∂e = 0` with first row `(1, 0, …, 0)`.
pub fn verify_hamilton_structure<H: Hamiltonian + ?Sized>(
    j: &FlowJacobian,
    sys: &H,
    tol: f64,
) -> Result<StructureReport> {
    let n = j.n();
    same_dim(sys.n(), n)?;
    let dt = j.elapsed;
    if !(dt > 0.0) {
        return Err(Error::InvalidParameter {
            name: "elapsed",
            reason: "must be positive".into(),
        });
    }
    let steps = j.steps.max(2);
    let z0 = j.base.to_vec();
    let field = |z: &[f64]| hamiltonian_field(sys, z);
    let centered = |d: f64, s: usize| -> Result<Vec<f64>> {
        let plus = integrate_field(&field, &z0, d, s)?;
        let minus = integrate_field(&field, &z0, -d, s)?;
        Ok(plus.iter().zip(&minus).map(|(a, b)| (a - b) / (2.0 * d)).collect())
    };
    let coarse = centered(dt, steps)?;
    let fine = centered(dt / 2.0, steps / 2)?;
    let second_order_residual = coarse.iter().zip(&fine).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    let est: Vec<f64> = coarse.iter().zip(&fine).map(|(a, b)| (4.0 * b - a) / 3.0).collect();

    let g = numeric_gradient(sys, &j.base.p, &j.base.q, j.base.t);
    let v_slot = est[1..=n].to_vec();
    let f_slot = est[n + 2..].to_vec();
    let r_slot = est[n + 1];
    let f_expected: Vec<f64> = g.dq.iter().map(|x| -x).collect();
    let slot_error = v_slot
        .iter()
        .zip(&g.dp)
        .chain(f_slot.iter().zip(&f_expected))
        .chain([(&r_slot, &g.dt)])
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let energy_column_residual = j.energy_column_residual();
    let time_row_residual = j.time_row_residual();
    let verdict = if second_order_residual > tol {
        Verdict::Inconclusive
    } else if slot_error <= tol && energy_column_residual <= tol && time_row_residual <= tol {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    Ok(StructureReport {
        v_slot,
        f_slot,
        r_slot,
        v_expected: g.dp,
        f_expected,
        r_expected: g.dt,
        slot_error,
        second_order_residual,
        energy_column_residual,
        time_row_residual,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, TAU};

    fn sys(kind: BuiltinKind) -> Builtin {
        Builtin::new(kind, 1)
    }

    #[test]
    fn two_form_examples() {
        let d = Displacement::scalar(0.3, -1.0, 2.0, 0.7);
        assert_eq!(symplectic_two_form(&d, &d).unwrap(), 0.0);
        let q = Displacement::scalar(0.0, 1.0, 0.0, 0.0);
        let p = Displacement::scalar(0.0, 0.0, 0.0, 1.0);
        assert_eq!(symplectic_two_form(&q, &p).unwrap(), -1.0);
        let t = Displacement::scalar(1.0, 0.0, 0.0, 0.0);
        let e = Displacement::scalar(0.0, 0.0, 1.0, 0.0);
        assert_eq!(symplectic_two_form(&t, &e).unwrap(), 1.0);
    }

    #[test]
    fn omega_matrix_matches_form() {
        let a = Displacement::new(0.2, vec![1.0, -0.5], 0.7, vec![0.3, 2.0]).unwrap();
        let b = Displacement::new(-1.0, vec![0.4, 0.9], 0.1, vec![-0.6, 1.5]).unwrap();
        let by_matrix = (a.vector().transpose() * omega_matrix(2) * b.vector())[(0, 0)];
        assert!((by_matrix - symplectic_two_form(&a, &b).unwrap()).abs() <= 1e-15);
    }

    #[test]
    fn zero_hamiltonian_moves_only_time() {
        let z0 = ExtendedState::scalar(0.5, 1.0, 2.0, -3.0);
        let z = integrate_flow(&sys(BuiltinKind::Zero), &z0, 1.5, 100).unwrap();
        assert_eq!((z.q.clone(), z.e, z.p.clone()), (z0.q, z0.e, z0.p));
        assert!((z.t - 2.0).abs() <= 1e-14);
    }

    #[test]
    fn oscillator_period() {
        let z0 = ExtendedState::scalar(0.0, 1.0, 0.5, 0.0);
        let z = integrate_flow(&sys(BuiltinKind::Harmonic), &z0, TAU, 10_000).unwrap();
        assert!((z.q[0] - 1.0).abs() <= 1e-6 && z.p[0].abs() <= 1e-6);
        assert_eq!(z.e, 0.5);
    }

    #[test]
    fn free_particle_drifts() {
        let z0 = ExtendedState::scalar(0.0, 0.0, 0.0, 2.0);
        let z = integrate_flow(&sys(BuiltinKind::Free), &z0, 1.0, 1000).unwrap();
        assert!((z.q[0] - 2.0).abs() <= 1e-12);
    }

    struct Blowup;

    impl Hamiltonian for Blowup {
        fn n(&self) -> usize {
            1
        }

        fn energy(&self, p: &[f64], _q: &[f64], _t: f64) -> f64 {
            1.0 / (1.0 - p[0])
        }
    }

    #[test]
    fn singular_hamiltonian_reports_last_state() {
        let z0 = ExtendedState::scalar(0.0, 0.0, 0.0, 1.0);
        match integrate_flow(&Blowup, &z0, 1.0, 10) {
            Err(Error::IntegrationFailure { last_good, .. }) => assert_eq!(last_good, z0.to_vec()),
            other => panic!("expected failure, got {other:?}"),
        }
    }

    #[test]
    fn jacobian_examples() {
        let z0 = ExtendedState::scalar(0.0, 0.3, 0.0, 2.0);
        let j = flow_jacobian(&sys(BuiltinKind::Zero), &z0, 1.0, 100, JACOBIAN_STEP).unwrap();
        assert!(max_abs_diff(&j.matrix, &DMatrix::identity(4, 4)) <= 1e-10);

        let j = flow_jacobian(&sys(BuiltinKind::Free), &z0, 1.0, 100, JACOBIAN_STEP).unwrap();
        let mut shear = DMatrix::identity(4, 4);
        shear[(1, 3)] = 1.0;
        assert!(max_abs_diff(&j.matrix, &shear) <= 1e-9);

        let z0 = ExtendedState::scalar(0.0, 1.0, 0.0, 0.0);
        let j = flow_jacobian(&sys(BuiltinKind::Harmonic), &z0, FRAC_PI_2, 10_000, JACOBIAN_STEP).unwrap();
        let qp = [
            [j.matrix[(1, 1)], j.matrix[(1, 3)]],
            [j.matrix[(3, 1)], j.matrix[(3, 3)]],
        ];
        let rot = [[0.0, 1.0], [-1.0, 0.0]];
        for a in 0..2 {
            for b in 0..2 {
                assert!((qp[a][b] - rot[a][b]).abs() <= 1e-5);
            }
        }
    }

    #[test]
    fn membership_examples() {
        let z0 = ExtendedState::scalar(0.0, 1.0, 0.0, 0.0);
        let id = check_hsp_membership(&FlowJacobian::identity(z0.clone()), 0.0);
        assert_eq!(
            (id.symplectic_residual, id.time_row_residual, id.pass),
            (0.0, 0.0, true)
        );

        let j = flow_jacobian(&sys(BuiltinKind::Harmonic), &z0, 1.0, 10_000, JACOBIAN_STEP).unwrap();
        assert!(check_hsp_membership(&j, 1e-5).pass);

        let stretch = |z: &[f64]| {
            let mut dz = vec![0.0; z.len()];
            dz[0] = 1.0;
            dz[1] = z[1];
            Some(dz)
        };
        let j = field_jacobian(&stretch, &z0, 1.0, 1000, JACOBIAN_STEP, false).unwrap();
        let rep = check_hsp_membership(&j, 1e-5);
        assert!(!rep.pass && rep.symplectic_residual > 1.0);
    }

    #[test]
    fn richardson_sharpens_jacobian() {
        let z0 = ExtendedState::scalar(0.0, 0.7, 0.0, 0.2);
        let field = |z: &[f64]| hamiltonian_field(&sys(BuiltinKind::Harmonic), z);
        let plain = field_jacobian(&field, &z0, 1.0, 2000, 1e-2, false).unwrap();
        let sharp = field_jacobian(&field, &z0, 1.0, 2000, 1e-2, true).unwrap();
        let exact = field_jacobian(&field, &z0, 1.0, 2000, 1e-5, false).unwrap();
        assert!(max_abs_diff(&sharp.matrix, &exact.matrix) <= max_abs_diff(&plain.matrix, &exact.matrix) + 1e-12);
    }

    fn structure(kind: BuiltinKind, z0: ExtendedState) -> StructureReport {
        let j = flow_jacobian(&sys(kind), &z0, 1e-3, 100, JACOBIAN_STEP).unwrap();
        verify_hamilton_structure(&j, &sys(kind), 1e-5).unwrap()
    }

    #[test]
    fn structure_examples() {
        let rep = structure(BuiltinKind::Zero, ExtendedState::scalar(0.0, 0.4, 0.0, 1.0));
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!(rep.v_slot[0].abs() <= 1e-12 && rep.f_slot[0].abs() <= 1e-12 && rep.r_slot == 0.0);

        let rep = structure(BuiltinKind::Free, ExtendedState::scalar(0.0, 0.0, 0.0, 2.0));
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.v_slot[0] - 2.0).abs() <= 1e-8 && rep.f_slot[0].abs() <= 1e-8);

        let rep = structure(BuiltinKind::Harmonic, ExtendedState::scalar(0.0, 1.0, 0.0, 0.0));
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.f_slot[0] + 1.0).abs() <= 1e-8);

        let rep = structure(BuiltinKind::Driven, ExtendedState::scalar(0.5, 1.0, 0.0, 0.3));
        assert_eq!(rep.verdict, Verdict::Pass);
        assert!((rep.r_slot - 0.1).abs() <= 1e-8);
    }

    #[test]
    fn long_interval_is_inconclusive() {
        let z0 = ExtendedState::scalar(0.0, 1.0, 0.0, 0.0);
        let j = flow_jacobian(&sys(BuiltinKind::Harmonic), &z0, 1.0, 1000, JACOBIAN_STEP).unwrap();
        let rep = verify_hamilton_structure(&j, &sys(BuiltinKind::Harmonic), 1e-5).unwrap();
        assert_eq!(rep.verdict, Verdict::Inconclusive);
    }

    /// Harmonic energy paired with the free-particle gradient.
    struct Mislabeled;

    impl Hamiltonian for Mislabeled {
        fn n(&self) -> usize {
            1
        }

        fn energy(&self, p: &[f64], q: &[f64], _t: f64) -> f64 {
            (p[0] * p[0] + q[0] * q[0]) / 2.0
        }

        fn gradient(&self, p: &[f64], _q: &[f64], _t: f64) -> Option<Gradient> {
            Some(Gradient {
                dp: p.to_vec(),
                dq: vec![0.0],
                dt: 0.0,
            })
        }
    }

    #[test]
    fn inconsistent_gradient_fails() {
        let z0 = ExtendedState::scalar(0.0, 1.0, 0.0, 0.5);
        let j = flow_jacobian(&Mislabeled, &z0, 1e-3, 100, JACOBIAN_STEP).unwrap();
        let rep = verify_hamilton_structure(&j, &Mislabeled, 1e-5).unwrap();
        assert_eq!(rep.verdict, Verdict::Fail);
        assert!((rep.slot_error - 1.0).abs() <= 1e-6);
    }

    #[test]
    fn energy_dependence_fails() {
        let s = sys(BuiltinKind::Harmonic);
        let z0 = ExtendedState::scalar(0.0, 1.0, 0.0, 0.5);
        let mut j = flow_jacobian(&s, &z0, 1e-3, 100, JACOBIAN_STEP).unwrap();
        j.matrix[(1, 2)] = 0.1;
        assert_eq!(verify_hamilton_structure(&j, &s, 1e-5).unwrap().verdict, Verdict::Fail);
    }

    #[test]
    fn composition_of_jacobians() {
        let s = sys(BuiltinKind::Driven);
        let z0 = ExtendedState::scalar(0.2, 0.8, 0.1, -0.4);
        let d = 0.3;
        let whole = flow_jacobian(&s, &z0, 2.0 * d, 2000, JACOBIAN_STEP).unwrap();
        let first = flow_jacobian(&s, &z0, d, 1000, JACOBIAN_STEP).unwrap();
        let mid = integrate_flow(&s, &z0, d, 1000).unwrap();
        let second = flow_jacobian(&s, &mid, d, 1000, JACOBIAN_STEP).unwrap();
        assert!(max_abs_diff(&whole.matrix, &(second.matrix * first.matrix)) <= 1e-8);
    }

    #[test]
    fn energy_constant_without_explicit_time() {
        let z0 = ExtendedState::scalar(0.0, 0.6, 1.25, -0.2);
        for kind in [BuiltinKind::Free, BuiltinKind::Harmonic] {
            let z = integrate_flow(&sys(kind), &z0, 3.0, 500).unwrap();
            assert_eq!(z.e, z0.e);
        }
    }

    #[test]
    fn driven_energy_tracks_hamiltonian() {
        let s = sys(BuiltinKind::Driven);
        let z0 = ExtendedState::scalar(0.0, 1.0, 0.0, 0.0);
        let z = integrate_flow(&s, &z0, 2.0, 4000).unwrap();
        let gain = s.energy(&z.p, &z.q, z.t) - s.energy(&z0.p, &z0.q, z0.t);
        assert!((z.e - z0.e - gain).abs() <= 1e-10);
    }

    #[test]
    fn polynomial_file_format() {
        let h = PolynomialHamiltonian::from_json(r#"{"2,0,0": 0.5, "0,2,0": 0.5, "0,1,1": 0.1}"#).unwrap();
        let d = Builtin::new(BuiltinKind::Driven, 1);
        for (p, q, t) in [(0.3, -1.0, 2.0), (1.5, 0.2, -0.7)] {
            assert!((h.energy(&[p], &[q], t) - d.energy(&[p], &[q], t)).abs() <= 1e-15);
        }
        assert!(PolynomialHamiltonian::from_json(r#"{"2,0": 1.0}"#).is_err());
        assert!(PolynomialHamiltonian::from_json(r#"{"a,0,0": 1.0}"#).is_err());
        assert!(PolynomialHamiltonian::from_json("[1, 2]").is_err());
    }

    #[test]
    fn analytic_gradients_match_numeric() {
        for kind in BuiltinKind::ALL {
            assert!(gradient_consistency(&Builtin::new(kind, 2), 50, 9) <= 1e-6);
        }
        let h = PolynomialHamiltonian::from_json(r#"{"3,1,0": -0.2, "0,4,2": 0.05, "1,0,1": 1.0}"#).unwrap();
        assert!(gradient_consistency(&h, 50, 9) <= 1e-6);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(24))]

            #[test]
            fn flows_are_symplectic(kind in prop::sample::select(BuiltinKind::ALL.to_vec()),
                                    z in prop::array::uniform4(-1.5..1.5f64), t1 in 0.1..2.0f64) {
                let z0 = ExtendedState::from_slice(&z).unwrap();
                let j = flow_jacobian(&sys(kind), &z0, t1, 2000, JACOBIAN_STEP).unwrap();
                let tol = 1e-5f64.max(100.0 * JACOBIAN_STEP * JACOBIAN_STEP + 10.0 / 2000f64.powi(4));
                prop_assert!(check_hsp_membership(&j, tol).pass);
                prop_assert!(j.energy_column_residual() <= tol);
            }

            #[test]
            fn polynomial_flows_are_symplectic(k in prop::array::uniform3(-0.3..0.3f64),
                                               z in prop::array::uniform4(-1.0..1.0f64)) {
                let h = PolynomialHamiltonian::new(vec![
                    ([2, 0, 0], 0.5), ([0, 2, 0], 0.5), ([1, 1, 1], k[0]), ([0, 3, 0], k[1]), ([2, 1, 0], k[2]),
                ]).unwrap();
                let z0 = ExtendedState::from_slice(&z).unwrap();
                let j = flow_jacobian(&h, &z0, 0.5, 2000, JACOBIAN_STEP).unwrap();
                prop_assert!(check_hsp_membership(&j, 1e-5).pass);
            }
        }
    }
}
