//! Transformations preserving the Born line element, the Hamilton group and
//! the `b → ∞`, `c → ∞` contractions.
//!
//! For n = 1 the transformation of a frame with velocity `v`, force `f` and
//! power `r` is, in `(t, q, e, p)` order,
//!
//! ```text
//! dt̃ = γ (dt + v dq/c² - r de/(b²c²) + f dp/b²)
//! dq̃ = γ (dq + v dt - f de/b² + r dp/b²)
//! dẽ = γ (de + v dp - f dq + r dt)
//! dp̃ = γ (dp + f dt - r dq/c² + v de/c²)
//! ```
//!
//! with `γ = (1 - v²/c² - f²/b² + r²/(b²c²))^(-1/2)`.
//!
//! Structural checks run in normalized coordinates `(t, q/c, e/(bc), p/b)`,
//! where the Born metric becomes `diag(1, -1, 1, -1)` and every element takes
//! the block form `[[L, -M], [M, L]]`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{positive, same_dim, Error, Result};
use crate::linalg::{loglog_slope, max_abs, max_abs_diff};
use crate::phase_space::{gamma_factor, line_element, Displacement, KinematicState, MetricSpec};
use crate::rng::SweepRng;

/// Tolerance used when constructing group elements.
pub const METRIC_TOL: f64 = 1e-10;

fn check_scales(c: f64, b: f64) -> Result<()> {
    positive("c", c)?;
    positive("b", b)?;
    Ok(())
}

/// Diagonal of the map to normalized coordinates.
fn normalizer(n: usize, c: f64, b: f64) -> DVector<f64> {
    let mut d = Vec::with_capacity(2 * n + 2);
    d.push(1.0);
    d.extend(std::iter::repeat_n(1.0 / c, n));
    d.push(1.0 / (b * c));
    d.extend(std::iter::repeat_n(1.0 / b, n));
    DVector::from_vec(d)
}

/// `N Γ N⁻¹` for the diagonal normalizer `N`.
fn normalize(gamma: &DMatrix<f64>, n: usize, c: f64, b: f64) -> DMatrix<f64> {
    let d = normalizer(n, c, b);
    DMatrix::from_fn(gamma.nrows(), gamma.ncols(), |i, j| d[i] * gamma[(i, j)] / d[j])
}

fn signature(m: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, m, |i, j| match (i == j, i == 0) {
        (false, _) => 0.0,
        (true, true) => 1.0,
        (true, false) => -1.0,
    })
}

fn timelike_signature(n: usize) -> DMatrix<f64> {
    let mut s = DMatrix::zeros(2 * n + 2, 2 * n + 2);
    for i in 0..=n {
        let sign = if i == 0 { 1.0 } else { -1.0 };
        s[(i, i)] = sign;
        s[(n + 1 + i, n + 1 + i)] = sign;
    }
    s
}

/// Max-norm of `Λ̂ᵗ η̂ Λ̂ - η̂` for `Λ̂ = diag(1, 1/c) Λ diag(1, c)`.
pub fn lorentz_residual(lambda: &DMatrix<f64>, c: f64) -> Result<f64> {
    let m = lambda.nrows();
    if m < 2 || lambda.ncols() != m {
        return Err(Error::BadShape {
            rows: m,
            cols: lambda.ncols(),
        });
    }
    let w = |i: usize| if i == 0 { 1.0 } else { c };
    let hat = DMatrix::from_fn(m, m, |i, j| lambda[(i, j)] * w(j) / w(i));
    let eta = signature(m);
    Ok(max_abs_diff(&(hat.transpose() * &eta * &hat), &eta))
}

/// Boost with velocity `v` in `(t, q)` layout: `dt̃ = γ(dt + v·dq/c²)`,
/// `dq̃ = dq + (γ-1)(v̂·dq)v̂ + γ v dt`.
pub fn lorentz_boost(v: &[f64], c: f64) -> Result<DMatrix<f64>> {
    positive("c", c)?;
    let n = v.len();
    let v2: f64 = v.iter().map(|x| x * x).sum();
    let speed = v2.sqrt();
    if !(speed < c) {
        return Err(Error::Superluminal { speed, c });
    }
    let g = 1.0 / (1.0 - v2 / (c * c)).sqrt();
    let mut m = DMatrix::identity(n + 1, n + 1);
    m[(0, 0)] = g;
    for i in 0..n {
        m[(0, i + 1)] = g * v[i] / (c * c);
        m[(i + 1, 0)] = g * v[i];
        if v2 > 0.0 {
            for j in 0..n {
                m[(i + 1, j + 1)] += (g - 1.0) * v[i] * v[j] / v2;
            }
        }
    }
    Ok(m)
}

/// An element of the group preserving the Born metric, acting on
/// displacements in `(t, q, e, p)` layout.
#[derive(Debug, Clone, PartialEq)]
pub struct UnitaryElement {
    n: usize,
    gamma: DMatrix<f64>,
    c: f64,
    b: f64,
}

impl UnitaryElement {
    pub fn new(gamma: DMatrix<f64>, c: f64, b: f64) -> Result<Self> {
        Self::with_tolerance(gamma, c, b, METRIC_TOL)
    }

    pub fn with_tolerance(gamma: DMatrix<f64>, c: f64, b: f64, tol: f64) -> Result<Self> {
        check_scales(c, b)?;
        let m = gamma.nrows();
        if m < 4 || !m.is_multiple_of(2) || gamma.ncols() != m {
            return Err(Error::BadShape {
                rows: m,
                cols: gamma.ncols(),
            });
        }
        let u = Self {
            n: m / 2 - 1,
            gamma,
            c,
            b,
        };
        let residual = u.metric_residual().max(u.block_residual());
        if residual > tol {
            return Err(Error::MetricViolation { residual });
        }
        Ok(u)
    }

    pub fn identity(n: usize, c: f64, b: f64) -> Result<Self> {
        check_scales(c, b)?;
        Ok(Self {
            n,
            gamma: DMatrix::identity(2 * n + 2, 2 * n + 2),
            c,
            b,
        })
    }

    /// The n = 1 element of a frame with velocity, force and power `s`.
    pub fn from_state(s: &KinematicState, c: f64, b: f64) -> Result<Self> {
        Self::new(explicit_matrix(s, c, b)?, c, b)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.gamma
    }

    /// The matrix in normalized coordinates.
    pub fn normalized(&self) -> DMatrix<f64> {
        normalize(&self.gamma, self.n, self.c, self.b)
    }

    /// Max-norm of `Γ̂ᵗ Ĝ Γ̂ - Ĝ` in normalized coordinates.
    pub fn metric_residual(&self) -> f64 {
        let g = self.normalized();
        let s = timelike_signature(self.n);
        max_abs_diff(&(g.transpose() * &s * &g), &s)
    }

    /// Deviation of the normalized matrix from the `[[L, -M], [M, L]]` pattern.
    pub fn block_residual(&self) -> f64 {
        let g = self.normalized();
        let k = self.n + 1;
        let tl = g.view((0, 0), (k, k));
        let tr = g.view((0, k), (k, k));
        let bl = g.view((k, 0), (k, k));
        let br = g.view((k, k), (k, k));
        max_abs(&(tl - br).into_owned()).max(max_abs(&(tr + bl).into_owned()))
    }

    pub fn apply(&self, d: &Displacement) -> Result<Displacement> {
        same_dim(self.n, d.n())?;
        Displacement::from_vector(&(&self.gamma * d.vector()))
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        same_dim(self.n, other.n)?;
        if self.c != other.c || self.b != other.b {
            return Err(Error::InvalidParameter {
                name: "scales",
                reason: "elements use different c or b".into(),
            });
        }
        Self::new(&self.gamma * &other.gamma, self.c, self.b)
    }

    /// `Γ⁻¹ = G⁻¹ Γᵗ G`.
    pub fn inverse(&self) -> Self {
        let d = normalizer(self.n, self.c, self.b);
        let s = timelike_signature(self.n);
        let g = self.normalized();
        let inv_hat = &s * g.transpose() * &s;
        let gamma = DMatrix::from_fn(inv_hat.nrows(), inv_hat.ncols(), |i, j| inv_hat[(i, j)] * d[j] / d[i]);
        Self {
            n: self.n,
            gamma,
            c: self.c,
            b: self.b,
        }
    }
}

/// `diag(Λ, DΛD⁻¹)` with `D = diag(c², 1ₙ)`, so that the `(e, p)` block acts on
/// `(e, p)` the way `Λ` acts on `(c²t, q)`.
pub fn unitary_from_lorentz(lambda: &DMatrix<f64>, c: f64, b: f64) -> Result<UnitaryElement> {
    check_scales(c, b)?;
    let residual = lorentz_residual(lambda, c)?;
    if residual > METRIC_TOL {
        return Err(Error::MetricViolation { residual });
    }
    let k = lambda.nrows();
    let w = |i: usize| if i == 0 { c * c } else { 1.0 };
    let mut gamma = DMatrix::zeros(2 * k, 2 * k);
    gamma.view_mut((0, 0), (k, k)).copy_from(lambda);
    for i in 0..k {
        for j in 0..k {
            gamma[(k + i, k + j)] = w(i) * lambda[(i, j)] / w(j);
        }
    }
    UnitaryElement::new(gamma, c, b)
}

fn require_scalar(s: &KinematicState) -> Result<()> {
    if s.n() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            found: s.n(),
        });
    }
    Ok(())
}

/// The n = 1 transformation equations applied to `d`.
pub fn explicit_transform(s: &KinematicState, d: &Displacement, c: f64, b: f64) -> Result<Displacement> {
    check_scales(c, b)?;
    require_scalar(s)?;
    same_dim(1, d.n())?;
    let g = gamma_factor(s, c, b)?;
    let (v, f, r) = (s.v[0], s.f[0], s.r);
    let (dt, dq, de, dp) = (d.dt, d.dq[0], d.de, d.dp[0]);
    let (c2, b2) = (c * c, b * b);
    Ok(Displacement::scalar(
        g * (dt + v * dq / c2 - r * de / (b2 * c2) + f * dp / b2),
        g * (dq + v * dt - f * de / b2 + r * dp / b2),
        g * (de + v * dp - f * dq + r * dt),
        g * (dp + f * dt - r * dq / c2 + v * de / c2),
    ))
}

/// Matrix of [`explicit_transform`], read off from its action on basis displacements.
pub fn explicit_matrix(s: &KinematicState, c: f64, b: f64) -> Result<DMatrix<f64>> {
    let mut m = DMatrix::zeros(4, 4);
    for j in 0..4 {
        let mut e = [0.0; 4];
        e[j] = 1.0;
        let image = explicit_transform(s, &Displacement::from_slice(&e)?, c, b)?;
        m.set_column(j, &image.vector());
    }
    Ok(m)
}

/// Largest `|ds²(Γd) - ds²(d)|` over `trials` random displacements whose
/// components are drawn from `[-1, 1]` in normalized units.
pub fn born_invariance_residual(s: &KinematicState, c: f64, b: f64, trials: usize, seed: u64) -> Result<f64> {
    let metric = MetricSpec::born(1, c, b)?;
    let gamma = explicit_matrix(s, c, b)?;
    let scale = [1.0, c, b * c, b];
    let mut rng = SweepRng::new(seed);
    let mut worst = 0.0f64;
    for _ in 0..trials {
        let raw: Vec<f64> = scale.iter().map(|k| k * rng.uniform(-1.0, 1.0)).collect();
        let d = Displacement::from_slice(&raw)?;
        let image = Displacement::from_vector(&(&gamma * d.vector()))?;
        let gap = (line_element(&metric, &image)? - line_element(&metric, &d)?).abs();
        worst = worst.max(gap);
    }
    Ok(worst)
}

/// The `b → ∞` limit of [`explicit_matrix`] at fixed `(v, f, r)`, with the
/// special relativity factor `γ = (1 - v²/c²)^(-1/2)`. Block lower triangular.
pub fn contracted_b_matrix(s: &KinematicState, c: f64) -> Result<DMatrix<f64>> {
    positive("c", c)?;
    require_scalar(s)?;
    let (v, f, r) = (s.v[0], s.f[0], s.r);
    if !(v.abs() < c) {
        return Err(Error::Superluminal { speed: v.abs(), c });
    }
    let g = 1.0 / (1.0 - v * v / (c * c)).sqrt();
    let c2 = c * c;
    #[rustfmt::skip]
    let m = DMatrix::from_row_slice(4, 4, &[
        1.0,     v / c2,  0.0,    0.0,
        v,       1.0,     0.0,    0.0,
        r,       -f,      1.0,    v,
        f,       -r / c2, v / c2, 1.0,
    ]);
    Ok(m * g)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionSample {
    pub scale: f64,
    pub image: Displacement,
    pub deviation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContractionReport {
    pub limit: Displacement,
    pub samples: Vec<ContractionSample>,
}

impl ContractionReport {
    pub fn deviations(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.deviation).collect()
    }

    pub fn monotone(&self) -> bool {
        self.samples.windows(2).all(|w| w[1].deviation <= w[0].deviation)
    }
}

fn increasing(values: &[f64]) -> Result<()> {
    if values.is_empty() || values.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter {
            name: "scales",
            reason: "must be a nonempty increasing list".into(),
        });
    }
    Ok(())
}

/// Images of `d` for each force scale in `b_values`, against the contracted limit.
pub fn contract_b(s: &KinematicState, d: &Displacement, c: f64, b_values: &[f64]) -> Result<ContractionReport> {
    increasing(b_values)?;
    same_dim(1, d.n())?;
    let limit = Displacement::from_vector(&(contracted_b_matrix(s, c)? * d.vector()))?;
    let lv = limit.to_vec();
    let samples = b_values
        .iter()
        .map(|&b| {
            let image = explicit_transform(s, d, c, b)?;
            let deviation = image
                .to_vec()
                .iter()
                .zip(&lv)
                .map(|(a, l)| (a - l).abs())
                .fold(0.0, f64::max);
            Ok(ContractionSample {
                scale: b,
                image,
                deviation,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ContractionReport { limit, samples })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFit {
    pub scales: Vec<f64>,
    pub deviations: Vec<f64>,
    pub slope: f64,
}

impl ScaleFit {
    fn new(scales: &[f64], deviations: Vec<f64>) -> Self {
        let slope = loglog_slope(scales, &deviations);
        Self {
            scales: scales.to_vec(),
            deviations,
            slope,
        }
    }

    pub fn monotone(&self) -> bool {
        self.deviations.windows(2).all(|w| w[1] <= w[0])
    }
}

/// `‖Γ(b) - Γ°‖` (max-norm) for each `b`, with the log-log slope.
pub fn contraction_b_fit(s: &KinematicState, c: f64, b_values: &[f64]) -> Result<ScaleFit> {
    increasing(b_values)?;
    let limit = contracted_b_matrix(s, c)?;
    let devs = b_values
        .iter()
        .map(|&b| Ok(max_abs_diff(&explicit_matrix(s, c, b)?, &limit)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaleFit::new(b_values, devs))
}

/// `‖Γ°(c) - H‖` for each `c`, where `H` is the Hamilton transformation with
/// `R = 1` and the same `(v, f, r)`.
pub fn contraction_c_fit(s: &KinematicState, c_values: &[f64]) -> Result<ScaleFit> {
    increasing(c_values)?;
    require_scalar(s)?;
    let h = HamiltonGroupElement::new(DMatrix::identity(1, 1), s.v.clone(), s.f.clone(), s.r)?.matrix();
    let devs = c_values
        .iter()
        .map(|&c| Ok(max_abs_diff(&contracted_b_matrix(s, c)?, &h)))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaleFit::new(c_values, devs))
}

/// `|ds²_Born(d) - ds²_Minkowski(d)|` as `b` grows.
pub fn metric_b_fit(d: &Displacement, c: f64, b_values: &[f64]) -> Result<ScaleFit> {
    increasing(b_values)?;
    let mink = line_element(&MetricSpec::minkowski(d.n(), c)?, d)?;
    let devs = b_values
        .iter()
        .map(|&b| Ok((line_element(&MetricSpec::born(d.n(), c, b)?, d)? - mink).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaleFit::new(b_values, devs))
}

/// `|ds²_Minkowski(d) - ds²_Newton(d)|` as `c` grows.
pub fn metric_c_fit(d: &Displacement, c_values: &[f64]) -> Result<ScaleFit> {
    increasing(c_values)?;
    let newton = line_element(&MetricSpec::newton(d.n()), d)?;
    let devs = c_values
        .iter()
        .map(|&c| Ok((line_element(&MetricSpec::minkowski(d.n(), c)?, d)? - newton).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(ScaleFit::new(c_values, devs))
}

/// Rotation, velocity, force and power of a noninertial frame change in
/// the nonrelativistic limit.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonGroupElement {
    rotation: DMatrix<f64>,
    v: Vec<f64>,
    f: Vec<f64>,
    r: f64,
}

impl HamiltonGroupElement {
    pub fn new(rotation: DMatrix<f64>, v: Vec<f64>, f: Vec<f64>, r: f64) -> Result<Self> {
        let n = rotation.nrows();
        if rotation.ncols() != n || n == 0 {
            return Err(Error::BadShape {
                rows: n,
                cols: rotation.ncols(),
            });
        }
        same_dim(n, v.len())?;
        same_dim(n, f.len())?;
        let orth = max_abs_diff(&(rotation.transpose() * &rotation), &DMatrix::identity(n, n));
        let det = (rotation.determinant() - 1.0).abs();
        let residual = orth.max(det);
        if !(residual <= METRIC_TOL) {
            return Err(Error::NotARotation { residual });
        }
        Ok(Self { rotation, v, f, r })
    }

    /// A Euclidean element: rotation and velocity only.
    pub fn euclidean(rotation: DMatrix<f64>, v: Vec<f64>) -> Result<Self> {
        let n = v.len();
        Self::new(rotation, v, vec![0.0; n], 0.0)
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.rotation
    }

    pub fn v(&self) -> &[f64] {
        &self.v
    }

    pub fn f(&self) -> &[f64] {
        &self.f
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    /// Matrix in `(t, q, e, p)` layout.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(2 * n + 2, 2 * n + 2);
        m[(0, 0)] = 1.0;
        m[(n + 1, n + 1)] = 1.0;
        m[(n + 1, 0)] = self.r;
        for i in 0..n {
            m[(1 + i, 0)] = self.v[i];
            m[(n + 2 + i, 0)] = self.f[i];
            m[(n + 1, 1 + i)] = -self.f[i];
            m[(n + 1, n + 2 + i)] = self.v[i];
            for j in 0..n {
                m[(1 + i, 1 + j)] = self.rotation[(i, j)];
                m[(n + 2 + i, n + 2 + j)] = self.rotation[(i, j)];
            }
        }
        m
    }
}

/// `dt̃ = dt`, `dq̃ = R dq + v dt`, `dp̃ = R dp + f dt`, `dẽ = de + v·dp - f·dq + r dt`.
pub fn hamilton_transform(g: &HamiltonGroupElement, d: &Displacement) -> Result<Displacement> {
    same_dim(g.n(), d.n())?;
    let dq = DVector::from_column_slice(&d.dq);
    let dp = DVector::from_column_slice(&d.dp);
    let v = DVector::from_column_slice(&g.v);
    let f = DVector::from_column_slice(&g.f);
    let q = &g.rotation * &dq + &v * d.dt;
    let p = &g.rotation * &dp + &f * d.dt;
    let e = d.de + v.dot(&dp) - f.dot(&dq) + g.r * d.dt;
    Displacement::new(d.dt, q.as_slice().to_vec(), e, p.as_slice().to_vec())
}

/// True when the mixing blocks vanish and the remaining block is a Lorentz
/// transformation, both to within `tol` in normalized coordinates.
pub fn is_lorentz_subgroup(u: &UnitaryElement, tol: f64) -> bool {
    let g = u.normalized();
    let k = u.n() + 1;
    let mixing = max_abs(&g.view((0, k), (k, k)).into_owned()).max(max_abs(&g.view((k, 0), (k, k)).into_owned()));
    let l = g.view((0, 0), (k, k)).into_owned();
    let eta = signature(k);
    mixing <= tol && max_abs_diff(&(l.transpose() * &eta * &l), &eta) <= tol
}
