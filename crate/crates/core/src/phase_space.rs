//! Line elements on extended phase space and the causal structure of the
//! Born metric.
//!
//! Coordinates are ordered `(t, q¹..qⁿ, e, p¹..pⁿ)`. In that order the Born
//! metric is `diag(1, -1/c²·1ₙ, 1/(b²c²), -1/b²·1ₙ)`:
//!
//! ```text
//! ds² = dt² - dq²/c² + de²/(b²c²) - dp²/b²
//! ```
//!
//! and for a state with velocity `v = dq/dt`, force `f = dp/dt` and power
//! `r = de/dt` it factors as `ds² = dt² D` with
//! `D = 1 - v²/c² - f²/b² + r²/(c²b²)`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{positive, same_dim, Error, Result};

/// Default `|ds²|` below which an interval counts as null.
pub const NULL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    Born,
    Minkowski,
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSpec {
    pub kind: MetricKind,
    pub n: usize,
    pub c: f64,
    pub b: f64,
}

impl MetricSpec {
    pub fn born(n: usize, c: f64, b: f64) -> Result<Self> {
        Ok(Self {
            kind: MetricKind::Born,
            n,
            c: positive("c", c)?,
            b: positive("b", b)?,
        })
    }

    pub fn minkowski(n: usize, c: f64) -> Result<Self> {
        Ok(Self {
            kind: MetricKind::Minkowski,
            n,
            c: positive("c", c)?,
            b: f64::INFINITY,
        })
    }

    pub fn newton(n: usize) -> Self {
        Self {
            kind: MetricKind::Newton,
            n,
            c: f64::INFINITY,
            b: f64::INFINITY,
        }
    }

    /// Born metric with `c = b = 1`.
    pub fn natural(n: usize) -> Self {
        Self {
            kind: MetricKind::Born,
            n,
            c: 1.0,
            b: 1.0,
        }
    }

    fn weights(&self) -> (f64, f64, f64, f64) {
        let (c, b) = (self.c, self.b);
        match self.kind {
            MetricKind::Born => (1.0, -1.0 / (c * c), 1.0 / (b * b * c * c), -1.0 / (b * b)),
            MetricKind::Minkowski => (1.0, -1.0 / (c * c), 0.0, 0.0),
            MetricKind::Newton => (1.0, 0.0, 0.0, 0.0),
        }
    }

    /// The (2n+2)×(2n+2) diagonal metric matrix; degenerate for Minkowski and Newton.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n;
        let (wt, wq, we, wp) = self.weights();
        let mut diag = Vec::with_capacity(2 * n + 2);
        diag.push(wt);
        diag.extend(std::iter::repeat_n(wq, n));
        diag.push(we);
        diag.extend(std::iter::repeat_n(wp, n));
        DMatrix::from_diagonal(&DVector::from_vec(diag))
    }
}

/// A displacement `dz = (dt, dq, de, dp)` on extended phase space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Displacement {
    pub dt: f64,
    pub dq: Vec<f64>,
    pub de: f64,
    pub dp: Vec<f64>,
}

impl Displacement {
    pub fn new(dt: f64, dq: Vec<f64>, de: f64, dp: Vec<f64>) -> Result<Self> {
        same_dim(dq.len(), dp.len())?;
        let d = Self { dt, dq, de, dp };
        if !d.to_vec().iter().all(|x| x.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "displacement",
                reason: "entries must be finite".into(),
            });
        }
        Ok(d)
    }

    /// Scalar (n = 1) displacement.
    pub fn scalar(dt: f64, dq: f64, de: f64, dp: f64) -> Self {
        Self {
            dt,
            dq: vec![dq],
            de,
            dp: vec![dp],
        }
    }

    pub fn n(&self) -> usize {
        self.dq.len()
    }

    /// Canonical layout `(dt, dq¹..dqⁿ, de, dp¹..dpⁿ)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(2 * self.n() + 2);
        v.push(self.dt);
        v.extend_from_slice(&self.dq);
        v.push(self.de);
        v.extend_from_slice(&self.dp);
        v
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() < 4 || !v.len().is_multiple_of(2) {
            return Err(Error::InvalidParameter {
                name: "displacement",
                reason: format!("expected 2n+2 >= 4 components, got {}", v.len()),
            });
        }
        let n = (v.len() - 2) / 2;
        Self::new(v[0], v[1..=n].to_vec(), v[n + 1], v[n + 2..].to_vec())
    }

    /// Adapter from the `(t, q, p, e)` ordering used when the transformation
    /// equations are written out for n = 1.
    pub fn from_tqpe(dt: f64, dq: f64, dp: f64, de: f64) -> Self {
        Self::scalar(dt, dq, de, dp)
    }

    pub fn vector(&self) -> DVector<f64> {
        DVector::from_vec(self.to_vec())
    }

    pub fn from_vector(v: &DVector<f64>) -> Result<Self> {
        Self::from_slice(v.as_slice())
    }
}

/// Velocity `v = dq/dt`, force `f = dp/dt` and power `r = de/dt`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KinematicState {
    pub v: Vec<f64>,
    pub f: Vec<f64>,
    pub r: f64,
}

impl KinematicState {
    pub fn new(v: Vec<f64>, f: Vec<f64>, r: f64) -> Result<Self> {
        same_dim(v.len(), f.len())?;
        if !(v.iter().chain(&f).all(|x| x.is_finite()) && r.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "state",
                reason: "entries must be finite".into(),
            });
        }
        Ok(Self { v, f, r })
    }

    /// Scalar (n = 1) state.
    pub fn scalar(v: f64, f: f64, r: f64) -> Self {
        Self {
            v: vec![v],
            f: vec![f],
            r,
        }
    }

    pub fn inertial(n: usize) -> Self {
        Self {
            v: vec![0.0; n],
            f: vec![0.0; n],
            r: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    pub fn speed_sq(&self) -> f64 {
        self.v.iter().map(|x| x * x).sum()
    }

    pub fn force_sq(&self) -> f64 {
        self.f.iter().map(|x| x * x).sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum IntervalClass {
    Timelike,
    Null,
    Spacelike,
}

/// `dᵗ G d` for the metric `m`.
pub fn line_element(m: &MetricSpec, d: &Displacement) -> Result<f64> {
    same_dim(m.n, d.n())?;
    let (wt, wq, we, wp) = m.weights();
    let sq = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>();
    // Skip zero weights so infinite scales never produce 0 * inf.
    let mut s = wt * d.dt * d.dt;
    if wq != 0.0 {
        s += wq * sq(&d.dq);
    }
    if we != 0.0 {
        s += we * d.de * d.de;
    }
    if wp != 0.0 {
        s += wp * sq(&d.dp);
    }
    Ok(s)
}

/// Energy-momentum line element `dμ² = (de²/c² - dp²)/c²`.
pub fn mass_line_element(d: &Displacement, c: f64) -> f64 {
    let dp2: f64 = d.dp.iter().map(|x| x * x).sum();
    (d.de * d.de / (c * c) - dp2) / (c * c)
}

pub fn interval_class(m: &MetricSpec, d: &Displacement, tol: f64) -> Result<IntervalClass> {
    let s = line_element(m, d)?;
    Ok(if s.abs() <= tol {
        IntervalClass::Null
    } else if s > 0.0 {
        IntervalClass::Timelike
    } else {
        IntervalClass::Spacelike
    })
}

/// `1 - v²/c² - f²/b² + r²/(c²b²)`; zero exactly on the null hypersurface.
pub fn null_surface_residual(s: &KinematicState, c: f64, b: f64) -> f64 {
    1.0 - s.speed_sq() / (c * c) - s.force_sq() / (b * b) + s.r * s.r / (c * c * b * b)
}

/// Time dilation factor `dt/ds = D^(-1/2)`.
pub fn gamma_factor(s: &KinematicState, c: f64, b: f64) -> Result<f64> {
    let d = null_surface_residual(s, c, b);
    if d > 0.0 {
        Ok(1.0 / d.sqrt())
    } else {
        Err(Error::NotTimelike { denominator: d })
    }
}

/// `(dμ/dt)² = (r²/c² - f²)/c²`, signed: negative off the mass shell in the
/// spacelike direction.
pub fn mass_rate_squared(s: &KinematicState, c: f64) -> f64 {
    (s.r * s.r / (c * c) - s.force_sq()) / (c * c)
}

/// Time dilation through the mass rate:
/// `dt/ds = (1 - v²/c² + (c²/b²)(dμ/dt)²)^(-1/2)`.
///
/// The `+` sign follows from `ds² = dτ² + (c²/b²)dμ²`; with it this agrees
/// with [`gamma_factor`].
pub fn gamma_from_mass_rate(speed_sq: f64, mass_rate_sq: f64, c: f64, b: f64) -> Result<f64> {
    let d = 1.0 - speed_sq / (c * c) + c * c / (b * b) * mass_rate_sq;
    if d > 0.0 {
        Ok(1.0 / d.sqrt())
    } else {
        Err(Error::NotTimelike { denominator: d })
    }
}

/// `dτ/ds = (1 + (c²/b²)(dμ/dτ)²)^(-1/2)`, the rate of Minkowski proper time
/// along a Born interval.
pub fn proper_time_rate(mass_rate_per_tau_sq: f64, c: f64, b: f64) -> Result<f64> {
    let d = 1.0 + c * c / (b * b) * mass_rate_per_tau_sq;
    if d > 0.0 {
        Ok(1.0 / d.sqrt())
    } else {
        Err(Error::NotTimelike { denominator: d })
    }
}

/// Speeds `±c√(1 - f²/b² + r²/(c²b²))` on the null hypersurface at the given
/// force magnitude and power. Returned as `(+v, -v)`.
pub fn null_velocity(f_mag: f64, r: f64, c: f64, b: f64) -> Result<(f64, f64)> {
    let radicand = 1.0 - f_mag * f_mag / (b * b) + r * r / (c * c * b * b);
    if radicand < 0.0 {
        return Err(Error::NoNullVelocity { radicand });
    }
    let v = c * radicand.sqrt();
    Ok((v, -v))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NullVelocityReport {
    pub f: f64,
    pub r: f64,
    pub c: f64,
    pub b: f64,
    pub v_plus: f64,
    pub v_minus: f64,
    pub notes: Vec<String>,
}

/// [`null_velocity`] with annotations. At `f = 0`, `r = 2bc` the null speed
/// is `√5·c`; a note records that `±2c` is not null there.
pub fn null_velocity_report(f_mag: f64, r: f64, c: f64, b: f64) -> Result<NullVelocityReport> {
    let (v_plus, v_minus) = null_velocity(f_mag, r, c, b)?;
    let mut notes = Vec::new();
    if f_mag == 0.0 && (r.abs() - 2.0 * b * c).abs() <= 1e-12 * b * c {
        let off = null_surface_residual(&KinematicState::scalar(2.0 * c, 0.0, r), c, b);
        notes.push(format!(
            "f = 0, r = 2bc: null speed is sqrt(5)*c; v = 2c is not null here (residual {off})"
        ));
    }
    Ok(NullVelocityReport {
        f: f_mag,
        r,
        c,
        b,
        v_plus,
        v_minus,
        notes,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NullConePoint {
    pub angle: f64,
    pub v: f64,
    pub f: f64,
    pub residual: f64,
}

/// `count` points on the ellipse `v²/c² + f²/b² = 1 + r²/(c²b²)` at angles
/// `2πk/count`. Quarter-turn angles use exact cosines and sines so the axis
/// endpoints come out exact.
pub fn null_cone_sample(r: f64, c: f64, b: f64, count: usize) -> Result<Vec<NullConePoint>> {
    positive("c", c)?;
    positive("b", b)?;
    if count == 0 {
        return Err(Error::InvalidParameter {
            name: "count",
            reason: "must be at least 1".into(),
        });
    }
    let scale = (1.0 + r * r / (c * c * b * b)).sqrt();
    let (va, fa) = (c * scale, b * scale);
    Ok((0..count)
        .map(|k| {
            let angle = std::f64::consts::TAU * k as f64 / count as f64;
            let (sin, cos) = unit_circle(k, count);
            let (v, f) = (va * cos, fa * sin);
            let residual = null_surface_residual(&KinematicState::scalar(v, f, r), c, b);
            NullConePoint { angle, v, f, residual }
        })
        .collect())
}

fn unit_circle(k: usize, count: usize) -> (f64, f64) {
    if (4 * k).is_multiple_of(count) {
        match (4 * k / count) % 4 {
            0 => (0.0, 1.0),
            1 => (1.0, 0.0),
            2 => (0.0, -1.0),
            _ => (-1.0, 0.0),
        }
    } else {
        (std::f64::consts::TAU * k as f64 / count as f64).sin_cos()
    }
}
