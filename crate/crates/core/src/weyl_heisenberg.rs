//! The Weyl-Heisenberg group H(n), its Lie algebra and its automorphisms,
//! all in the real (2n+2)×(2n+2) matrix realization.
//!
//! Group elements are `Υ(p, q, ι)`:
//!
//! ```text
//! | 1ₙ   0    0   q  |
//! | 0    1ₙ   0   p  |
//! | pᵗ  -qᵗ   1   2ι |
//! | 0    0    0   1  |
//! ```
//!
//! # Sign convention
//!
//! The generator matrices are the ground truth. With `P` and `Q` realized as
//! the differentials of `Υ` (a `P` direction moves the `q` column, a `Q`
//! direction moves the `p` column) the matrix commutator gives
//! `[Qᵢ, Pⱼ] = δᵢⱼ I`, hence `[Pᵢ, Qⱼ] = -δᵢⱼ I`. The group product
//! `ι'' = ι + ι' + ½(p'·q - q'·p)` agrees with this sign. The often-quoted
//! form `[Pᵢ, Qⱼ] = δᵢⱼ I` is the opposite ordering and is *not* what these
//! matrices satisfy; `tests::p_q_bracket_is_minus_identity` pins this down.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{same_dim, Error, Result};
use crate::linalg::{commutator, max_abs_diff, zeta};
use crate::rng::SweepRng;

/// Default max-norm residual accepted when reading coordinates back out of a matrix.
pub const DECOMPOSITION_TOL: f64 = 1e-9;

/// Default tolerance on `Aᵗ ζ A - ζ` when validating automorphisms.
pub const SYMPLECTIC_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergElement {
    p: Vec<f64>,
    q: Vec<f64>,
    iota: f64,
}

impl HeisenbergElement {
    pub fn new(p: Vec<f64>, q: Vec<f64>, iota: f64) -> Result<Self> {
        same_dim(p.len(), q.len())?;
        if p.is_empty() {
            return Err(Error::InvalidParameter {
                name: "n",
                reason: "dimension must be at least 1".into(),
            });
        }
        Ok(Self { p, q, iota })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            p: vec![0.0; n],
            q: vec![0.0; n],
            iota: 0.0,
        }
    }

    pub fn n(&self) -> usize {
        self.p.len()
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn iota(&self) -> f64 {
        self.iota
    }

    /// The (2n+2)×(2n+2) matrix `Υ(p, q, ι)`.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::identity(2 * n + 2, 2 * n + 2);
        let last = 2 * n + 1;
        for i in 0..n {
            m[(i, last)] = self.q[i];
            m[(n + i, last)] = self.p[i];
            m[(2 * n, i)] = self.p[i];
            m[(2 * n, n + i)] = -self.q[i];
        }
        m[(2 * n, last)] = 2.0 * self.iota;
        m
    }

    /// Reads `(p, q, ι)` back out of a group matrix, rejecting matrices that
    /// deviate from the `Υ` pattern by more than `tol` in max norm.
    pub fn from_matrix(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let (elem, residual) = Self::project(m)?;
        if residual > tol {
            return Err(Error::Decomposition { residual });
        }
        Ok(elem)
    }

    /// Coordinates read from the q-column, p-column and ι slot, together
    /// with the max-norm distance between `m` and the matrix they realize.
    pub fn project(m: &DMatrix<f64>) -> Result<(Self, f64)> {
        let n = pattern_dim(m)?;
        let last = 2 * n + 1;
        let q = (0..n).map(|i| m[(i, last)]).collect();
        let p = (0..n).map(|i| m[(n + i, last)]).collect();
        let elem = Self {
            p,
            q,
            iota: 0.5 * m[(2 * n, last)],
        };
        let residual = max_abs_diff(m, &elem.matrix());
        Ok((elem, residual))
    }

    /// Group product `self ∘ other`, equal to the product of the matrices.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        same_dim(self.n(), other.n())?;
        let shift = 0.5 * (dot(&self.p, &other.q) - dot(&self.q, &other.p));
        Ok(Self {
            p: add(&self.p, &other.p),
            q: add(&self.q, &other.q),
            iota: self.iota + other.iota + shift,
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            p: self.p.iter().map(|x| -x).collect(),
            q: self.q.iter().map(|x| -x).collect(),
            iota: -self.iota,
        }
    }

    /// The algebra element whose exponential is `self`. The algebra is
    /// two-step nilpotent and `Z² = 0` for a single element, so `exp(Z) = 1 + Z`.
    pub fn log(&self) -> HeisenbergAlgebraElement {
        HeisenbergAlgebraElement {
            p_coeff: self.q.clone(),
            q_coeff: self.p.clone(),
            iota_coeff: self.iota,
        }
    }
}

/// `Z = Σ aᵢ Pᵢ + Σ bᵢ Qᵢ + c I` stored by generator coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HeisenbergAlgebraElement {
    /// Coefficients of the `Pᵢ` generators.
    pub p_coeff: Vec<f64>,
    /// Coefficients of the `Qᵢ` generators.
    pub q_coeff: Vec<f64>,
    /// Coefficient of the central generator `I`.
    pub iota_coeff: f64,
}

impl HeisenbergAlgebraElement {
    pub fn new(p_coeff: Vec<f64>, q_coeff: Vec<f64>, iota_coeff: f64) -> Result<Self> {
        same_dim(p_coeff.len(), q_coeff.len())?;
        Ok(Self {
            p_coeff,
            q_coeff,
            iota_coeff,
        })
    }

    pub fn zero(n: usize) -> Self {
        Self {
            p_coeff: vec![0.0; n],
            q_coeff: vec![0.0; n],
            iota_coeff: 0.0,
        }
    }

    /// The generator `Pᵢ` (0-based `i`).
    pub fn generator_p(n: usize, i: usize) -> Self {
        let mut x = Self::zero(n);
        x.p_coeff[i] = 1.0;
        x
    }

    /// The generator `Qᵢ` (0-based `i`).
    pub fn generator_q(n: usize, i: usize) -> Self {
        let mut x = Self::zero(n);
        x.q_coeff[i] = 1.0;
        x
    }

    /// The central generator `I`.
    pub fn central(n: usize) -> Self {
        let mut x = Self::zero(n);
        x.iota_coeff = 1.0;
        x
    }

    pub fn n(&self) -> usize {
        self.p_coeff.len()
    }

    pub fn is_zero(&self) -> bool {
        self.iota_coeff == 0.0 && self.p_coeff.iter().all(|&x| x == 0.0) && self.q_coeff.iter().all(|&x| x == 0.0)
    }

    /// Nilpotent matrix realization; `Pᵢ` fills the q-column slot and
    /// `Qᵢ` the p-column slot of the group pattern.
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let last = 2 * n + 1;
        let mut m = DMatrix::zeros(2 * n + 2, 2 * n + 2);
        for i in 0..n {
            m[(i, last)] = self.p_coeff[i];
            m[(n + i, last)] = self.q_coeff[i];
            m[(2 * n, i)] = self.q_coeff[i];
            m[(2 * n, n + i)] = -self.p_coeff[i];
        }
        m[(2 * n, last)] = 2.0 * self.iota_coeff;
        m
    }

    pub fn from_matrix(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let (x, residual) = Self::project(m)?;
        if residual > tol {
            return Err(Error::Decomposition { residual });
        }
        Ok(x)
    }

    /// Reads coefficients from the column slots; the residual measures
    /// everything outside the algebra pattern.
    pub fn project(m: &DMatrix<f64>) -> Result<(Self, f64)> {
        let n = pattern_dim(m)?;
        let last = 2 * n + 1;
        let x = Self {
            p_coeff: (0..n).map(|i| m[(i, last)]).collect(),
            q_coeff: (0..n).map(|i| m[(n + i, last)]).collect(),
            iota_coeff: 0.5 * m[(2 * n, last)],
        };
        let residual = max_abs_diff(m, &x.matrix());
        Ok((x, residual))
    }

    pub fn exp(&self) -> HeisenbergElement {
        HeisenbergElement {
            p: self.q_coeff.clone(),
            q: self.p_coeff.clone(),
            iota: self.iota_coeff,
        }
    }

    /// Lie bracket computed as the matrix commutator `XY - YX` and read back.
    ///
    /// The result is central with
    /// `ι = x.q_coeff·y.p_coeff - x.p_coeff·y.q_coeff`, so `[Q, P] = I`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        same_dim(self.n(), other.n())?;
        let c = commutator(&self.matrix(), &other.matrix());
        Self::from_matrix(&c, DECOMPOSITION_TOL)
    }
}

/// `[[X,Y],Z] + [[Y,Z],X] + [[Z,X],Y]` in max norm, at the matrix level.
pub fn jacobi_residual(
    x: &HeisenbergAlgebraElement,
    y: &HeisenbergAlgebraElement,
    z: &HeisenbergAlgebraElement,
) -> f64 {
    let (x, y, z) = (x.matrix(), y.matrix(), z.matrix());
    let sum =
        commutator(&commutator(&x, &y), &z) + commutator(&commutator(&y, &z), &x) + commutator(&commutator(&z, &x), &y);
    crate::linalg::max_abs(&sum)
}

/// Number of independent central generators `M_{αβ} = -M_{βα}` that can
/// be added to an abelian algebra of dimension `m`.
pub fn central_extension_dimension(m: usize) -> usize {
    m * m.saturating_sub(1) / 2
}

/// Max-norm of `Aᵗ ζ A - ζ`.
pub fn symplectic_residual(a: &DMatrix<f64>) -> Result<f64> {
    let (rows, cols) = a.shape();
    if rows != cols || rows % 2 != 0 || rows == 0 {
        return Err(Error::BadShape { rows, cols });
    }
    let z = zeta(rows / 2);
    Ok(max_abs_diff(&(a.transpose() * &z * a), &z))
}

pub fn is_symplectic(a: &DMatrix<f64>, tol: f64) -> Result<bool> {
    Ok(symplectic_residual(a)? <= tol)
}

/// A random symplectic matrix built as a product of a lower shear, an upper
/// shear and a block-diagonal `diag(B, B⁻ᵗ)`; `scale` bounds the entries of
/// the shear and perturbation factors.
pub fn random_symplectic(rng: &mut SweepRng, n: usize, scale: f64) -> DMatrix<f64> {
    let sym = |rng: &mut SweepRng| {
        let raw = DMatrix::from_fn(n, n, |_, _| rng.uniform(-scale, scale));
        (&raw + raw.transpose()) * 0.5
    };
    let mut upper = DMatrix::identity(2 * n, 2 * n);
    upper.view_mut((0, n), (n, n)).copy_from(&sym(rng));
    let mut lower = DMatrix::identity(2 * n, 2 * n);
    lower.view_mut((n, 0), (n, n)).copy_from(&sym(rng));

    let b = DMatrix::identity(n, n) + DMatrix::from_fn(n, n, |_, _| rng.uniform(-scale, scale));
    let mut diag = DMatrix::identity(2 * n, 2 * n);
    if let Some(b_inv) = b.clone().try_inverse() {
        diag.view_mut((0, 0), (n, n)).copy_from(&b);
        diag.view_mut((n, n), (n, n)).copy_from(&b_inv.transpose());
    }
    upper * lower * diag
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sign {
    Plus,
    Minus,
}

impl Sign {
    pub fn value(self) -> f64 {
        match self {
            Sign::Plus => 1.0,
            Sign::Minus => -1.0,
        }
    }
}

/// An automorphism `U(A, z, ι, δ, ε)` of H(n): symplectic `A`, translation
/// `z = (q, p)`, central shift `ι`, dilation `δ ≠ 0` and discrete sign `ε`.
#[derive(Debug, Clone, PartialEq)]
pub struct AutomorphismElement {
    a: DMatrix<f64>,
    z: Vec<f64>,
    iota: f64,
    delta: f64,
    epsilon: Sign,
}

impl AutomorphismElement {
    pub fn new(a: DMatrix<f64>, z: Vec<f64>, iota: f64, delta: f64, epsilon: Sign) -> Result<Self> {
        Self::with_tolerance(a, z, iota, delta, epsilon, SYMPLECTIC_TOL)
    }

    pub fn with_tolerance(
        a: DMatrix<f64>,
        z: Vec<f64>,
        iota: f64,
        delta: f64,
        epsilon: Sign,
        tol: f64,
    ) -> Result<Self> {
        let residual = symplectic_residual(&a)?;
        same_dim(a.nrows(), z.len())?;
        if !(delta.is_finite() && delta != 0.0) {
            return Err(Error::InvalidParameter {
                name: "delta",
                reason: format!("must be finite and nonzero, got {delta}"),
            });
        }
        if residual > tol {
            return Err(Error::SymplecticViolation { residual });
        }
        Ok(Self {
            a,
            z,
            iota,
            delta,
            epsilon,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            a: DMatrix::identity(2 * n, 2 * n),
            z: vec![0.0; 2 * n],
            iota: 0.0,
            delta: 1.0,
            epsilon: Sign::Plus,
        }
    }

    /// Random element with `A` from [`random_symplectic`], `z` and `ι` in
    /// `[-1, 1]`, `δ` in `[0.5, 2]` and a random sign.
    pub fn random(rng: &mut SweepRng, n: usize) -> Self {
        let a = random_symplectic(rng, n, 0.5);
        let z = rng.vector(2 * n, -1.0, 1.0);
        let iota = rng.uniform(-1.0, 1.0);
        let delta = rng.uniform(0.5, 2.0);
        let epsilon = if rng.unit() < 0.5 { Sign::Plus } else { Sign::Minus };
        Self {
            a,
            z,
            iota,
            delta,
            epsilon,
        }
    }

    pub fn n(&self) -> usize {
        self.z.len() / 2
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn z(&self) -> &[f64] {
        &self.z
    }

    pub fn iota(&self) -> f64 {
        self.iota
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn epsilon(&self) -> Sign {
        self.epsilon
    }

    /// The (2n+2)×(2n+2) matrix
    ///
    /// ```text
    /// | δA              0      z |
    /// | (pᵗ, -qᵗ)A   δ²ε      ι |
    /// | 0               0      ε |
    /// ```
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.n();
        let dim = 2 * n + 2;
        let last = dim - 1;
        let eps = self.epsilon.value();
        let mut u = DMatrix::zeros(dim, dim);
        u.view_mut((0, 0), (2 * n, 2 * n)).copy_from(&(&self.a * self.delta));
        for i in 0..2 * n {
            u[(i, last)] = self.z[i];
        }
        // row vector (p, -q) with z = (q, p)
        let w = DMatrix::from_fn(1, 2 * n, |_, j| if j < n { self.z[n + j] } else { -self.z[j - n] });
        let wa = w * &self.a;
        for j in 0..2 * n {
            u[(2 * n, j)] = wa[(0, j)];
        }
        u[(2 * n, 2 * n)] = self.delta * self.delta * eps;
        u[(2 * n, last)] = self.iota;
        u[(last, last)] = eps;
        u
    }

    /// Reads an automorphism back out of its matrix. `δ` is normalized to be
    /// positive since `(δ, A)` and `(-δ, -A)` realize the same matrix.
    pub fn from_matrix(m: &DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = pattern_dim(m)?;
        let last = 2 * n + 1;
        let eps_raw = m[(last, last)];
        let epsilon = if (eps_raw - 1.0).abs() <= tol {
            Sign::Plus
        } else if (eps_raw + 1.0).abs() <= tol {
            Sign::Minus
        } else {
            return Err(Error::Decomposition {
                residual: (eps_raw.abs() - 1.0).abs(),
            });
        };
        let delta_sq = m[(2 * n, 2 * n)] * epsilon.value();
        if !(delta_sq > 0.0) {
            return Err(Error::Decomposition {
                residual: delta_sq.abs(),
            });
        }
        let delta = delta_sq.sqrt();
        let a = m.view((0, 0), (2 * n, 2 * n)).into_owned() / delta;
        let z = (0..2 * n).map(|i| m[(i, last)]).collect();
        let candidate = Self::with_tolerance(a, z, m[(2 * n, last)], delta, epsilon, tol)?;
        let residual = max_abs_diff(m, &candidate.matrix());
        if residual > tol {
            return Err(Error::Decomposition { residual });
        }
        Ok(candidate)
    }

    /// Matrix product `self · other`.
    ///
    /// The product is again an automorphism of H(n), but in general not one
    /// of the `U(A, z, ι, δ, ε)` block form: that form ties the bottom row to
    /// `z`, and the tie is not preserved by multiplication. Check the result
    /// with [`conjugation_preserves_commutators`].
    pub fn compose_matrix(&self, other: &Self) -> Result<DMatrix<f64>> {
        same_dim(self.n(), other.n())?;
        Ok(self.matrix() * other.matrix())
    }

    pub fn inverse_matrix(&self) -> Result<DMatrix<f64>> {
        self.matrix().try_inverse().ok_or(Error::Singular)
    }

    /// `U Υ(g) U⁻¹` read back as a group element.
    pub fn apply(&self, g: &HeisenbergElement) -> Result<HeisenbergElement> {
        self.apply_with_tolerance(g, DECOMPOSITION_TOL)
    }

    pub fn apply_with_tolerance(&self, g: &HeisenbergElement, tol: f64) -> Result<HeisenbergElement> {
        same_dim(self.n(), g.n())?;
        conjugate(&self.matrix(), g, tol).map(|(h, _)| h)
    }

    pub fn commutator_preserved(&self, tol: f64) -> bool {
        conjugation_preserves_commutators(&self.matrix(), tol)
    }
}

/// Conjugates `Υ(g)` by an arbitrary invertible matrix `u` and decomposes
/// the result, returning the element and the decomposition residual. A
/// residual above `tol` means `u` is not an automorphism.
pub fn conjugate(u: &DMatrix<f64>, g: &HeisenbergElement, tol: f64) -> Result<(HeisenbergElement, f64)> {
    same_dim(2 * g.n() + 2, u.nrows())?;
    let u_inv = u.clone().try_inverse().ok_or(Error::Singular)?;
    let image = u * g.matrix() * u_inv;
    let (h, residual) = HeisenbergElement::project(&image)?;
    if residual > tol {
        return Err(Error::NotAnAutomorphism { residual });
    }
    Ok((h, residual))
}

/// Checks that conjugation by `u` maps the Heisenberg algebra to itself with
/// its brackets intact.
///
/// Every generator `X_α` (all `Pᵢ`, `Qᵢ` and `I`) is conjugated and projected
/// onto the algebra pattern. The check passes when each projection is exact
/// within `tol` and, for every pair, `U [X_α, X_β] U⁻¹` equals the bracket of
/// the projected images within `tol`.
pub fn conjugation_preserves_commutators(u: &DMatrix<f64>, tol: f64) -> bool {
    let Ok(n) = pattern_dim(u) else {
        return false;
    };
    let Some(u_inv) = u.clone().try_inverse() else {
        return false;
    };
    let generators: Vec<DMatrix<f64>> = (0..n)
        .map(|i| HeisenbergAlgebraElement::generator_p(n, i))
        .chain((0..n).map(|i| HeisenbergAlgebraElement::generator_q(n, i)))
        .chain(std::iter::once(HeisenbergAlgebraElement::central(n)))
        .map(|x| x.matrix())
        .collect();

    let mut images = Vec::with_capacity(generators.len());
    for x in &generators {
        let conj = u * x * &u_inv;
        match HeisenbergAlgebraElement::project(&conj) {
            Ok((img, residual)) if residual <= tol => images.push(img.matrix()),
            _ => return false,
        }
    }
    for a in 0..generators.len() {
        for b in (a + 1)..generators.len() {
            let lhs = u * commutator(&generators[a], &generators[b]) * &u_inv;
            let rhs = commutator(&images[a], &images[b]);
            if max_abs_diff(&lhs, &rhs) > tol {
                return false;
            }
        }
    }
    true
}

fn pattern_dim(m: &DMatrix<f64>) -> Result<usize> {
    let (rows, cols) = m.shape();
    if rows != cols || rows < 4 || rows % 2 != 0 {
        return Err(Error::BadShape { rows, cols });
    }
    Ok((rows - 2) / 2)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}
