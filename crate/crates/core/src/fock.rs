//! Truncated Fock-space linear algebra.
//!
//! Motional operators are dense `dim × dim` complex matrices on Fock levels
//! `0..dim`. Joint operators act on (two-level) ⊗ (Fock) in internal-major
//! order. Every exponential is taken through a Hermitian eigendecomposition so
//! the truncated propagators stay unitary to rounding error; truncation error
//! is pushed into state support and policed by [`check_truncation`].

// inherent float methods are only visible when std is linked somewhere
#[cfg(not(test))]
#[allow(unused_imports)]
use num_traits::Float;

use alloc::format;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Dense operator on the truncated motional space.
pub type MotionalOp = DMatrix<C64>;

/// Max-norm tolerance for operators flagged unitary.
pub const UNITARITY_TOL: f64 = 1e-10;
/// Max-norm tolerance for accepting a generator as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Tolerance on the squared norm of states that claim to be normalized.
pub const NORM_TOL: f64 = 1e-8;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

/// Truncation of the motional Hilbert space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SpaceConfig {
    dim: usize,
    interior_margin: usize,
}

impl SpaceConfig {
    pub fn new(dim: usize, interior_margin: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::Config(format!("dim must be at least 2, got {dim}")));
        }
        if interior_margin >= dim {
            return Err(Error::Config(format!(
                "interior margin {interior_margin} must be smaller than dim {dim}"
            )));
        }
        Ok(Self {
            dim,
            interior_margin,
        })
    }

    /// Margin `max(8, dim/8)`, clamped below `dim`.
    pub fn with_default_margin(dim: usize) -> Result<Self> {
        Self::new(dim, default_margin(dim))
    }

    /// Margin wide enough for identities involving the displacement
    /// `e^{iξ(a+a†)}`, see [`edge_aware_margin`].
    pub fn with_edge_aware_margin(dim: usize, xi: f64) -> Result<Self> {
        Self::new(dim, edge_aware_margin(dim, xi))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn interior_margin(&self) -> usize {
        self.interior_margin
    }

    pub fn joint_dim(&self) -> usize {
        2 * self.dim
    }

    /// Number of Fock levels kept by the interior projector.
    pub fn interior_levels(&self) -> usize {
        self.dim - self.interior_margin
    }

    /// Same dimension, different margin.
    pub fn with_margin(self, interior_margin: usize) -> Result<Self> {
        Self::new(self.dim, interior_margin)
    }
}

pub fn default_margin(dim: usize) -> usize {
    8.max(dim / 8).min(dim.saturating_sub(1))
}

/// Interior margin for operator identities that conjugate by a displacement
/// of size `xi`.
///
/// A displacement by `ξ` couples Fock level `n` to levels roughly
/// `2ξ√n` away, so rows within that distance of the truncation edge see the
/// missing levels. The margin is `max(default_margin, ⌈2ξ√dim⌉ + 16)`,
/// clamped below `dim`.
pub fn edge_aware_margin(dim: usize, xi: f64) -> usize {
    let spread = (2.0 * xi.abs() * (dim as f64).sqrt()).ceil() as usize + 16;
    default_margin(dim).max(spread).min(dim.saturating_sub(1))
}

/// Smallest truncation that holds a coherent state of amplitude `|alpha|`:
/// `|α|² + 8·√(|α|²+1) + 10`, rounded up.
pub fn required_dim(amplitude: f64) -> usize {
    let n = amplitude * amplitude;
    (n + 8.0 * (n + 1.0).sqrt() + 10.0).ceil() as usize
}

/// Fails with [`Error::Truncation`] if `cfg` cannot hold amplitude `amplitude`.
pub fn check_truncation(cfg: &SpaceConfig, amplitude: f64) -> Result<()> {
    let required = required_dim(amplitude);
    if cfg.dim < required {
        return Err(Error::Truncation {
            dim: cfg.dim,
            required,
            amplitude: amplitude.abs(),
        });
    }
    Ok(())
}

/// `ln(n!)` for `n = 0..len`, accumulated as a running sum of logarithms.
pub fn ln_factorials(len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut acc = 0.0;
    for n in 0..len {
        if n > 1 {
            acc += (n as f64).ln();
        }
        out.push(acc);
    }
    out
}

// ---------------------------------------------------------------------------
// States
// ---------------------------------------------------------------------------

/// Read access shared by motional and joint kets.
pub trait Ket {
    fn amplitudes(&self) -> &DVector<C64>;

    fn norm_sqr(&self) -> f64 {
        self.amplitudes().iter().map(|c| c.norm_sqr()).sum()
    }
}

/// Amplitudes on the truncated Fock space.
///
/// `normalized` records whether the state is meant to be a unit vector; the
/// unnormalized cat components of the protocol carry `false`.
#[derive(Debug, Clone, PartialEq)]
pub struct MotionalState {
    amplitudes: DVector<C64>,
    normalized: bool,
}

impl Ket for MotionalState {
    fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }
}

impl MotionalState {
    /// Wraps raw amplitudes, flagged unnormalized.
    pub fn unnormalized(amplitudes: DVector<C64>) -> Self {
        Self {
            amplitudes,
            normalized: false,
        }
    }

    /// Wraps amplitudes that must already be a unit vector.
    pub fn normalized(amplitudes: DVector<C64>) -> Result<Self> {
        let state = Self {
            amplitudes,
            normalized: true,
        };
        let n = state.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr: n });
        }
        Ok(state)
    }

    pub fn fock(n: usize, cfg: &SpaceConfig) -> Result<Self> {
        if n >= cfg.dim {
            return Err(Error::Shape {
                expected: cfg.dim,
                found: n + 1,
            });
        }
        let mut amplitudes = DVector::from_element(cfg.dim, ZERO);
        amplitudes[n] = ONE;
        Ok(Self {
            amplitudes,
            normalized: true,
        })
    }

    pub fn vacuum(cfg: &SpaceConfig) -> Self {
        Self::fock(0, cfg).expect("dim >= 2")
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amplitudes
    }

    /// Unit-norm copy; errors on the zero vector.
    pub fn to_normalized(&self) -> Result<Self> {
        let n = self.norm_sqr();
        if n <= f64::MIN_POSITIVE {
            return Err(Error::NotNormalized { norm_sqr: n });
        }
        Ok(Self {
            amplitudes: self.amplitudes.unscale(n.sqrt()),
            normalized: true,
        })
    }

    /// Removes the global phase so that the first significant amplitude is
    /// real and positive. Amplitudes below `1e-10` of the largest one count as
    /// zero.
    pub fn gauge_fixed(&self) -> Self {
        let max = self.amplitudes.iter().map(|c| c.norm()).fold(0.0, f64::max);
        let pivot = self
            .amplitudes
            .iter()
            .find(|c| c.norm() > 1e-10 * max)
            .copied();
        let amplitudes = match pivot {
            Some(p) => {
                let phase = p.conj() / p.norm();
                self.amplitudes.map(|c| c * phase)
            }
            None => self.amplitudes.clone(),
        };
        Self {
            amplitudes,
            normalized: self.normalized,
        }
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.map(|c| c * factor),
            normalized: self.normalized && (factor.norm() - 1.0).abs() < 1e-14,
        }
    }

    /// `self + factor·other`, flagged unnormalized.
    pub fn add_scaled(&self, factor: C64, other: &Self) -> Result<Self> {
        check_same_len(self.dim(), other.dim())?;
        Ok(Self::unnormalized(
            &self.amplitudes + other.amplitudes.map(|c| c * factor),
        ))
    }

    /// Embeds into a larger truncation by appending zero amplitudes.
    pub fn padded(&self, dim: usize) -> Result<Self> {
        if dim < self.dim() {
            return Err(Error::Shape {
                expected: self.dim(),
                found: dim,
            });
        }
        let mut amplitudes = DVector::from_element(dim, ZERO);
        amplitudes.rows_mut(0, self.dim()).copy_from(&self.amplitudes);
        Ok(Self {
            amplitudes,
            normalized: self.normalized,
        })
    }

    /// Applies a motional operator, keeping the normalization flag.
    pub fn apply(&self, op: &MotionalOp) -> Result<Self> {
        check_square(op, self.dim())?;
        Ok(Self {
            amplitudes: op * &self.amplitudes,
            normalized: self.normalized,
        })
    }
}

/// Internal (electronic) basis state of the two-level ion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Internal {
    Excited,
    Ground,
}

/// Amplitudes on (two-level) ⊗ (truncated Fock), `|e⟩` block first.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    amplitudes: DVector<C64>,
    dim: usize,
}

impl Ket for JointState {
    fn amplitudes(&self) -> &DVector<C64> {
        &self.amplitudes
    }
}

impl JointState {
    pub fn from_amplitudes(amplitudes: DVector<C64>) -> Result<Self> {
        if amplitudes.len() < 4 || !amplitudes.len().is_multiple_of(2) {
            return Err(Error::Config(format!(
                "joint amplitude vector must have even length >= 4, got {}",
                amplitudes.len()
            )));
        }
        let dim = amplitudes.len() / 2;
        Ok(Self { amplitudes, dim })
    }

    /// `|e⟩⊗excited + |g⟩⊗ground`.
    pub fn from_branches(excited: &MotionalState, ground: &MotionalState) -> Result<Self> {
        check_same_len(excited.dim(), ground.dim())?;
        let dim = excited.dim();
        let mut amplitudes = DVector::from_element(2 * dim, ZERO);
        amplitudes.rows_mut(0, dim).copy_from(excited.amplitudes());
        amplitudes.rows_mut(dim, dim).copy_from(ground.amplitudes());
        Ok(Self { amplitudes, dim })
    }

    /// `|internal⟩ ⊗ motion`.
    pub fn product(internal: Internal, motion: &MotionalState) -> Self {
        let zero = MotionalState::unnormalized(DVector::from_element(motion.dim(), ZERO));
        let (e, g) = match internal {
            Internal::Excited => (motion, &zero),
            Internal::Ground => (&zero, motion),
        };
        Self::from_branches(e, g).expect("equal lengths")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Unnormalized motional state carried by one internal level.
    pub fn branch(&self, internal: Internal) -> MotionalState {
        let start = match internal {
            Internal::Excited => 0,
            Internal::Ground => self.dim,
        };
        MotionalState::unnormalized(self.amplitudes.rows(start, self.dim).into_owned())
    }

    pub fn inner(&self, other: &Self) -> Result<C64> {
        inner(&self.amplitudes, &other.amplitudes)
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            amplitudes: self.amplitudes.map(|c| c * factor),
            dim: self.dim,
        }
    }
}

fn inner(a: &DVector<C64>, b: &DVector<C64>) -> Result<C64> {
    check_same_len(a.len(), b.len())?;
    Ok(a.dotc(b))
}

fn check_same_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(Error::Shape { expected, found });
    }
    Ok(())
}

fn check_square(m: &DMatrix<C64>, dim: usize) -> Result<()> {
    check_same_len(dim, m.nrows())?;
    check_same_len(dim, m.ncols())
}

/// `|⟨a|b⟩|²` for two normalized kets of the same kind and dimension.
pub fn fidelity<K: Ket>(a: &K, b: &K) -> Result<f64> {
    for k in [a, b] {
        let n = k.norm_sqr();
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized { norm_sqr: n });
        }
    }
    Ok(inner(a.amplitudes(), b.amplitudes())?.norm_sqr())
}

// ---------------------------------------------------------------------------
// Operators
// ---------------------------------------------------------------------------

/// Annihilation and creation operators `(a, a†)`.
///
/// `a[n-1, n] = √n`; `a†` is the exact conjugate transpose.
pub fn ladder_operators(cfg: &SpaceConfig) -> (MotionalOp, MotionalOp) {
    let d = cfg.dim;
    let mut lower = DMatrix::from_element(d, d, ZERO);
    for n in 1..d {
        lower[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let raise = lower.adjoint();
    (lower, raise)
}

/// `a†a`, diagonal with entries `0..dim`.
pub fn number_operator(cfg: &SpaceConfig) -> MotionalOp {
    DMatrix::from_fn(cfg.dim, cfg.dim, |i, j| {
        if i == j {
            C64::new(i as f64, 0.0)
        } else {
            ZERO
        }
    })
}

/// `a + a†`.
pub fn position_generator(cfg: &SpaceConfig) -> MotionalOp {
    let (a, ad) = ladder_operators(cfg);
    a + ad
}

/// `i(a − a†)`, the Hermitian generator with `e^{-iθ·i(a−a†)} = e^{-θ(a†−a)}`.
pub fn momentum_generator(cfg: &SpaceConfig) -> MotionalOp {
    let (a, ad) = ladder_operators(cfg);
    (a - ad) * C64::new(0.0, 1.0)
}

pub fn identity(cfg: &SpaceConfig) -> MotionalOp {
    DMatrix::identity(cfg.dim, cfg.dim)
}

/// Diagonal 0/1 matrix keeping Fock levels `0..dim-margin`.
pub fn interior_projector(cfg: &SpaceConfig) -> MotionalOp {
    let keep = cfg.interior_levels();
    DMatrix::from_fn(cfg.dim, cfg.dim, |i, j| {
        if i == j && i < keep {
            ONE
        } else {
            ZERO
        }
    })
}

/// Largest entry magnitude of `m`.
pub fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn max_abs_vec(v: &DVector<C64>) -> f64 {
    v.iter().map(|c| c.norm()).fold(0.0, f64::max)
}

pub fn hermiticity_defect(m: &DMatrix<C64>) -> f64 {
    max_abs(&(m - m.adjoint()))
}

pub fn unitarity_defect(m: &DMatrix<C64>) -> f64 {
    let n = m.nrows();
    max_abs(&(m.adjoint() * m - DMatrix::<C64>::identity(n, n)))
}

/// Eigendecomposition of a Hermitian generator, reusable for many angles.
#[derive(Debug, Clone)]
pub struct HermitianSpectrum {
    eigenvalues: DVector<f64>,
    eigenvectors: DMatrix<C64>,
}

impl HermitianSpectrum {
    pub fn new(generator: &DMatrix<C64>) -> Result<Self> {
        if generator.nrows() != generator.ncols() {
            return Err(Error::Shape {
                expected: generator.nrows(),
                found: generator.ncols(),
            });
        }
        let defect = hermiticity_defect(generator);
        if defect.is_nan() || defect > HERMITICITY_TOL {
            return Err(Error::NotHermitian { defect });
        }
        let eig = SymmetricEigen::new(generator.clone());
        Ok(Self {
            eigenvalues: eig.eigenvalues,
            eigenvectors: eig.eigenvectors,
        })
    }

    pub fn eigenvalues(&self) -> &DVector<f64> {
        &self.eigenvalues
    }

    fn phases(&self, theta: f64) -> DVector<C64> {
        self.eigenvalues.map(|w| {
            let (s, c) = (-theta * w).sin_cos();
            C64::new(c, s)
        })
    }

    /// `exp(-iθG)`.
    pub fn unitary(&self, theta: f64) -> DMatrix<C64> {
        let phases = self.phases(theta);
        let mut scaled = self.eigenvectors.clone();
        for (j, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[j];
        }
        scaled * self.eigenvectors.adjoint()
    }

    /// `exp(-iθG)·v` without forming the matrix.
    pub fn apply(&self, theta: f64, v: &DVector<C64>) -> DVector<C64> {
        let phases = self.phases(theta);
        let mut coeffs = self.eigenvectors.ad_mul(v);
        coeffs.component_mul_assign(&phases);
        &self.eigenvectors * coeffs
    }
}

/// `exp(-iθG)` for Hermitian `G`, through its eigendecomposition.
pub fn unitary_from_generator(generator: &DMatrix<C64>, theta: f64) -> Result<DMatrix<C64>> {
    Ok(HermitianSpectrum::new(generator)?.unitary(theta))
}

/// Dense operator on the joint space, optionally flagged unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct JointOperator {
    matrix: DMatrix<C64>,
    dim: usize,
    unitary: bool,
}

impl JointOperator {
    pub fn new(matrix: DMatrix<C64>, unitary: bool) -> Result<Self> {
        let n = matrix.nrows();
        if n != matrix.ncols() || n < 4 || !n.is_multiple_of(2) {
            return Err(Error::Shape {
                expected: n,
                found: matrix.ncols(),
            });
        }
        Ok(Self {
            matrix,
            dim: n / 2,
            unitary,
        })
    }

    pub fn identity(cfg: &SpaceConfig) -> Self {
        Self {
            matrix: DMatrix::identity(cfg.joint_dim(), cfg.joint_dim()),
            dim: cfg.dim,
            unitary: true,
        }
    }

    /// `σ ⊗ m` for a 2×2 internal matrix `σ` (rows/cols ordered e, g).
    pub fn kron_internal(sigma: [[C64; 2]; 2], m: &MotionalOp) -> Result<Self> {
        let blk = |s: C64| m.map(|c| c * s);
        embed_blocks(
            &blk(sigma[0][0]),
            &blk(sigma[0][1]),
            &blk(sigma[1][0]),
            &blk(sigma[1][1]),
        )
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_flagged_unitary(&self) -> bool {
        self.unitary
    }

    pub fn with_unitary_flag(mut self, unitary: bool) -> Self {
        self.unitary = unitary;
        self
    }

    /// Motional block `(row, col)` with `Excited = 0`, `Ground = 1`.
    pub fn block(&self, row: Internal, col: Internal) -> MotionalOp {
        let off = |i: Internal| match i {
            Internal::Excited => 0,
            Internal::Ground => self.dim,
        };
        self.matrix
            .view((off(row), off(col)), (self.dim, self.dim))
            .into_owned()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            dim: self.dim,
            unitary: self.unitary,
        }
    }

    /// `self · rhs`; unitary if both factors are.
    pub fn compose(&self, rhs: &Self) -> Result<Self> {
        check_same_len(self.dim, rhs.dim)?;
        Ok(Self {
            matrix: &self.matrix * &rhs.matrix,
            dim: self.dim,
            unitary: self.unitary && rhs.unitary,
        })
    }

    pub fn scaled(&self, factor: C64) -> Self {
        Self {
            matrix: self.matrix.map(|c| c * factor),
            dim: self.dim,
            unitary: self.unitary && (factor.norm() - 1.0).abs() < 1e-14,
        }
    }

    pub fn apply(&self, state: &JointState) -> Result<JointState> {
        check_same_len(self.dim, state.dim())?;
        JointState::from_amplitudes(&self.matrix * state.amplitudes())
    }

    pub fn unitarity_defect(&self) -> f64 {
        unitarity_defect(&self.matrix)
    }

    pub fn hermiticity_defect(&self) -> f64 {
        hermiticity_defect(&self.matrix)
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        check_same_len(self.dim, other.dim)?;
        Ok(max_abs(&(&self.matrix - &other.matrix)))
    }

    /// `‖P(self − other)P‖_max` with `P = I₂ ⊗ interior_projector(cfg)`.
    pub fn interior_distance(&self, other: &Self, cfg: &SpaceConfig) -> Result<f64> {
        check_same_len(self.dim, other.dim)?;
        check_same_len(self.dim, cfg.dim)?;
        let keep = cfg.interior_levels();
        let inside = |k: usize| k % self.dim < keep;
        let mut worst: f64 = 0.0;
        for j in (0..2 * self.dim).filter(|&j| inside(j)) {
            for i in (0..2 * self.dim).filter(|&i| inside(i)) {
                worst = worst.max((self.matrix[(i, j)] - other.matrix[(i, j)]).norm());
            }
        }
        Ok(worst)
    }
}

/// 2×2 block composition `[[ee, eg], [ge, gg]]` in the `|e⟩, |g⟩` ordering.
pub fn embed_blocks(
    ee: &MotionalOp,
    eg: &MotionalOp,
    ge: &MotionalOp,
    gg: &MotionalOp,
) -> Result<JointOperator> {
    let d = ee.nrows();
    for b in [ee, eg, ge, gg] {
        check_square(b, d)?;
    }
    if d < 2 {
        return Err(Error::Config(format!("blocks must be at least 2x2, got {d}")));
    }
    let mut m = DMatrix::from_element(2 * d, 2 * d, ZERO);
    m.view_mut((0, 0), (d, d)).copy_from(ee);
    m.view_mut((0, d), (d, d)).copy_from(eg);
    m.view_mut((d, 0), (d, d)).copy_from(ge);
    m.view_mut((d, d), (d, d)).copy_from(gg);
    JointOperator::new(m, false)
}

/// `exp(-iθ σx⊗G) = [[cos θG, -i sin θG], [-i sin θG, cos θG]]`, assembled from
/// `U = exp(-iθG)` as `cos = (U+U†)/2`, `-i sin = (U−U†)/2`.
pub fn sigma_x_rotation(spectrum: &HermitianSpectrum, theta: f64) -> JointOperator {
    let u = spectrum.unitary(theta);
    let ud = u.adjoint();
    let half = C64::new(0.5, 0.0);
    let cos = (&u + &ud) * half;
    let msin = (&u - &ud) * half;
    embed_blocks(&cos, &msin, &msin, &cos)
        .expect("square blocks")
        .with_unitary_flag(true)
}

/// Coherent state `|α⟩` with `c_n = e^{-|α|²/2} αⁿ/√(n!)`, renormalized after
/// truncation.
pub fn coherent_state(alpha: C64, cfg: &SpaceConfig) -> Result<MotionalState> {
    check_truncation(cfg, alpha.norm())?;
    let d = cfg.dim;
    let r = alpha.norm();
    if r == 0.0 {
        return Ok(MotionalState::vacuum(cfg));
    }
    let ln_r = r.ln();
    let arg = alpha.arg();
    let lnf = ln_factorials(d);
    let amps = DVector::from_fn(d, |n, _| {
        let nf = n as f64;
        let mag = (-0.5 * r * r + nf * ln_r - 0.5 * lnf[n]).exp();
        C64::from_polar(mag, nf * arg)
    });
    MotionalState::unnormalized(amps).to_normalized()
}
