//! Mode-transfer matrices and the exchange products that decide which part
//! of the unknown state's density matrix a setup can observe.
//!
//! A transfer matrix U maps input mode operators to output mode operators.
//! Passive networks have singular values at most 1; U is unitary exactly
//! when the network is lossless. For every 2×2 unitary the exchange
//! products K[α][β] = U_{β1}·U_{α2}·U*_{β2}·U*_{α1} are real, which is why
//! a lossless two-port setup only ever exposes Re ρ; engineered loss can
//! push the coincidence products onto the imaginary axis and expose Im ρ.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::modes::{canonical_output_labels, ModeLabel, Polarization};
use crate::tol;

/// m×m complex matrix mapping input mode operators to output mode
/// operators, with mode labels on both sides. Only passive networks are
/// representable: singular values must not exceed 1 + [`tol::PASSIVITY_TOL`].
#[derive(Debug, Clone, PartialEq)]
pub struct TransferMatrix {
    entries: DMatrix<Complex64>,
    input_labels: Vec<ModeLabel>,
    output_labels: Vec<ModeLabel>,
}

impl TransferMatrix {
    /// Wrap a square matrix with explicit mode labels; validates the mode
    /// count (2 or 4), label lengths, and passivity.
    pub fn new(
        entries: DMatrix<Complex64>,
        input_labels: Vec<ModeLabel>,
        output_labels: Vec<ModeLabel>,
    ) -> Result<Self> {
        let m = entries.nrows();
        if entries.ncols() != m {
            return Err(Error::InvalidMatrix(format!(
                "matrix must be square, got {}x{}",
                m,
                entries.ncols()
            )));
        }
        if m != 2 && m != 4 {
            return Err(Error::InvalidMatrix(format!(
                "mode count must be 2 or 4, got {m}"
            )));
        }
        if input_labels.len() != m || output_labels.len() != m {
            return Err(Error::InvalidMatrix(format!(
                "expected {m} input and output labels"
            )));
        }
        // labels carry a polarization exactly when the matrix is four-mode
        for label in input_labels.iter().chain(&output_labels) {
            if label.polarization.is_some() != (m == 4) {
                return Err(Error::InvalidMatrix(format!(
                    "label '{label}' does not fit a {m}-mode matrix"
                )));
            }
        }
        let matrix = Self {
            entries,
            input_labels,
            output_labels,
        };
        let sigma = matrix.max_singular_value();
        if sigma > 1.0 + tol::PASSIVITY_TOL {
            return Err(Error::InvalidMatrix(format!(
                "max singular value {sigma} exceeds 1: passive networks only"
            )));
        }
        Ok(matrix)
    }

    /// Wrap a 2×2 or 4×4 matrix with canonical labels on both sides.
    pub fn with_canonical_labels(entries: DMatrix<Complex64>) -> Result<Self> {
        let labels = canonical_output_labels(entries.nrows())?;
        Self::new(entries, labels.clone(), labels)
    }

    pub fn mode_count(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry U_{out,in} (0-based mode indices).
    pub fn entry(&self, out: usize, inp: usize) -> Complex64 {
        self.entries[(out, inp)]
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn input_labels(&self) -> &[ModeLabel] {
        &self.input_labels
    }

    pub fn output_labels(&self) -> &[ModeLabel] {
        &self.output_labels
    }

    /// Max-norm of U·U† − I.
    pub fn unitarity_defect(&self) -> f64 {
        let m = self.mode_count();
        let product = &self.entries * self.entries.adjoint();
        let mut worst = 0.0f64;
        for i in 0..m {
            for j in 0..m {
                let expected = if i == j { Complex64::ONE } else { Complex64::ZERO };
                worst = worst.max((product[(i, j)] - expected).norm());
            }
        }
        worst
    }

    pub fn is_unitary(&self) -> bool {
        self.unitarity_defect() < tol::UNITARY_TOL
    }

    /// Largest singular value, computed from the top eigenvalue of U†·U.
    pub fn max_singular_value(&self) -> f64 {
        let gram = self.entries.adjoint() * &self.entries;
        gram.symmetric_eigen()
            .eigenvalues
            .iter()
            .fold(0.0f64, |acc, &v| acc.max(v.max(0.0)))
            .sqrt()
    }
}

/// The optical elements the toolkit knows how to build.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ElementKind {
    /// 50/50 splitter, (1/√2)·[[1, 1], [1, −1]].
    BalancedSplitter,
    /// Polarization rotation by θ: [[cos θ, sin θ], [−sin θ, cos θ]].
    Rotation(f64),
    /// Quarter-wave plate, diag(1, i).
    QuarterWave,
    /// Brewster window, diag(1, η) with damping 0 ≤ η ≤ 1 on the second
    /// mode. η = 1 is the lossless limit.
    Brewster(f64),
}

/// Build one optical element as a 2×2 transfer matrix.
pub fn optical_element(kind: ElementKind) -> Result<TransferMatrix> {
    match kind {
        ElementKind::BalancedSplitter => Ok(balanced_splitter()),
        ElementKind::Rotation(theta) => Ok(rotation(theta)),
        ElementKind::QuarterWave => Ok(quarter_wave()),
        ElementKind::Brewster(eta) => brewster(eta),
    }
}

pub fn balanced_splitter() -> TransferMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let entries = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(r, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(r, 0.0),
            Complex64::new(-r, 0.0),
        ],
    );
    TransferMatrix::with_canonical_labels(entries).expect("balanced splitter is passive")
}

pub fn rotation(theta: f64) -> TransferMatrix {
    let (sin, cos) = theta.sin_cos();
    let entries = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::new(cos, 0.0),
            Complex64::new(sin, 0.0),
            Complex64::new(-sin, 0.0),
            Complex64::new(cos, 0.0),
        ],
    );
    TransferMatrix::with_canonical_labels(entries).expect("rotations are passive")
}

pub fn quarter_wave() -> TransferMatrix {
    let entries = DMatrix::from_row_slice(
        2,
        2,
        &[Complex64::ONE, Complex64::ZERO, Complex64::ZERO, Complex64::I],
    );
    TransferMatrix::with_canonical_labels(entries).expect("wave plates are passive")
}

pub fn brewster(eta: f64) -> Result<TransferMatrix> {
    if !(0.0..=1.0).contains(&eta) {
        return Err(Error::InvalidMatrix(format!(
            "Brewster damping must satisfy 0 <= eta <= 1, got {eta}"
        )));
    }
    let entries = DMatrix::from_row_slice(
        2,
        2,
        &[
            Complex64::ONE,
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(eta, 0.0),
        ],
    );
    TransferMatrix::with_canonical_labels(entries)
}

/// Multiply a chain of elements in optical order: the first element of the
/// list acts first, so the result is `last · … · first`.
pub fn compose(elements: &[TransferMatrix]) -> Result<TransferMatrix> {
    let first = elements
        .first()
        .ok_or_else(|| Error::InvalidMatrix("cannot compose an empty chain".into()))?;
    let m = first.mode_count();
    let mut product = first.entries().clone();
    for element in &elements[1..] {
        if element.mode_count() != m {
            return Err(Error::InvalidMatrix(format!(
                "mode count mismatch in composition: {} vs {m}",
                element.mode_count()
            )));
        }
        product = element.entries() * product;
    }
    TransferMatrix::new(
        product,
        first.input_labels().to_vec(),
        elements.last().unwrap().output_labels().to_vec(),
    )
}

/// The engineered-loss composite
/// U = rotation(π/4) · brewster(η) · quarter_wave · rotation(−π/4).
///
/// Unitary only at η = 1. At η = √2 − 1 the coincidence exchange products
/// are purely imaginary and the setup reads out Im ρ alongside Re ρ.
pub fn lossy_tomography_matrix(eta: f64) -> Result<TransferMatrix> {
    let quarter_pi = std::f64::consts::FRAC_PI_4;
    compose(&[
        rotation(-quarter_pi),
        quarter_wave(),
        brewster(eta)?,
        rotation(quarter_pi),
    ])
}

/// Damping at which [`lossy_tomography_matrix`] gains imaginary-part
/// access: η = √2 − 1.
pub fn imaginary_access_eta() -> f64 {
    std::f64::consts::SQRT_2 - 1.0
}

/// The 4×4 splitter acting on (1h, 1v, 2h, 2v) in both bases.
pub fn polarization_beam_splitter() -> TransferMatrix {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let o = Complex64::ZERO;
    let entries = DMatrix::from_row_slice(
        4,
        4,
        &[
            r, o, r, o, //
            o, r, o, r, //
            r, o, -r, o, //
            o, r, o, -r,
        ],
    );
    let labels = canonical_output_labels(4).unwrap();
    TransferMatrix::new(entries, labels.clone(), labels).expect("splitter is passive")
}

/// Basis change from circular (port 1) and diagonal (port 2) input modes to
/// the horizontal/vertical basis.
pub fn polarization_basis_change() -> TransferMatrix {
    let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    let ir = Complex64::new(0.0, std::f64::consts::FRAC_1_SQRT_2);
    let o = Complex64::ZERO;
    let entries = DMatrix::from_row_slice(
        4,
        4,
        &[
            r, r, o, o, //
            -ir, ir, o, o, //
            o, o, r, r, //
            o, o, r, -r,
        ],
    );
    TransferMatrix::new(
        entries,
        polarized_input_labels(),
        canonical_output_labels(4).unwrap(),
    )
    .expect("basis change is unitary")
}

fn polarized_input_labels() -> Vec<ModeLabel> {
    vec![
        ModeLabel::polarized(1, Polarization::RightCircular),
        ModeLabel::polarized(1, Polarization::LeftCircular),
        ModeLabel::polarized(2, Polarization::Diagonal),
        ModeLabel::polarized(2, Polarization::AntiDiagonal),
    ]
}

/// The four-mode polarization network U_c = U_BS · U_Basis,
///
/// ```text
/// U_c = (1/2) · | 1  1  1  1 |
///               |-i  i  1 -1 |
///               | 1  1 -1 -1 |
///               |-i  i -1  1 |
/// ```
///
/// with inputs (1r, 1l, 2d, 2a) and outputs (1h, 1v, 2h, 2v).
pub fn polarization_network() -> TransferMatrix {
    let h = Complex64::new(0.5, 0.0);
    let ih = Complex64::new(0.0, 0.5);
    let entries = DMatrix::from_row_slice(
        4,
        4,
        &[
            h, h, h, h, //
            -ih, ih, h, -h, //
            h, h, -h, -h, //
            -ih, ih, -h, h,
        ],
    );
    TransferMatrix::new(
        entries,
        polarized_input_labels(),
        canonical_output_labels(4).unwrap(),
    )
    .expect("the polarization network is unitary")
}

/// Haar-random m×m unitary: QR decomposition of a seeded standard complex
/// Gaussian matrix with the R diagonal phases folded into Q.
pub fn haar_random_unitary(m: usize, seed: u64) -> Result<TransferMatrix> {
    let labels = canonical_output_labels(m)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let g = DMatrix::from_fn(m, m, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    let qr = g.qr();
    let q = qr.q();
    let r = qr.r();
    let mut u = q;
    for j in 0..m {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 { d / d.norm() } else { Complex64::ONE };
        for i in 0..m {
            u[(i, j)] *= phase;
        }
    }
    TransferMatrix::new(u, labels.clone(), labels)
}

/// The four products K[α][β] = U_{β1}·U_{α2}·U*_{β2}·U*_{α1} of a two-port
/// matrix, indexed by 1-based ports. The diagonal entries equal
/// |U_{α1}|²·|U_{α2}|² and are computed in that form, so they are real and
/// non-negative exactly.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExchangeProducts {
    k: [[Complex64; 2]; 2],
}

impl ExchangeProducts {
    /// K[α][β] for 1-based ports.
    pub fn at(&self, alpha: usize, beta: usize) -> Complex64 {
        assert!(
            (1..=2).contains(&alpha) && (1..=2).contains(&beta),
            "ports are 1-based"
        );
        self.k[alpha - 1][beta - 1]
    }

    pub fn entries(&self) -> &[[Complex64; 2]; 2] {
        &self.k
    }

    /// Largest |Im K| over all four products.
    pub fn max_imag(&self) -> f64 {
        self.k
            .iter()
            .flatten()
            .fold(0.0f64, |acc, z| acc.max(z.im.abs()))
    }
}

/// Compute the exchange products of a 2×2 transfer matrix.
pub fn exchange_products(u: &TransferMatrix) -> Result<ExchangeProducts> {
    if u.mode_count() != 2 {
        return Err(Error::InvalidMatrix(format!(
            "exchange products are defined for two-port matrices, got m={}",
            u.mode_count()
        )));
    }
    let e = |i, j| u.entry(i, j);
    let mut k = [[Complex64::ZERO; 2]; 2];
    for (a, row) in k.iter_mut().enumerate() {
        for (b, entry) in row.iter_mut().enumerate() {
            *entry = if a == b {
                Complex64::new(e(a, 0).norm_sqr() * e(a, 1).norm_sqr(), 0.0)
            } else {
                e(b, 0) * e(a, 1) * e(b, 1).conj() * e(a, 0).conj()
            };
        }
    }
    Ok(ExchangeProducts { k })
}

/// Which part of ρ's off-diagonal a two-port setup exposes.
///
/// The diagonal products K[α][α] are identically real, so purely imaginary
/// products can only occur for coincidence outcomes (α ≠ β); the
/// classification checks exactly those two entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseCondition {
    /// All four products real: probabilities depend on Re ρ only.
    RealAccess,
    /// Both coincidence products purely imaginary: coincidence outcomes
    /// read out Im ρ.
    ImaginaryCoincidenceAccess,
    /// Anything else.
    Mixed,
}

impl std::fmt::Display for PhaseCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            PhaseCondition::RealAccess => "RealAccess",
            PhaseCondition::ImaginaryCoincidenceAccess => "ImaginaryCoincidenceAccess",
            PhaseCondition::Mixed => "Mixed",
        };
        write!(f, "{name}")
    }
}

/// Classify the exchange products of a two-port matrix at tolerance `tol`.
pub fn classify_phase_condition(u: &TransferMatrix, tol: f64) -> Result<PhaseCondition> {
    let k = exchange_products(u)?;
    if k.max_imag() < tol {
        return Ok(PhaseCondition::RealAccess);
    }
    let k12 = k.at(1, 2);
    let k21 = k.at(2, 1);
    if k12.re.abs() < tol
        && k21.re.abs() < tol
        && k12.im.abs().min(k21.im.abs()) > tol
    {
        return Ok(PhaseCondition::ImaginaryCoincidenceAccess);
    }
    Ok(PhaseCondition::Mixed)
}
