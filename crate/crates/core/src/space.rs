//! Truncated Hilbert space of one cavity mode and two two-level emitters.
//!
//! The matter part is stored in the Dicke basis (triplet `T₋₁, T₀, T₁` and
//! singlet `S`). States are ordered manifold-major: all states with total
//! excitation 0, then 1, and so on; inside a manifold the photon number
//! decreases, so a full manifold reads `|n,T₋₁⟩, |n−1,T₀⟩, |n−1,S⟩, |n−2,T₁⟩`.
//!
//! The dissipative dynamics never raises the excitation number, so a basis
//! whose `photon_cutoff` is at least the largest excitation number present
//! in the initial state evolves exactly; there is no truncation error to
//! tune.

use std::fmt;
use std::ops::Range;

use nalgebra::{DMatrix, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum DickeLabel {
    /// |G⟩|G⟩
    #[serde(rename = "T-1")]
    TMinus,
    /// (|X⟩|G⟩ + |G⟩|X⟩)/√2
    #[serde(rename = "T0")]
    TZero,
    /// (|X⟩|G⟩ − |G⟩|X⟩)/√2
    #[serde(rename = "S")]
    Singlet,
    /// |X⟩|X⟩
    #[serde(rename = "T1")]
    TPlus,
}

impl DickeLabel {
    pub const ALL: [DickeLabel; 4] = [
        DickeLabel::TMinus,
        DickeLabel::TZero,
        DickeLabel::Singlet,
        DickeLabel::TPlus,
    ];

    pub fn excitations(self) -> usize {
        match self {
            DickeLabel::TMinus => 0,
            DickeLabel::TZero | DickeLabel::Singlet => 1,
            DickeLabel::TPlus => 2,
        }
    }

    pub fn is_triplet(self) -> bool {
        self != DickeLabel::Singlet
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for DickeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            DickeLabel::TMinus => "T-1",
            DickeLabel::TZero => "T0",
            DickeLabel::Singlet => "S",
            DickeLabel::TPlus => "T1",
        };
        f.write_str(s)
    }
}

/// A bare product state `|photons⟩ ⊗ |matter⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BasisState {
    pub photons: usize,
    pub matter: DickeLabel,
}

impl BasisState {
    pub fn new(photons: usize, matter: DickeLabel) -> Self {
        Self { photons, matter }
    }

    pub fn excitation(&self) -> usize {
        self.photons + self.matter.excitations()
    }
}

impl fmt::Display for BasisState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{},{}⟩", self.photons, self.matter)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedBasis {
    photon_cutoff: usize,
    states: Vec<BasisState>,
    // manifold n occupies states[manifolds[n]]
    manifolds: Vec<Range<usize>>,
}

pub fn build_basis(photon_cutoff: usize) -> TruncatedBasis {
    let max_n = photon_cutoff + 2;
    let mut states = Vec::with_capacity(4 * (photon_cutoff + 1));
    let mut manifolds = Vec::with_capacity(max_n + 1);
    for n in 0..=max_n {
        let start = states.len();
        for photons in (0..=photon_cutoff.min(n)).rev() {
            for label in DickeLabel::ALL {
                if photons + label.excitations() == n {
                    states.push(BasisState::new(photons, label));
                }
            }
        }
        manifolds.push(start..states.len());
    }
    TruncatedBasis {
        photon_cutoff,
        states,
        manifolds,
    }
}

impl TruncatedBasis {
    pub fn photon_cutoff(&self) -> usize {
        self.photon_cutoff
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn states(&self) -> &[BasisState] {
        &self.states
    }

    /// Highest manifold index present (possibly truncated).
    pub fn max_manifold(&self) -> usize {
        self.manifolds.len() - 1
    }

    /// Index range of manifold `n` in the state list.
    pub fn manifold_range(&self, n: usize) -> Result<Range<usize>> {
        self.manifolds
            .get(n)
            .cloned()
            .ok_or(Error::ManifoldOutOfRange {
                n,
                max: self.max_manifold(),
            })
    }

    pub fn manifold(&self, n: usize) -> Result<&[BasisState]> {
        Ok(&self.states[self.manifold_range(n)?])
    }

    pub fn manifold_dim(&self, n: usize) -> usize {
        self.manifolds.get(n).map_or(0, |r| r.len())
    }

    /// Full (untruncated) dimension of manifold `n`.
    pub fn full_manifold_dim(n: usize) -> usize {
        match n {
            0 => 1,
            1 => 3,
            _ => 4,
        }
    }

    /// A manifold is complete when no state was dropped by the photon cutoff.
    pub fn is_complete(&self, n: usize) -> bool {
        n <= self.photon_cutoff
    }

    pub fn require_complete(&self, n: usize) -> Result<()> {
        if n > self.max_manifold() {
            return Err(Error::ManifoldOutOfRange {
                n,
                max: self.max_manifold(),
            });
        }
        if !self.is_complete(n) {
            return Err(Error::TruncatedManifold {
                n,
                cutoff: self.photon_cutoff,
            });
        }
        Ok(())
    }

    pub fn index_of(&self, state: BasisState) -> Option<usize> {
        let range = self.manifolds.get(state.excitation())?.clone();
        range.into_iter().find(|&i| self.states[i] == state)
    }

    /// Manifold index of every basis state, in basis order.
    pub fn excitations(&self) -> Vec<usize> {
        self.states.iter().map(BasisState::excitation).collect()
    }

    /// Computational basis vector for `state`.
    pub fn ket(&self, state: BasisState) -> Option<nalgebra::DVector<Complex64>> {
        let i = self.index_of(state)?;
        let mut v = nalgebra::DVector::zeros(self.dim());
        v[i] = Complex64::new(1.0, 0.0);
        Some(v)
    }

    /// `|state⟩⟨state|`
    pub fn projector_onto(&self, state: BasisState) -> Option<CMatrix> {
        let i = self.index_of(state)?;
        let mut m = CMatrix::zeros(self.dim(), self.dim());
        m[(i, i)] = Complex64::new(1.0, 0.0);
        Some(m)
    }
}

/// Product → Dicke change of basis on the matter space.
///
/// Rows are Dicke labels in [`DickeLabel::ALL`] order; columns are product
/// states ordered `GG, XG, GX, XX` (first letter = emitter 1). Real
/// orthogonal, so its transpose is the inverse.
pub fn dicke_transform() -> Matrix4<f64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    Matrix4::new(
        1.0, 0.0, 0.0, 0.0, //
        0.0, r, r, 0.0, //
        0.0, r, -r, 0.0, //
        0.0, 0.0, 0.0, 1.0,
    )
}

/// Lowering operators of emitter 1 and 2 in the Dicke basis.
fn matter_lowering() -> (Matrix4<f64>, Matrix4<f64>) {
    // product basis: GG=0, XG=1, GX=2, XX=3
    let mut s1 = Matrix4::zeros();
    s1[(0, 1)] = 1.0; // XG -> GG
    s1[(2, 3)] = 1.0; // XX -> GX
    let mut s2 = Matrix4::zeros();
    s2[(0, 2)] = 1.0; // GX -> GG
    s2[(1, 3)] = 1.0; // XX -> XG
    let u = dicke_transform();
    (u * s1 * u.transpose(), u * s2 * u.transpose())
}

#[derive(Debug, Clone)]
pub struct BareOperators {
    pub a: CMatrix,
    pub sigma1: CMatrix,
    pub sigma2: CMatrix,
    /// a†a + σ₁†σ₁ + σ₂†σ₂
    pub number: CMatrix,
}

impl BareOperators {
    pub fn photon_number(&self) -> CMatrix {
        self.a.adjoint() * &self.a
    }
}

pub fn bare_operators(basis: &TruncatedBasis) -> BareOperators {
    let d = basis.dim();
    let mut a = CMatrix::zeros(d, d);
    let mut sigma1 = CMatrix::zeros(d, d);
    let mut sigma2 = CMatrix::zeros(d, d);
    let mut number = CMatrix::zeros(d, d);
    let (m1, m2) = matter_lowering();

    for (col, s) in basis.states().iter().enumerate() {
        number[(col, col)] = Complex64::from(s.excitation() as f64);
        if s.photons > 0 {
            let lowered = BasisState::new(s.photons - 1, s.matter);
            if let Some(row) = basis.index_of(lowered) {
                a[(row, col)] = Complex64::from((s.photons as f64).sqrt());
            }
        }
        for label in DickeLabel::ALL {
            let target = BasisState::new(s.photons, label);
            if let Some(row) = basis.index_of(target) {
                sigma1[(row, col)] = Complex64::from(m1[(label.index(), s.matter.index())]);
                sigma2[(row, col)] = Complex64::from(m2[(label.index(), s.matter.index())]);
            }
        }
    }
    BareOperators {
        a,
        sigma1,
        sigma2,
        number,
    }
}

pub fn manifold_projector(basis: &TruncatedBasis, n: usize) -> Result<CMatrix> {
    let range = basis.manifold_range(n)?;
    let d = basis.dim();
    let mut p = DMatrix::zeros(d, d);
    for i in range {
        p[(i, i)] = Complex64::new(1.0, 0.0);
    }
    Ok(p)
}
