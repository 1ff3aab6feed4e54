//! Lindblad dynamics of the two-emitter cavity.
//!
//! `dρ/dt = i[ρ,H] + (γ_a/2)·L_a{ρ} + (γ_σ/2)·Σᵢ L_{σᵢ}{ρ}` with
//! `L_O{ρ} = 2OρO† − O†Oρ − ρO†O`.
//!
//! Two sign conventions meet here. The generator acting on `vec(ρ)` has
//! eigenvalues `μ` (averages evolve as `e^{μt}`); the regression and
//! population matrices follow `dx/dt = −i·L·x`, so their eigenvalues are
//! energies `λ = iμ` with `Re λ` a line position and `−Im λ` a half width.
//! [`rate_to_energy`] and [`energy_to_rate`] are the only places that
//! convert between the two.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::hamiltonian::build_hamiltonian;
use crate::linalg::{
    expm, hermiticity_defect, max_abs, min_hermitian_eigenvalue, CMatrix, CVector, I,
};
use crate::ode::{integrate, OdeOptions};
use crate::params::SystemParams;
use crate::space::{bare_operators, build_basis, BareOperators, BasisState, DickeLabel, TruncatedBasis};

/// Generator eigenvalue `μ` → energy `λ = iμ`.
pub fn rate_to_energy(mu: Complex64) -> Complex64 {
    I * mu
}

/// Energy `λ` → generator eigenvalue `μ = −iλ`.
pub fn energy_to_rate(lambda: Complex64) -> Complex64 {
    -I * lambda
}

pub const HERMITICITY_TOL: f64 = 1e-12;
pub const TRACE_TOL: f64 = 1e-10;
pub const POSITIVITY_TOL: f64 = 1e-8;

/// Weight below which a manifold counts as unoccupied.
const SUPPORT_TOL: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    pub matrix: CMatrix,
    pub time: f64,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix, time: f64) -> Self {
        Self { matrix, time }
    }

    /// `|state⟩⟨state|` at t = 0.
    pub fn pure_state(basis: &TruncatedBasis, state: BasisState) -> Result<Self> {
        let m = basis.projector_onto(state).ok_or_else(|| {
            Error::InvalidState(format!("{state} is not in the truncated basis"))
        })?;
        Ok(Self::new(m, 0.0))
    }

    /// `|ψ⟩⟨ψ|` from amplitudes in basis order; `ψ` must be normalised.
    pub fn from_amplitudes(amplitudes: &CVector) -> Result<Self> {
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidState(format!("amplitudes have norm {norm}")));
        }
        Ok(Self::new(amplitudes * amplitudes.adjoint(), 0.0))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        min_hermitian_eigenvalue(&self.matrix)
    }

    /// Checks Hermiticity, unit trace and positivity at the integrator tolerances.
    pub fn validate(&self) -> Result<()> {
        if !self.matrix.is_square() {
            return Err(Error::InvalidState("matrix is not square".into()));
        }
        let herm = hermiticity_defect(&self.matrix);
        if herm > HERMITICITY_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = self.min_eigenvalue();
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(())
    }

    /// Convex combination `w·self + (1−w)·other`.
    pub fn mix(&self, other: &Self, w: f64) -> Self {
        Self::new(
            &self.matrix * Complex64::from(w) + &other.matrix * Complex64::from(1.0 - w),
            self.time,
        )
    }
}

fn check_shape(expected: usize, m: &CMatrix) -> Result<()> {
    if m.nrows() != expected || m.ncols() != expected {
        return Err(Error::ShapeMismatch {
            expected,
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    Ok(())
}

/// `2OρO† − O†Oρ − ρO†O`
pub fn dissipator(o: &CMatrix, rho: &CMatrix) -> Result<CMatrix> {
    check_shape(o.nrows(), o)?;
    check_shape(o.nrows(), rho)?;
    let od = o.adjoint();
    let odo = &od * o;
    Ok(o * rho * &od * Complex64::from(2.0) - &odo * rho - rho * &odo)
}

/// `tr(ρO)`
pub fn expectation(rho: &CMatrix, o: &CMatrix) -> Result<Complex64> {
    check_shape(rho.nrows(), rho)?;
    check_shape(rho.nrows(), o)?;
    // tr(ρO) = Σ_ij ρ_ij O_ji without forming the product
    let d = rho.nrows();
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..d {
        for j in 0..d {
            acc += rho[(i, j)] * o[(j, i)];
        }
    }
    Ok(acc)
}

/// Operator basis `|row⟩⟨col|` of a regression or population block, as
/// pairs of basis indices in lexicographic order.
pub type OperatorBasis = Vec<(usize, usize)>;

/// Diagonal block `L_m` of the regression matrix: dynamics of the averages
/// of `|l⟩⟨k|` with `|l⟩ ∈ Λ_{m−1}`, `|k⟩ ∈ Λ_m`.
#[derive(Debug, Clone)]
pub struct CoherenceBlock {
    pub m: usize,
    pub operators: OperatorBasis,
    pub matrix: CMatrix,
}

/// Diagonal block `D_m` of the population matrix: averages of `|l⟩⟨k|`
/// with both states in `Λ_m`. Feed-in from `Λ_{m+1}` is not part of it.
#[derive(Debug, Clone)]
pub struct PopulationBlock {
    pub m: usize,
    pub operators: OperatorBasis,
    pub matrix: CMatrix,
}

impl CoherenceBlock {
    pub fn energies(&self) -> Vec<Complex64> {
        crate::linalg::eigenvalues(&self.matrix)
    }
}

impl PopulationBlock {
    pub fn energies(&self) -> Vec<Complex64> {
        crate::linalg::eigenvalues(&self.matrix)
    }
}

/// Full regression matrix over every complete coherence block, including
/// the couplings between blocks.
#[derive(Debug, Clone)]
pub struct CoherenceSector {
    pub operators: OperatorBasis,
    pub matrix: CMatrix,
}

/// A configured open system: basis, bare operators, Hamiltonian and the
/// three decay channels.
#[derive(Debug, Clone)]
pub struct System {
    params: SystemParams,
    basis: TruncatedBasis,
    ops: BareOperators,
    hamiltonian: CMatrix,
    // H − i Σ c O†O
    h_eff: CMatrix,
    // (γ/2, O)
    channels: Vec<(f64, CMatrix)>,
}

impl System {
    pub fn new(params: SystemParams, photon_cutoff: usize) -> Result<Self> {
        Self::with_basis(params, build_basis(photon_cutoff))
    }

    pub fn with_basis(params: SystemParams, basis: TruncatedBasis) -> Result<Self> {
        params.validate()?;
        let ops = bare_operators(&basis);
        let hamiltonian = build_hamiltonian(&params, &basis);
        let channels = vec![
            (params.gamma_a / 2.0, ops.a.clone()),
            (params.gamma_sigma / 2.0, ops.sigma1.clone()),
            (params.gamma_sigma / 2.0, ops.sigma2.clone()),
        ];
        let mut h_eff = hamiltonian.clone();
        for (c, o) in &channels {
            h_eff -= o.adjoint() * o * (I * *c);
        }
        Ok(Self {
            params,
            basis,
            ops,
            hamiltonian,
            h_eff,
            channels,
        })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn basis(&self) -> &TruncatedBasis {
        &self.basis
    }

    pub fn operators(&self) -> &BareOperators {
        &self.ops
    }

    /// `H − i Σ (γ/2) O†O`
    pub fn effective_hamiltonian(&self) -> &CMatrix {
        &self.h_eff
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    /// Right-hand side of the master equation applied to any operator.
    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        let h_rho = &self.h_eff * rho;
        let mut out = (&h_rho - rho * self.h_eff.adjoint()) * (-I);
        for (c, o) in &self.channels {
            if *c != 0.0 {
                out += o * rho * o.adjoint() * Complex64::from(2.0 * c);
            }
        }
        out
    }

    /// Heisenberg-picture (adjoint) generator: `d⟨X⟩/dt = ⟨apply_adjoint(X)⟩`.
    pub fn apply_adjoint(&self, x: &CMatrix) -> CMatrix {
        let mut out = (&self.hamiltonian * x - x * &self.hamiltonian) * I;
        for (c, o) in &self.channels {
            if *c != 0.0 {
                let od = o.adjoint();
                let odo = &od * o;
                out += (&od * x * o * Complex64::from(2.0) - &odo * x - x * &odo)
                    * Complex64::from(*c);
            }
        }
        out
    }

    /// Generator as a `dim² × dim²` matrix on the row-major vectorisation
    /// `vec(ρ)[i·dim + j] = ρ_ij`, assembled from Kronecker products.
    pub fn generator(&self) -> CMatrix {
        let d = self.dim();
        let id = CMatrix::identity(d, d);
        let h = &self.hamiltonian;
        let mut g = (kron(h, &id) - kron(&id, &h.transpose())) * (-I);
        for (c, o) in &self.channels {
            if *c == 0.0 {
                continue;
            }
            let odo = o.adjoint() * o;
            let term = kron(o, &o.conjugate()) * Complex64::from(2.0)
                - kron(&odo, &id)
                - kron(&id, &odo.transpose());
            g += term * Complex64::from(*c);
        }
        g
    }

    /// Highest manifold carrying weight in `rho`.
    pub fn max_excitation(&self, rho: &CMatrix) -> usize {
        let exc = self.basis.excitations();
        (0..rho.nrows().min(exc.len()))
            .filter(|&i| rho[(i, i)].norm() > SUPPORT_TOL)
            .map(|i| exc[i])
            .max()
            .unwrap_or(0)
    }

    /// Rejects states that the photon cutoff cannot evolve exactly.
    pub fn check_support(&self, rho: &CMatrix) -> Result<()> {
        check_shape(self.dim(), rho)?;
        let top = self.max_excitation(rho);
        if top > self.basis.photon_cutoff() {
            return Err(Error::CutoffTooSmall {
                manifold: top,
                cutoff: self.basis.photon_cutoff(),
            });
        }
        Ok(())
    }

    pub fn evolve(&self, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
        self.evolve_with(rho0, t_grid, &OdeOptions::default())
    }

    /// Adaptive Runge–Kutta evolution sampled on `t_grid` (which starts at 0).
    /// The trace is not renormalised.
    pub fn evolve_with(
        &self,
        rho0: &DensityMatrix,
        t_grid: &[f64],
        opts: &OdeOptions,
    ) -> Result<Vec<DensityMatrix>> {
        rho0.validate()?;
        self.check_support(&rho0.matrix)?;
        if t_grid.first().is_some_and(|t| *t != 0.0) {
            return Err(Error::InvalidGrid("time grid must start at 0".into()));
        }
        let states = self.propagate(&rho0.matrix, t_grid, opts)?;
        Ok(states
            .into_iter()
            .zip(t_grid)
            .map(|(m, &t)| DensityMatrix::new(m, rho0.time + t))
            .collect())
    }

    /// Propagates an arbitrary operator (not necessarily a state) with the
    /// master equation: `Φ_t[op]` for each `t` in `times`.
    pub fn propagate(&self, op: &CMatrix, times: &[f64], opts: &OdeOptions) -> Result<Vec<CMatrix>> {
        check_shape(self.dim(), op)?;
        let d = self.dim();
        let y0 = CVector::from_column_slice(op.as_slice());
        let ys = integrate(
            |y| {
                let m = CMatrix::from_column_slice(d, d, y.as_slice());
                CVector::from_column_slice(self.apply(&m).as_slice())
            },
            y0,
            times,
            opts,
        )?;
        Ok(ys
            .into_iter()
            .map(|y| CMatrix::from_column_slice(d, d, y.as_slice()))
            .collect())
    }

    /// Matrix-exponential backend: `vec ρ(t) = exp(G t) vec ρ₀`.
    pub fn evolve_expm(&self, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<DensityMatrix>> {
        rho0.validate()?;
        self.check_support(&rho0.matrix)?;
        let g = self.generator();
        let d = self.dim();
        let v0 = vec_row_major(&rho0.matrix);
        Ok(t_grid
            .iter()
            .map(|&t| {
                let v = expm(&(&g * Complex64::from(t))) * &v0;
                DensityMatrix::new(unvec_row_major(&v, d), rho0.time + t)
            })
            .collect())
    }

    /// `ρ(k·step)` for `k = 0..=count` by repeated application of the exact
    /// one-step propagator `exp(G·step)`. Cheaper than adaptive stepping when
    /// many equally spaced samples are needed.
    pub fn evolve_uniform(&self, rho0: &CMatrix, step: f64, count: usize) -> Result<Vec<CMatrix>> {
        check_shape(self.dim(), rho0)?;
        let d = self.dim();
        let u = expm(&(self.generator() * Complex64::from(step)));
        let mut v = vec_row_major(rho0);
        let mut out = Vec::with_capacity(count + 1);
        out.push(rho0.clone());
        for _ in 0..count {
            v = &u * &v;
            out.push(unvec_row_major(&v, d));
        }
        Ok(out)
    }

    /// `d⟨N⟩/dt` at the given state.
    pub fn excitation_rate(&self, rho: &CMatrix) -> f64 {
        expectation(&self.apply(rho), &self.ops.number)
            .expect("shapes fixed by the system")
            .re
    }

    /// Total population of the singlet states `|n,S⟩`.
    pub fn singlet_population(&self, rho: &CMatrix) -> f64 {
        self.basis
            .states()
            .iter()
            .enumerate()
            .filter(|(_, s)| s.matter == DickeLabel::Singlet)
            .map(|(i, _)| rho[(i, i)].re)
            .sum()
    }

    fn block_operators(&self, lower: usize, upper: usize) -> Result<OperatorBasis> {
        let lo = self.basis.manifold_range(lower)?;
        let up = self.basis.manifold_range(upper)?;
        Ok(lo
            .flat_map(|l| up.clone().map(move |k| (l, k)))
            .collect())
    }

    /// Restricts the adjoint generator to `span{|r⟩⟨c|}` and returns the
    /// matrix `L` of `dx/dt = −i·L·x`.
    fn restricted_regression(&self, operators: &[(usize, usize)]) -> CMatrix {
        let d = self.dim();
        let n = operators.len();
        let mut a = CMatrix::zeros(n, n);
        for (k, &(r, c)) in operators.iter().enumerate() {
            let mut x = CMatrix::zeros(d, d);
            x[(r, c)] = Complex64::new(1.0, 0.0);
            let y = self.apply_adjoint(&x);
            for (j, &(rj, cj)) in operators.iter().enumerate() {
                a[(k, j)] = y[(rj, cj)];
            }
        }
        a * I
    }

    pub fn regression_block(&self, m: usize) -> Result<CoherenceBlock> {
        if m == 0 {
            return Err(Error::InvalidManifold(0));
        }
        self.basis.require_complete(m)?;
        let operators = self.block_operators(m - 1, m)?;
        let matrix = self.restricted_regression(&operators);
        Ok(CoherenceBlock {
            m,
            operators,
            matrix,
        })
    }

    pub fn population_block(&self, m: usize) -> Result<PopulationBlock> {
        self.basis.require_complete(m)?;
        let operators = self.block_operators(m, m)?;
        let matrix = self.restricted_regression(&operators);
        Ok(PopulationBlock {
            m,
            operators,
            matrix,
        })
    }

    /// All complete coherence blocks `m = 1..=photon_cutoff` and the
    /// couplings between them.
    pub fn coherence_sector(&self) -> Result<CoherenceSector> {
        let mut operators = Vec::new();
        for m in 1..=self.basis.photon_cutoff() {
            operators.extend(self.block_operators(m - 1, m)?);
        }
        let matrix = self.restricted_regression(&operators);
        Ok(CoherenceSector { operators, matrix })
    }
}

fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

pub fn vec_row_major(m: &CMatrix) -> CVector {
    let d = m.nrows();
    CVector::from_fn(d * m.ncols(), |k, _| m[(k / d, k % d)])
}

pub fn unvec_row_major(v: &CVector, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |i, j| v[i * d + j])
}

pub fn build_generator(params: &SystemParams, basis: &TruncatedBasis) -> Result<CMatrix> {
    Ok(System::with_basis(*params, basis.clone())?.generator())
}

pub fn evolve(
    rho0: &DensityMatrix,
    params: &SystemParams,
    basis: &TruncatedBasis,
    t_grid: &[f64],
) -> Result<Vec<DensityMatrix>> {
    System::with_basis(*params, basis.clone())?.evolve(rho0, t_grid)
}

pub fn regression_block(
    params: &SystemParams,
    basis: &TruncatedBasis,
    m: usize,
) -> Result<CoherenceBlock> {
    System::with_basis(*params, basis.clone())?.regression_block(m)
}

pub fn population_block(
    params: &SystemParams,
    basis: &TruncatedBasis,
    m: usize,
) -> Result<PopulationBlock> {
    System::with_basis(*params, basis.clone())?.population_block(m)
}

/// Largest deviation of a trajectory from the density-matrix invariants:
/// `(trace drift, Hermiticity defect, most negative eigenvalue)`.
pub fn trajectory_defects(traj: &[DensityMatrix]) -> (f64, f64, f64) {
    traj.iter().fold((0.0, 0.0, f64::INFINITY), |(tr, h, e), rho| {
        (
            tr.max((rho.trace() - Complex64::new(1.0, 0.0)).norm()),
            h.max(max_abs(&(&rho.matrix - rho.matrix.adjoint()))),
            e.min(rho.min_eigenvalue()),
        )
    })
}
