//! Two-time correlations from the quantum regression theorem and the
//! time-resolved spectrum seen through a filter of bandwidth `κ`:
//!
//! ```text
//! S(ω,T) = 2κ·Re ∫₀ᵀ dτ e^{(κ − i(ω−ω₀))τ} ∫₀^{T−τ} dt e^{−2κ(T−t)} G(t,τ)
//! G(t,τ) = ⟨O†(t+τ) O(t)⟩
//! ```
//!
//! The `e^{+κτ}` factor is bounded because `t + τ ≤ T`; its product with the
//! `t` weight is `e^{−κ(T−t)−κ(T−t−τ)}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::eigenanalysis::{ClosedForms, TransitionEnergy};
use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix, CVector};
use crate::liouvillian::{expectation, unvec_row_major, vec_row_major, DensityMatrix, System};
use crate::params::SystemParams;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EmissionOperator {
    /// cavity field `a`
    #[serde(rename = "a")]
    Cavity,
    #[serde(rename = "sigma1")]
    Emitter1,
    #[serde(rename = "sigma2")]
    Emitter2,
}

impl EmissionOperator {
    pub fn matrix<'a>(&self, system: &'a System) -> &'a CMatrix {
        let ops = system.operators();
        match self {
            EmissionOperator::Cavity => &ops.a,
            EmissionOperator::Emitter1 => &ops.sigma1,
            EmissionOperator::Emitter2 => &ops.sigma2,
        }
    }

    pub fn tag(&self) -> &'static str {
        match self {
            EmissionOperator::Cavity => "a",
            EmissionOperator::Emitter1 => "sigma1",
            EmissionOperator::Emitter2 => "sigma2",
        }
    }
}

impl std::str::FromStr for EmissionOperator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "a" => Ok(Self::Cavity),
            "sigma1" => Ok(Self::Emitter1),
            "sigma2" => Ok(Self::Emitter2),
            other => Err(Error::InvalidParams(format!("unknown operator {other:?}"))),
        }
    }
}

/// `G(t_i, τ_j)` stored with `t` along rows.
#[derive(Debug, Clone)]
pub struct CorrelationGrid {
    pub operator: EmissionOperator,
    pub t_grid: Vec<f64>,
    pub tau_grid: Vec<f64>,
    pub values: DMatrix<Complex64>,
}

/// Linear map taking `ρ(t)` to the regression vector and back to `G`.
struct Regression {
    // A with dv/dτ = A·v (A = −i·L)
    generator: CMatrix,
    operators: Vec<(usize, usize)>,
    // O = Σ_k coeffs[k]·|r_k⟩⟨c_k|
    coeffs: CVector,
    o_dag: CMatrix,
}

impl Regression {
    fn new(system: &System, op: EmissionOperator) -> Result<Self> {
        let sector = system.coherence_sector()?;
        let o = op.matrix(system);
        let coeffs = CVector::from_iterator(
            sector.operators.len(),
            sector.operators.iter().map(|&(r, c)| o[(r, c)]),
        );
        Ok(Self {
            generator: sector.matrix * Complex64::new(0.0, -1.0),
            operators: sector.operators,
            coeffs,
            o_dag: o.adjoint(),
        })
    }

    /// `v_k = tr(X_k ρ O†)` with `X_k = |r_k⟩⟨c_k|`.
    fn initial(&self, rho: &CMatrix) -> CVector {
        let sigma = rho * &self.o_dag;
        CVector::from_iterator(
            self.operators.len(),
            self.operators.iter().map(|&(r, c)| sigma[(c, r)]),
        )
    }

    /// `G = conj(Σ_k o_k v_k)`: the vector holds `⟨O†(t) X_k(t+τ)⟩`.
    fn value(&self, v: &CVector) -> Complex64 {
        self.coeffs
            .iter()
            .zip(v.iter())
            .map(|(a, b)| a * b)
            .sum::<Complex64>()
            .conj()
    }
}

fn check_grid(name: &str, grid: &[f64]) -> Result<()> {
    if grid.iter().any(|x| !x.is_finite() || *x < 0.0) || grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidGrid(format!("{name} must be non-negative and increasing")));
    }
    Ok(())
}

/// `exp(A·(x_k − x_{k−1}))` for each grid point (with `x_{−1} = 0`),
/// computed once per distinct increment.
fn step_propagators(a: &CMatrix, grid: &[f64]) -> Vec<CMatrix> {
    let mut cache: Vec<(f64, CMatrix)> = Vec::new();
    let mut prev = 0.0;
    grid.iter()
        .map(|&x| {
            let dx = x - prev;
            prev = x;
            if let Some((_, u)) = cache.iter().find(|(d, _)| (d - dx).abs() <= 1e-14 * dx.max(1.0)) {
                return u.clone();
            }
            let u = if dx == 0.0 {
                CMatrix::identity(a.nrows(), a.ncols())
            } else {
                expm(&(a * Complex64::from(dx)))
            };
            cache.push((dx, u.clone()));
            u
        })
        .collect()
}

fn states_at(system: &System, rho0: &DensityMatrix, t_grid: &[f64]) -> Result<Vec<CMatrix>> {
    let mut grid = Vec::with_capacity(t_grid.len() + 1);
    grid.push(0.0);
    grid.extend_from_slice(t_grid);
    let traj = system.evolve(rho0, &grid)?;
    Ok(traj.into_iter().skip(1).map(|r| r.matrix).collect())
}

/// `G(t,τ) = ⟨O†(t+τ)O(t)⟩` in the lab frame, propagated in `τ` with the
/// regression matrix of the complete coherence blocks.
pub fn two_time_correlation(
    system: &System,
    op: EmissionOperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tau_grid: &[f64],
) -> Result<CorrelationGrid> {
    check_grid("t grid", t_grid)?;
    check_grid("tau grid", tau_grid)?;
    let reg = Regression::new(system, op)?;
    let states = states_at(system, rho0, t_grid)?;

    let tau_props = step_propagators(&reg.generator, tau_grid);

    let mut values = DMatrix::zeros(t_grid.len(), tau_grid.len());
    for (i, rho) in states.iter().enumerate() {
        let mut v = reg.initial(rho);
        for (j, u) in tau_props.iter().enumerate() {
            v = u * v;
            values[(i, j)] = reg.value(&v);
        }
    }
    Ok(CorrelationGrid {
        operator: op,
        t_grid: t_grid.to_vec(),
        tau_grid: tau_grid.to_vec(),
        values,
    })
}

/// Reference evaluation `G(t,τ) = tr(O†·Φ_τ[O·ρ(t)])` with the full
/// generator propagator `Φ_τ = exp(𝓛τ)`, without the regression blocks.
pub fn direct_correlation(
    system: &System,
    op: EmissionOperator,
    rho0: &DensityMatrix,
    t_grid: &[f64],
    tau_grid: &[f64],
) -> Result<CorrelationGrid> {
    check_grid("t grid", t_grid)?;
    check_grid("tau grid", tau_grid)?;
    let o = op.matrix(system);
    let o_dag = o.adjoint();
    rho0.validate()?;
    system.check_support(&rho0.matrix)?;
    let d = system.dim();
    let generator = system.generator();
    let t_props = step_propagators(&generator, t_grid);
    let tau_props = step_propagators(&generator, tau_grid);
    let mut rho = vec_row_major(&rho0.matrix);
    let mut values = DMatrix::zeros(t_grid.len(), tau_grid.len());
    for (i, ut) in t_props.iter().enumerate() {
        rho = ut * rho;
        let mut x = vec_row_major(&(o * unvec_row_major(&rho, d)));
        for (j, u) in tau_props.iter().enumerate() {
            x = u * x;
            values[(i, j)] = expectation(&unvec_row_major(&x, d), &o_dag)?;
        }
    }
    Ok(CorrelationGrid {
        operator: op,
        t_grid: t_grid.to_vec(),
        tau_grid: tau_grid.to_vec(),
        values,
    })
}

/// Sign of `κτ` in the spectrometer kernel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelSign {
    /// `e^{(κ − i(ω−ω₀))τ}`, the filter kernel
    #[default]
    Verbatim,
    /// `e^{(−κ − i(ω−ω₀))τ}`
    Decaying,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectrumOptions {
    pub kernel: KernelSign,
    /// Initial quadrature step; `None` derives one from the frequency content.
    pub step: Option<f64>,
    /// Accepted relative change of `max S` when the step is halved.
    pub tolerance: f64,
    pub max_refinements: usize,
    /// Return the finest series instead of an error when the tolerance is
    /// not met; the series is then marked unconverged.
    pub allow_unconverged: bool,
}

impl Default for SpectrumOptions {
    fn default() -> Self {
        Self {
            kernel: KernelSign::Verbatim,
            step: None,
            tolerance: 0.005,
            max_refinements: 6,
            allow_unconverged: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SpectrumSeries {
    pub operator: EmissionOperator,
    pub kappa: f64,
    pub total_time: f64,
    pub kernel: KernelSign,
    pub omega_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Quadrature step of the returned values.
    pub step: f64,
    /// Relative change of `max S` against the previous (twice coarser) step.
    pub convergence_delta: f64,
    pub converged: bool,
}

impl SpectrumSeries {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    /// Frequencies of local maxima above `rel_threshold·max S`.
    pub fn peaks(&self, rel_threshold: f64) -> Vec<f64> {
        find_peaks(&self.omega_grid, &self.values, rel_threshold)
    }
}

pub fn find_peaks(x: &[f64], y: &[f64], rel_threshold: f64) -> Vec<f64> {
    let max = y.iter().copied().fold(0.0, f64::max);
    if max <= 0.0 {
        return Vec::new();
    }
    (1..y.len().saturating_sub(1))
        .filter(|&i| y[i] > y[i - 1] && y[i] >= y[i + 1] && y[i] >= rel_threshold * max)
        .map(|i| x[i])
        .collect()
}

/// One quadrature pass with step `T/count`.
fn spectrum_pass(
    system: &System,
    reg: &Regression,
    rho0: &DensityMatrix,
    kappa: f64,
    total_time: f64,
    count: usize,
    omega0: f64,
    omega_grid: &[f64],
    kernel: KernelSign,
) -> Result<Vec<f64>> {
    let h = total_time / count as f64;
    let states = system.evolve_uniform(&rho0.matrix, h, count)?;

    // prefix[i] = Σ_{k<i} e^{−2κ(T−t_k)} v_k, so the trapezoid over
    // t ∈ [0, T−τ_j] is a difference of prefix sums plus endpoint halves.
    let weighted: Vec<CVector> = states
        .iter()
        .enumerate()
        .map(|(i, rho)| reg.initial(rho) * Complex64::from((-2.0 * kappa * (total_time - i as f64 * h)).exp()))
        .collect();
    let dim = reg.operators.len();
    let mut prefix = Vec::with_capacity(count + 2);
    prefix.push(CVector::zeros(dim));
    for w in &weighted {
        let next = prefix.last().unwrap() + w;
        prefix.push(next);
    }

    let u = expm(&(&reg.generator * Complex64::from(h)));
    // row vector oᵀ·U^j
    let mut row = reg.coeffs.transpose();
    let mut inner = vec![Complex64::new(0.0, 0.0); count + 1];
    for (j, slot) in inner.iter_mut().enumerate() {
        let last = count - j;
        if last > 0 {
            let w = (&prefix[last + 1] - (&weighted[0] + &weighted[last]) * Complex64::from(0.5))
                * Complex64::from(h);
            *slot = (&row * w)[(0, 0)].conj();
        }
        row = &row * &u;
    }

    let sign = match kernel {
        KernelSign::Verbatim => 1.0,
        KernelSign::Decaying => -1.0,
    };
    Ok(omega_grid
        .iter()
        .map(|&omega| {
            let rate = Complex64::new(sign * kappa, -(omega - omega0));
            let step_factor = (rate * h).exp();
            let mut phase = Complex64::new(1.0, 0.0);
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, g) in inner.iter().enumerate() {
                let w = if j == 0 || j == count { 0.5 } else { 1.0 };
                acc += phase * g * w;
                phase *= step_factor;
            }
            2.0 * kappa * (acc * h).re
        })
        .collect())
}

/// Filtered spectrum `S(ω,T)` by trapezoidal double quadrature.
///
/// `G` is evaluated in the frame rotating at `ω₀` (so the kernel's
/// `e^{−i(ω−ω₀)τ}` places lines at their absolute frequencies). The step is
/// halved until `max S` changes by less than `opts.tolerance`.
pub fn physical_spectrum(
    params: &SystemParams,
    photon_cutoff: usize,
    op: EmissionOperator,
    rho0: &DensityMatrix,
    kappa: f64,
    total_time: f64,
    omega_grid: &[f64],
    opts: &SpectrumOptions,
) -> Result<SpectrumSeries> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::InvalidSpectrometer(format!("kappa must be > 0, got {kappa}")));
    }
    if !(total_time > 0.0 && total_time.is_finite()) {
        return Err(Error::InvalidSpectrometer(format!("T must be > 0, got {total_time}")));
    }
    let system = System::new(params.rotating_frame(), photon_cutoff)?;
    rho0.validate()?;
    system.check_support(&rho0.matrix)?;
    let reg = Regression::new(&system, op)?;

    // fastest oscillation in the τ integrand: grid offset plus line offsets
    let span = omega_grid
        .iter()
        .map(|w| (w - params.omega0).abs())
        .fold(0.0, f64::max);
    let lines = crate::linalg::eigenvalues(&reg.generator)
        .iter()
        .map(|z| z.norm())
        .fold(0.0, f64::max);
    let fastest = (span + lines + kappa).max(1e-12);
    let h0 = opts.step.unwrap_or(0.5 / fastest).min(total_time / 64.0);
    let mut count = (total_time / h0).ceil().max(1.0) as usize;

    let run = |count| {
        spectrum_pass(
            &system,
            &reg,
            rho0,
            kappa,
            total_time,
            count,
            params.omega0,
            omega_grid,
            opts.kernel,
        )
    };
    let mut prev = run(count)?;
    let mut delta = f64::INFINITY;
    for _ in 0..opts.max_refinements {
        count *= 2;
        let next = run(count)?;
        let max_next = next.iter().copied().fold(0.0, f64::max);
        let diff = prev
            .iter()
            .zip(&next)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        delta = if max_next > 0.0 { diff / max_next } else { 0.0 };
        prev = next;
        if delta < opts.tolerance {
            return Ok(SpectrumSeries {
                operator: op,
                kappa,
                total_time,
                kernel: opts.kernel,
                omega_grid: omega_grid.to_vec(),
                values: prev,
                step: total_time / count as f64,
                convergence_delta: delta,
                converged: true,
            });
        }
    }
    if opts.allow_unconverged {
        return Ok(SpectrumSeries {
            operator: op,
            kappa,
            total_time,
            kernel: opts.kernel,
            omega_grid: omega_grid.to_vec(),
            values: prev,
            step: total_time / count as f64,
            convergence_delta: delta,
            converged: false,
        });
    }
    Err(Error::Quadrature {
        delta,
        refinements: opts.max_refinements,
    })
}

/// One emission line `λ_m^{i,j}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PeakRow {
    pub m: usize,
    pub upper_branch: u8,
    pub lower_branch: u8,
    pub position: f64,
    pub width: f64,
    /// Lines of the same block sharing this position.
    pub multiplicity: usize,
    pub involves_singlet: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PeakTable {
    pub rows: Vec<PeakRow>,
}

/// Positions closer than this (relative to `g`) count as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

pub fn peak_table(params: &SystemParams, m_max: usize) -> Result<PeakTable> {
    peak_table_with(&ClosedForms::default(), params, m_max)
}

pub fn peak_table_with(forms: &ClosedForms, params: &SystemParams, m_max: usize) -> Result<PeakTable> {
    if m_max == 0 {
        return Err(Error::InvalidManifold(0));
    }
    let tol = DEGENERACY_TOL * params.g;
    let mut rows = Vec::new();
    for m in 1..=m_max {
        let lines: Vec<TransitionEnergy> = forms.transition_eigenvalues(m, params)?;
        for t in &lines {
            let multiplicity = lines
                .iter()
                .filter(|o| (o.value.re - t.value.re).abs() <= tol)
                .count();
            rows.push(PeakRow {
                m,
                upper_branch: t.upper.branch,
                lower_branch: t.lower.branch,
                position: t.value.re,
                width: -2.0 * t.value.im,
                multiplicity,
                involves_singlet: t.involves_singlet(),
            });
        }
    }
    rows.sort_by(|a, b| a.position.total_cmp(&b.position).then(a.m.cmp(&b.m)));
    Ok(PeakTable { rows })
}

impl PeakTable {
    /// Lines reachable from a state in the symmetric (triplet) sector.
    pub fn symmetric_sector(&self) -> PeakTable {
        PeakTable {
            rows: self.rows.iter().filter(|r| !r.involves_singlet).copied().collect(),
        }
    }

    pub fn block(&self, m: usize) -> impl Iterator<Item = &PeakRow> {
        self.rows.iter().filter(move |r| r.m == m)
    }

    /// Distinct positions (merged within `tol`), optionally for one block.
    pub fn distinct_positions(&self, m: Option<usize>, tol: f64) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in self.rows.iter().filter(|r| m.is_none_or(|m| r.m == m)) {
            if out.last().is_none_or(|&p| (r.position - p).abs() > tol) {
                out.push(r.position);
            }
        }
        out
    }

    /// Distance from `omega` to the nearest tabulated position.
    pub fn nearest_distance(&self, omega: f64) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.position - omega).abs())
            .fold(f64::INFINITY, f64::min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{BasisState, DickeLabel};

    #[test]
    fn vacuum_has_no_correlation() {
        let s = System::new(SystemParams::new(3.0, 0.0, 1.0, 0.2, 0.1).unwrap(), 2).unwrap();
        let vac = DensityMatrix::pure_state(s.basis(), BasisState::new(0, DickeLabel::TMinus)).unwrap();
        for op in [EmissionOperator::Cavity, EmissionOperator::Emitter1, EmissionOperator::Emitter2] {
            let g = two_time_correlation(&s, op, &vac, &[0.0, 1.0], &[0.0, 0.5, 1.0]).unwrap();
            assert!(g.values.iter().all(|z| z.norm() == 0.0));
        }
    }

    #[test]
    fn single_decaying_mode() {
        let ga = 0.4;
        let s = System::new(SystemParams::new(3.0, 0.0, 1e-300, ga, 0.0).unwrap(), 1).unwrap();
        let rho0 = DensityMatrix::pure_state(s.basis(), BasisState::new(1, DickeLabel::TMinus)).unwrap();
        let ts = [0.0, 0.5, 2.0];
        let taus = [0.0, 0.3, 1.1, 4.0];
        let g = two_time_correlation(&s, EmissionOperator::Cavity, &rho0, &ts, &taus).unwrap();
        for (i, t) in ts.iter().enumerate() {
            for (j, tau) in taus.iter().enumerate() {
                let want = Complex64::new(-ga * t - ga * tau / 2.0, 3.0 * tau).exp();
                assert!((g.values[(i, j)] - want).norm() < 1e-8, "t={t} tau={tau}");
            }
        }
    }

    #[test]
    fn spectrum_rejects_bad_settings() {
        let p = SystemParams::new(3.0, 0.0, 1.0, 0.2, 0.1).unwrap();
        let s = System::new(p, 1).unwrap();
        let rho0 = DensityMatrix::pure_state(s.basis(), BasisState::new(0, DickeLabel::TZero)).unwrap();
        let opts = SpectrumOptions::default();
        for (k, t) in [(0.0, 1.0), (-1.0, 1.0), (0.1, 0.0)] {
            let r = physical_spectrum(&p, 1, EmissionOperator::Cavity, &rho0, k, t, &[3.0], &opts);
            assert!(matches!(r, Err(Error::InvalidSpectrometer(_))));
        }
    }

    #[test]
    fn vacuum_spectrum_is_zero() {
        let p = SystemParams::new(3.0, 0.0, 1.0, 0.2, 0.1).unwrap();
        let s = System::new(p, 1).unwrap();
        let vac = DensityMatrix::pure_state(s.basis(), BasisState::new(0, DickeLabel::TMinus)).unwrap();
        let grid: Vec<f64> = (0..50).map(|i| 1.0 + i as f64 * 0.08).collect();
        let sp = physical_spectrum(&p, 1, EmissionOperator::Cavity, &vac, 0.1, 10.0, &grid, &SpectrumOptions::default())
            .unwrap();
        assert!(sp.values.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn peak_table_sizes() {
        let p = SystemParams::new(5.0, 0.0, 1.0, 0.1, 0.05).unwrap();
        let t1 = peak_table(&p, 1).unwrap();
        assert_eq!(t1.rows.len(), 3);
        let t2 = peak_table(&p, 2).unwrap();
        assert_eq!(t2.block(2).count(), 12);
        assert!(t2.distinct_positions(Some(2), 1e-9).len() <= 9);
        let sym = t2.symmetric_sector();
        assert_eq!(sym.block(2).count(), 6);
        assert!(sym.rows.iter().all(|r| !r.involves_singlet));
        assert!(t2.rows.windows(2).all(|w| w[0].position <= w[1].position));
        assert!(matches!(peak_table(&p, 0), Err(Error::InvalidManifold(0))));
    }

    #[test]
    fn degenerate_lines_have_multiplicity() {
        let p = SystemParams::new(5.0, 0.0, 1.0, 0.1, 0.05).unwrap();
        let t = peak_table(&p, 2).unwrap();
        assert!(t.block(2).any(|r| r.multiplicity > 1));
    }

    #[test]
    fn operator_tags_round_trip() {
        for op in [EmissionOperator::Cavity, EmissionOperator::Emitter1, EmissionOperator::Emitter2] {
            assert_eq!(op.tag().parse::<EmissionOperator>().unwrap(), op);
        }
        assert!("b".parse::<EmissionOperator>().is_err());
    }

    #[test]
    fn peaks_of_simple_series() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0];
        let y = [0.0, 2.0, 1.0, 0.05, 0.1, 0.0];
        assert_eq!(find_peaks(&x, &y, 0.01), vec![1.0, 4.0]);
        assert_eq!(find_peaks(&x, &y, 0.1), vec![1.0]);
    }

    #[test]
    fn regression_matches_direct_route() {
        let p = SystemParams::new(3.0, 0.2, 1.0, 0.4, 0.3).unwrap();
        let s = System::new(p, 2).unwrap();
        let rho0 = DensityMatrix::pure_state(s.basis(), BasisState::new(0, DickeLabel::TPlus)).unwrap();
        let ts = [0.0, 0.7];
        let taus = [0.0, 0.5, 1.0];
        for op in [EmissionOperator::Cavity, EmissionOperator::Emitter2] {
            let a = two_time_correlation(&s, op, &rho0, &ts, &taus).unwrap();
            let b = direct_correlation(&s, op, &rho0, &ts, &taus).unwrap();
            assert!(crate::linalg::max_abs(&(&a.values - &b.values)) < 1e-8);
        }
    }

    #[test]
    fn unconverged_series_is_flagged() {
        let p = SystemParams::new(3.0, 0.0, 1.0, 0.2, 0.1).unwrap();
        let s = System::new(p, 1).unwrap();
        let rho0 = DensityMatrix::pure_state(s.basis(), BasisState::new(0, DickeLabel::TZero)).unwrap();
        let grid: Vec<f64> = (0..40).map(|i| 1.0 + i as f64 * 0.1).collect();
        let strict = SpectrumOptions {
            tolerance: 1e-30,
            max_refinements: 1,
            ..SpectrumOptions::default()
        };
        let r = physical_spectrum(&p, 1, EmissionOperator::Cavity, &rho0, 0.1, 10.0, &grid, &strict);
        assert!(matches!(r, Err(Error::Quadrature { refinements: 1, .. })));
        let lenient = SpectrumOptions {
            allow_unconverged: true,
            ..strict
        };
        let sp = physical_spectrum(&p, 1, EmissionOperator::Cavity, &rho0, 0.1, 10.0, &grid, &lenient).unwrap();
        assert!(!sp.converged && sp.convergence_delta > 0.0);
    }

    #[test]
    fn rejects_unsorted_grids() {
        let s = System::new(SystemParams::new(3.0, 0.0, 1.0, 0.2, 0.1).unwrap(), 1).unwrap();
        let vac = DensityMatrix::pure_state(s.basis(), BasisState::new(0, DickeLabel::TMinus)).unwrap();
        let r = two_time_correlation(&s, EmissionOperator::Cavity, &vac, &[1.0, 0.5], &[0.0]);
        assert!(matches!(r, Err(Error::InvalidGrid(_))));
    }
}
