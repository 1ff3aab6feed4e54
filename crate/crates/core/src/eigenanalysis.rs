//! Closed-form complex eigenenergies of the dissipative ladder and the
//! strong-coupling criterion built from them.
//!
//! With `z = γ₋ + iΔ/2`, manifold `n ≥ 2` has three triplet energies
//! `−iΓ_n/2 + nω₀ − Δ + P_n^{(k)}` and one singlet energy
//! `−iΓ_n/2 + nω₀ − Δ`, where `Γ_n = (n−1)γ_a + γ_σ` and the splittings `P`
//! solve `P³ − P·R_n² + 4i·z·g² = 0` with `R_n² = (4n−2)g² − 4z²`. They are
//! evaluated with the trigonometric cubic formula
//! `P^{(k)} = −R_n·cos((acos(iQ_n) + 2kπ)/3)/cos(π/6)`,
//! `Q_n = 6√3·(z/g)/(R_n/g)³`, and polished against the cubic itself.
//!
//! Manifold 1 has its own formulas: a split pair centred at `ω₀ − Δ/2` and
//! the singlet `|0,S⟩` at `ω₀ − Δ − iγ_σ/2`.

use std::cmp::Ordering;
use std::f64::consts::PI;

use num_complex::Complex64;

use crate::cubic::solve_depressed;
use crate::error::{Error, Result};
use crate::params::SystemParams;

/// `|R_n| / g` below which the trigonometric form is replaced by a direct
/// cubic solve.
pub const EXCEPTIONAL_WINDOW: f64 = 1e-8;

/// Relative residual of the cubic accepted from the trigonometric roots.
const CUBIC_RESIDUAL_TOL: f64 = 1e-10;

const SQRT3: f64 = 1.732_050_807_568_877_2;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// `ε_n^{(k)}`: real part is a position, imaginary part minus half a width.
///
/// Branches: for `n ≥ 2`, 1–3 are the triplet states (descending real part)
/// and 4 the singlet; for `n = 1`, 1–2 are the split pair and 3 the singlet.
/// The vacuum is `n = 0`, branch 0.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexEigenenergy {
    pub n: usize,
    pub branch: u8,
    pub value: Complex64,
}

impl ComplexEigenenergy {
    pub fn position(&self) -> f64 {
        self.value.re
    }

    pub fn width(&self) -> f64 {
        -2.0 * self.value.im
    }

    pub fn is_singlet(&self) -> bool {
        match self.n {
            0 => false,
            1 => self.branch == 3,
            _ => self.branch == 4,
        }
    }
}

/// Evaluator for the closed forms.
///
/// The default evaluator is exact; [`ClosedForms::with_rabi_scale`] returns
/// one whose complex Rabi frequencies are multiplied by a factor, which the
/// verification suite uses as a negative control.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForms {
    rabi_scale: f64,
}

impl Default for ClosedForms {
    fn default() -> Self {
        Self { rabi_scale: 1.0 }
    }
}

/// `γ₋ + iΔ/2`
fn effective_detuning(p: &SystemParams) -> Complex64 {
    c(p.gamma_minus(), p.delta / 2.0)
}

fn sort_desc(values: &mut [Complex64], scale: f64) {
    let tie = 1e-12 * scale.max(1.0);
    values.sort_by(|a, b| {
        if (a.re - b.re).abs() <= tie {
            b.im.partial_cmp(&a.im).unwrap_or(Ordering::Equal)
        } else {
            b.re.partial_cmp(&a.re).unwrap_or(Ordering::Equal)
        }
    });
}

impl ClosedForms {
    pub fn with_rabi_scale(rabi_scale: f64) -> Self {
        Self { rabi_scale }
    }

    /// `R₁ = √(2g² − (γ₋ + iΔ/2)²)`, principal root.
    pub fn rabi_manifold1(&self, params: &SystemParams) -> Complex64 {
        let z = effective_detuning(params);
        (c(2.0 * params.g * params.g, 0.0) - z * z).sqrt() * self.rabi_scale
    }

    pub fn eps_manifold1(&self, params: &SystemParams) -> [ComplexEigenenergy; 3] {
        let r1 = self.rabi_manifold1(params);
        let pair = c(params.omega0 - params.delta / 2.0, -params.gamma_plus());
        let singlet = c(params.omega0 - params.delta, -params.gamma_sigma / 2.0);
        let mut pm = [pair + r1, pair - r1];
        sort_desc(&mut pm, params.omega0.abs() + params.g);
        let e = |branch, value| ComplexEigenenergy {
            n: 1,
            branch,
            value,
        };
        [e(1, pm[0]), e(2, pm[1]), e(3, singlet)]
    }

    /// `R_n = √((4n−2)g² − 4(γ₋ + iΔ/2)²)`, principal root.
    pub fn complex_rabi(&self, n: usize, params: &SystemParams) -> Complex64 {
        let z = effective_detuning(params);
        let g2 = params.g * params.g;
        (c((4.0 * n as f64 - 2.0) * g2, 0.0) - 4.0 * z * z).sqrt() * self.rabi_scale
    }

    /// `Q_n = 6√3·(z/g)/(R_n/g)³`
    pub fn discriminant(&self, n: usize, params: &SystemParams) -> Result<Complex64> {
        let r = self.complex_rabi(n, params);
        if r.norm() < EXCEPTIONAL_WINDOW * params.g {
            return Err(Error::ExceptionalPoint {
                n,
                modulus: r.norm(),
            });
        }
        let z = effective_detuning(params);
        let rg = r / params.g;
        Ok(6.0 * SQRT3 * (z / params.g) / (rg * rg * rg))
    }

    /// Splittings `P_n^{(1,2,3)}` of a manifold `n ≥ 2`, sorted by descending
    /// real part (ties by descending imaginary part).
    pub fn splitting_roots(&self, n: usize, params: &SystemParams) -> Result<[Complex64; 3]> {
        if n < 2 {
            return Err(Error::InvalidManifold(n));
        }
        let g = params.g;
        let z = effective_detuning(params);
        let r = self.complex_rabi(n, params);
        // P³ − R²·P + 4i·z·g² = 0 (the footnote cubic in x = −iP)
        let p_coef = -(r * r);
        let q_coef = c(0.0, 4.0) * z * g * g;

        let mut roots = match self.discriminant(n, params) {
            Ok(q) => {
                let theta = (c(0.0, 1.0) * q).acos();
                let scale = r / (PI / 6.0).cos();
                let trig = [1.0, 2.0, 3.0].map(|k: f64| -scale * ((theta + 2.0 * k * PI) / 3.0).cos());
                let residual_ok = trig.iter().all(|&p| {
                    let size = p.norm().powi(3) + p_coef.norm() * p.norm() + q_coef.norm();
                    (p * p * p + p_coef * p + q_coef).norm() <= CUBIC_RESIDUAL_TOL * size.max(g * g * g)
                });
                if residual_ok {
                    trig
                } else {
                    solve_depressed(p_coef, q_coef)
                }
            }
            Err(Error::ExceptionalPoint { .. }) => solve_depressed(p_coef, q_coef),
            Err(e) => return Err(e),
        };
        sort_desc(&mut roots, g);
        Ok(roots)
    }

    pub fn eps_manifold(&self, n: usize, params: &SystemParams) -> Result<[ComplexEigenenergy; 4]> {
        let p = self.splitting_roots(n, params)?;
        let base = c(
            n as f64 * params.omega0 - params.delta,
            -gamma_n(n, params) / 2.0,
        );
        let e = |branch, value| ComplexEigenenergy { n, branch, value };
        Ok([
            e(1, base + p[0]),
            e(2, base + p[1]),
            e(3, base + p[2]),
            e(4, base),
        ])
    }

    /// All complex eigenenergies of manifold `n` (1, 3 or 4 of them).
    pub fn eps(&self, n: usize, params: &SystemParams) -> Result<Vec<ComplexEigenenergy>> {
        Ok(match n {
            0 => vec![ComplexEigenenergy {
                n: 0,
                branch: 0,
                value: c(0.0, 0.0),
            }],
            1 => self.eps_manifold1(params).to_vec(),
            _ => self.eps_manifold(n, params)?.to_vec(),
        })
    }

    /// `λ_m^{i,j} = ε_m^{(i)} − (ε_{m−1}^{(j)})*`
    pub fn transition_eigenvalues(
        &self,
        m: usize,
        params: &SystemParams,
    ) -> Result<Vec<TransitionEnergy>> {
        if m == 0 {
            return Err(Error::InvalidManifold(0));
        }
        let upper = self.eps(m, params)?;
        let lower = self.eps(m - 1, params)?;
        Ok(pair_differences(m, &upper, &lower))
    }

    /// `δ_m^{i,j} = ε_m^{(i)} − (ε_m^{(j)})*`
    pub fn population_eigenvalues(
        &self,
        m: usize,
        params: &SystemParams,
    ) -> Result<Vec<TransitionEnergy>> {
        let e = self.eps(m, params)?;
        Ok(pair_differences(m, &e, &e))
    }
}

fn pair_differences(
    m: usize,
    upper: &[ComplexEigenenergy],
    lower: &[ComplexEigenenergy],
) -> Vec<TransitionEnergy> {
    upper
        .iter()
        .flat_map(|u| {
            lower.iter().map(move |l| TransitionEnergy {
                m,
                upper: *u,
                lower: *l,
                value: u.value - l.value.conj(),
            })
        })
        .collect()
}

/// One eigenvalue of a regression (`λ`) or population (`δ`) block with the
/// pair of eigenenergies it is built from.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransitionEnergy {
    pub m: usize,
    pub upper: ComplexEigenenergy,
    pub lower: ComplexEigenenergy,
    pub value: Complex64,
}

impl TransitionEnergy {
    pub fn involves_singlet(&self) -> bool {
        self.upper.is_singlet() || self.lower.is_singlet()
    }
}

/// `Γ_n = (n−1)γ_a + γ_σ`
pub fn gamma_n(n: usize, params: &SystemParams) -> f64 {
    (n as f64 - 1.0) * params.gamma_a + params.gamma_sigma
}

pub fn eps_manifold1(params: &SystemParams) -> [ComplexEigenenergy; 3] {
    ClosedForms::default().eps_manifold1(params)
}

pub fn complex_rabi(n: usize, params: &SystemParams) -> Complex64 {
    ClosedForms::default().complex_rabi(n, params)
}

pub fn discriminant(n: usize, params: &SystemParams) -> Result<Complex64> {
    ClosedForms::default().discriminant(n, params)
}

pub fn splitting_roots(n: usize, params: &SystemParams) -> Result<[Complex64; 3]> {
    ClosedForms::default().splitting_roots(n, params)
}

pub fn eps_manifold(n: usize, params: &SystemParams) -> Result<[ComplexEigenenergy; 4]> {
    ClosedForms::default().eps_manifold(n, params)
}

pub fn eps(n: usize, params: &SystemParams) -> Result<Vec<ComplexEigenenergy>> {
    ClosedForms::default().eps(n, params)
}

pub fn transition_eigenvalues(m: usize, params: &SystemParams) -> Result<Vec<TransitionEnergy>> {
    ClosedForms::default().transition_eigenvalues(m, params)
}

pub fn population_eigenvalues(m: usize, params: &SystemParams) -> Result<Vec<TransitionEnergy>> {
    ClosedForms::default().population_eigenvalues(m, params)
}

/// `max_k |Re ε_n^{(k)} − c_n|`, the largest distance of a level of
/// manifold `n` from the manifold centre `c_n` (`ω₀ − Δ/2` for `n = 1`,
/// `nω₀ − Δ` otherwise).
pub fn rabi_splitting(n: usize, params: &SystemParams) -> Result<f64> {
    let center = match n {
        0 => return Err(Error::InvalidManifold(0)),
        1 => params.omega0 - params.delta / 2.0,
        _ => n as f64 * params.omega0 - params.delta,
    };
    Ok(eps(n, params)?
        .iter()
        .map(|e| (e.value.re - center).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplittingReport {
    pub n: usize,
    pub rabi: Complex64,
    pub discriminant: Option<Complex64>,
    pub roots: [Complex64; 3],
    pub gamma_n: f64,
    pub strong_coupling: bool,
    /// `max_k |Re P^{(k)}|`
    pub splitting: f64,
}

pub fn splitting_report(n: usize, params: &SystemParams) -> Result<SplittingReport> {
    let roots = splitting_roots(n, params)?;
    let strong_coupling = if params.delta == 0.0 {
        sc_criterion(n, params)?.strong
    } else {
        roots.iter().any(|p| p.re.abs() > 1e-9 * params.g)
    };
    Ok(SplittingReport {
        n,
        rabi: complex_rabi(n, params),
        discriminant: discriminant(n, params).ok(),
        roots,
        gamma_n: gamma_n(n, params),
        strong_coupling,
        splitting: roots.iter().map(|p| p.re.abs()).fold(0.0, f64::max),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScVerdict {
    pub strong: bool,
    /// `R_n` is real and nonzero.
    pub rabi_real: bool,
    /// `|Im Q_n|` when `R_n` is imaginary (infinite at `R_n = 0`, NaN when
    /// `R_n` is real).
    pub im_q: f64,
    /// Parameters sit on `|Im Q_n| = 1` within rounding.
    pub on_boundary: bool,
}

/// Strong-coupling test for manifold `n` at zero detuning.
///
/// Strong coupling holds when `√(4n−2)·g > 2|γ₋|`, or otherwise when
/// `|Im Q_n| = 6√3|γ₋/g| / ((2γ₋/g)² − (4n−2))^{3/2} > 1`. For `n = 1` this
/// reduces to `√2·g > |γ₋|`. Points on the boundary are not strong.
pub fn sc_criterion(n: usize, params: &SystemParams) -> Result<ScVerdict> {
    if params.delta != 0.0 {
        return Err(Error::NonzeroDetuning(params.delta));
    }
    if n == 0 {
        return Err(Error::InvalidManifold(0));
    }
    let y = (params.gamma_minus() / params.g).abs();
    let excess = 4.0 * y * y - (4.0 * n as f64 - 2.0);
    if excess < 0.0 {
        return Ok(ScVerdict {
            strong: true,
            rabi_real: true,
            im_q: f64::NAN,
            on_boundary: false,
        });
    }
    let im_q = 6.0 * SQRT3 * y / excess.powf(1.5);
    let on_boundary = (im_q - 1.0).abs() <= 1e-12;
    Ok(ScVerdict {
        strong: im_q > 1.0 && !on_boundary,
        rabi_real: false,
        im_q,
        on_boundary,
    })
}

fn boundary_residual(y: f64, n: f64) -> f64 {
    6.0 * SQRT3 * y - (4.0 * y * y - (4.0 * n - 2.0)).max(0.0).powf(1.5)
}

/// Value of `|γ₋/g|` where `|Im Q_n| = 1`, for a real rung index `n ≥ 1/2`.
///
/// Bisection on `6√3·y − (4y² − (4n−2))^{3/2}`; the returned value is the
/// weak-coupling end of the final bracket.
pub fn sc_boundary_continuous(n: f64) -> f64 {
    let mut lo = (n - 0.5).max(0.0).sqrt();
    let mut hi = lo.max(1.0) * 2.0 + 10.0;
    while boundary_residual(hi, n) > 0.0 {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if boundary_residual(mid, n) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

pub fn sc_boundary(n: usize) -> f64 {
    sc_boundary_continuous(n as f64)
}

/// Rung index (as a real number) at which `|Im Q_n| = 1` for a given
/// `y = |γ₋/g|`: `n = (4y² − (6√3·y)^{2/3} + 2)/4`.
pub fn boundary_rung(y: f64) -> f64 {
    let y = y.abs();
    (4.0 * y * y - (6.0 * SQRT3 * y).powf(2.0 / 3.0) + 2.0) / 4.0
}

/// Second-order expansion of the splittings in `γ₋/g` at zero detuning.
///
/// Ordered like [`splitting_roots`]: upper branch, middle, lower branch.
pub fn perturbative_splitting(n: usize, params: &SystemParams) -> Result<[Complex64; 3]> {
    if params.delta != 0.0 {
        return Err(Error::NonzeroDetuning(params.delta));
    }
    if n < 2 {
        return Err(Error::InvalidManifold(n));
    }
    let g = params.g;
    let gm = params.gamma_minus();
    let nf = n as f64;
    let lead = g * (4.0 * nf - 2.0).sqrt();
    let width = gm / (2.0 * nf - 1.0);
    let curvature = (16.0 * nf * (nf - 1.0) + 1.0)
        / (2f64.powf(1.5) * (2.0 * nf - 1.0).powf(2.5))
        * g
        * (gm / g).powi(2);
    Ok([
        c(lead - curvature, -width),
        c(0.0, 2.0 * width),
        c(-lead + curvature, -width),
    ])
}

/// Single-emitter reference: `R_n = √(n·g² − γ₋²)` and `√n·g > |γ₋|`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JcReference {
    pub n: usize,
    pub rabi: Complex64,
    pub strong_coupling: bool,
}

pub fn jc_reference(n: usize, params: &SystemParams) -> Result<JcReference> {
    if n == 0 {
        return Err(Error::InvalidManifold(0));
    }
    let gm = params.gamma_minus();
    let rabi = c(n as f64 * params.g * params.g - gm * gm, 0.0).sqrt();
    Ok(JcReference {
        n,
        rabi,
        strong_coupling: (n as f64).sqrt() * params.g > gm.abs(),
    })
}
