//! Tavis–Cummings Hamiltonian and its resonant dressed ladder.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigen, CMatrix, CVector};
use crate::params::SystemParams;
use crate::space::{bare_operators, BasisState, DickeLabel, TruncatedBasis};

/// `H = ω₀a†a + Σᵢ[(ω₀−Δ)σᵢ†σᵢ + g(σᵢ†a + a†σᵢ)]`
pub fn build_hamiltonian(params: &SystemParams, basis: &TruncatedBasis) -> CMatrix {
    let ops = bare_operators(basis);
    let w = |x: f64| Complex64::from(x);
    let ad = ops.a.adjoint();
    let mut h = &ad * &ops.a * w(params.omega0);
    for s in [&ops.sigma1, &ops.sigma2] {
        let sd = s.adjoint();
        h += &sd * s * w(params.emitter_frequency());
        h += (&sd * &ops.a + &ad * s) * w(params.g);
    }
    h
}

/// Restriction of `m` to the rows and columns of manifold `n`.
pub fn manifold_block(m: &CMatrix, basis: &TruncatedBasis, n: usize) -> Result<CMatrix> {
    let r = basis.manifold_range(n)?;
    Ok(m.view((r.start, r.start), (r.len(), r.len())).into_owned())
}

/// One eigenstate of the Hamiltonian inside manifold `n`.
///
/// Branch numbering: 2 and 3 are the upper/lower split triplet states, 1 is
/// the unshifted triplet state and 4 the singlet `|n−1,S⟩`. The vacuum is
/// reported as manifold 0, branch 0. `state` is expressed over the states of
/// the manifold in basis order.
#[derive(Debug, Clone, PartialEq)]
pub struct DressedLevel {
    pub manifold: usize,
    pub branch: u8,
    pub energy: f64,
    pub state: CVector,
}

impl DressedLevel {
    pub fn vacuum() -> Self {
        Self {
            manifold: 0,
            branch: 0,
            energy: 0.0,
            state: CVector::from_element(1, Complex64::new(1.0, 0.0)),
        }
    }
}

fn require_resonant(params: &SystemParams) -> Result<()> {
    if params.delta != 0.0 {
        return Err(Error::NonzeroDetuning(params.delta));
    }
    Ok(())
}

/// Closed-form dressed levels of manifold `n ≥ 1` at zero detuning.
///
/// Three levels are returned for `n = 1` (branches 2, 3, 4) and four for
/// larger `n`, in branch order.
pub fn dressed_levels_analytic(n: usize, params: &SystemParams) -> Result<Vec<DressedLevel>> {
    require_resonant(params)?;
    if n == 0 {
        return Err(Error::InvalidManifold(0));
    }
    let basis = crate::space::build_basis(n);
    let states = basis.manifold(n)?;
    let pos = |photons: usize, label| {
        states
            .iter()
            .position(|s| *s == BasisState::new(photons, label))
    };
    let nf = n as f64;
    let center = nf * params.omega0;
    let split = params.g * (4.0 * nf - 2.0).sqrt();
    let dim = states.len();
    let vec_from = |entries: &[(Option<usize>, f64)]| {
        let mut v = CVector::zeros(dim);
        for (i, c) in entries {
            if let Some(i) = i {
                v[*i] = Complex64::from(*c);
            }
        }
        v
    };

    let lo_t1 = if n >= 2 { pos(n - 2, DickeLabel::TPlus) } else { None };
    let mut levels = Vec::with_capacity(4);
    if n >= 2 {
        levels.push(DressedLevel {
            manifold: n,
            branch: 1,
            energy: center,
            state: vec_from(&[
                (lo_t1, (nf / (2.0 * nf - 1.0)).sqrt()),
                (pos(n, DickeLabel::TMinus), -((nf - 1.0) / (2.0 * nf - 1.0)).sqrt()),
            ]),
        });
    }
    for (branch, sign) in [(2u8, 1.0), (3u8, -1.0)] {
        levels.push(DressedLevel {
            manifold: n,
            branch,
            energy: center + sign * split,
            state: vec_from(&[
                (pos(n, DickeLabel::TMinus), (nf / (4.0 * nf - 2.0)).sqrt()),
                (pos(n - 1, DickeLabel::TZero), sign * std::f64::consts::FRAC_1_SQRT_2),
                (lo_t1, ((nf - 1.0) / (4.0 * nf - 2.0)).sqrt()),
            ]),
        });
    }
    levels.push(DressedLevel {
        manifold: n,
        branch: 4,
        energy: center,
        state: vec_from(&[(pos(n - 1, DickeLabel::Singlet), 1.0)]),
    });
    Ok(levels)
}

/// Numerical dressed levels of a complete manifold, labelled like
/// [`dressed_levels_analytic`].
///
/// Degenerate eigenvalues are split by the singlet/triplet sector rather
/// than by energy: the level with the largest singlet weight is branch 4.
pub fn dressed_levels_numeric(
    params: &SystemParams,
    basis: &TruncatedBasis,
    n: usize,
) -> Result<Vec<DressedLevel>> {
    basis.require_complete(n)?;
    let h = manifold_block(&build_hamiltonian(params, basis), basis, n)?;
    if n == 0 {
        return Ok(vec![DressedLevel {
            energy: h[(0, 0)].re,
            ..DressedLevel::vacuum()
        }]);
    }
    let states = basis.manifold(n)?;
    let singlet = states
        .iter()
        .position(|s| s.matter == DickeLabel::Singlet)
        .expect("complete manifold n >= 1 holds a singlet");
    // Within the Hamiltonian the singlet is exactly decoupled, so diagonalise
    // the triplet sector on its own and read the singlet off the diagonal.
    let triplet: Vec<usize> = (0..states.len()).filter(|&i| i != singlet).collect();
    let ht = CMatrix::from_fn(triplet.len(), triplet.len(), |r, c| h[(triplet[r], triplet[c])]);
    let (values, vectors) = hermitian_eigen(&ht);

    let embed = |col: usize| {
        let mut v = CVector::zeros(states.len());
        for (k, &i) in triplet.iter().enumerate() {
            v[i] = vectors[(k, col)];
        }
        v
    };
    // ascending energies: lowest is branch 3, highest branch 2, middle branch 1
    let branches: &[u8] = if triplet.len() == 3 { &[3, 1, 2] } else { &[3, 2] };
    let mut levels: Vec<DressedLevel> = branches
        .iter()
        .enumerate()
        .map(|(col, &branch)| DressedLevel {
            manifold: n,
            branch,
            energy: values[col],
            state: embed(col),
        })
        .collect();
    let mut s = CVector::zeros(states.len());
    s[singlet] = Complex64::new(1.0, 0.0);
    levels.push(DressedLevel {
        manifold: n,
        branch: 4,
        energy: h[(singlet, singlet)].re,
        state: s,
    });
    levels.sort_by_key(|l| l.branch);
    Ok(levels)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HamiltonianTransition {
    pub upper_branch: u8,
    pub lower_branch: u8,
    pub frequency: f64,
}

/// Bare-Hamiltonian emission lines `ω_n^{(i)} − ω_{n−1}^{(j)}` at resonance.
pub fn hamiltonian_transition_frequencies(
    n: usize,
    params: &SystemParams,
) -> Result<Vec<HamiltonianTransition>> {
    let upper = dressed_levels_analytic(n, params)?;
    let lower = if n == 1 {
        vec![DressedLevel::vacuum()]
    } else {
        dressed_levels_analytic(n - 1, params)?
    };
    Ok(upper
        .iter()
        .flat_map(|u| {
            lower.iter().map(move |l| HamiltonianTransition {
                upper_branch: u.branch,
                lower_branch: l.branch,
                frequency: u.energy - l.energy,
            })
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, max_abs};
    use crate::space::{bare_operators, build_basis};

    fn params(g: f64) -> SystemParams {
        SystemParams::new(5.0, 0.0, g, 0.0, 0.0).unwrap()
    }

    fn block_eigs(p: &SystemParams, cutoff: usize, n: usize) -> Vec<f64> {
        let b = build_basis(cutoff);
        let h = manifold_block(&build_hamiltonian(p, &b), &b, n).unwrap();
        hermitian_eigen(&h).0
    }

    #[test]
    fn decoupled_is_diagonal() {
        let p = SystemParams::new(5.0, 0.7, 1e-300, 0.0, 0.0).unwrap();
        let b = build_basis(3);
        let h = build_hamiltonian(&p.with_omega0(5.0), &b);
        for (i, s) in b.states().iter().enumerate() {
            let expected = s.photons as f64 * 5.0 + s.matter.excitations() as f64 * (5.0 - 0.7);
            assert!((h[(i, i)].re - expected).abs() < 1e-12);
            for j in 0..b.dim() {
                if j != i {
                    assert!(h[(i, j)].norm() < 1e-250);
                }
            }
        }
    }

    #[test]
    fn detuned_diagonal_shifts() {
        let p = SystemParams::new(5.0, 0.4, 1.0, 0.0, 0.0).unwrap();
        let b = build_basis(3);
        let h = manifold_block(&build_hamiltonian(&p, &b), &b, 3).unwrap();
        let states = b.manifold(3).unwrap();
        for (i, s) in states.iter().enumerate() {
            let shift = 0.4 * s.matter.excitations() as f64;
            assert!((h[(i, i)].re - (15.0 - shift)).abs() < 1e-12);
        }
    }

    #[test]
    fn resonant_block_spectra() {
        let p = params(1.0);
        let e1 = block_eigs(&p, 2, 1);
        let want1 = [5.0 - 2f64.sqrt(), 5.0, 5.0 + 2f64.sqrt()];
        for (a, b) in e1.iter().zip(want1) {
            assert!((a - b).abs() < 1e-12);
        }
        let e2 = block_eigs(&p, 2, 2);
        let want2 = [10.0 - 6f64.sqrt(), 10.0, 10.0, 10.0 + 6f64.sqrt()];
        for (a, b) in e2.iter().zip(want2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn hamiltonian_is_hermitian_and_conserves_excitations() {
        let p = SystemParams::new(3.0, -0.3, 0.8, 0.0, 0.0).unwrap();
        let b = build_basis(4);
        let h = build_hamiltonian(&p, &b);
        assert!(max_abs(&(h.adjoint() - &h)) < 1e-15);
        let ops = bare_operators(&b);
        assert!(max_abs(&commutator(&h, &ops.number)) < 1e-14);
    }

    #[test]
    fn analytic_states_n1_and_n2() {
        let p = params(1.0);
        let l1 = dressed_levels_analytic(1, &p).unwrap();
        assert_eq!(l1.len(), 3);
        assert_eq!(l1.iter().map(|l| l.branch).collect::<Vec<_>>(), vec![2, 3, 4]);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // Λ₁ order: |1,T-1⟩, |0,T0⟩, |0,S⟩
        assert!((l1[0].state[0].re - r).abs() < 1e-15 && (l1[0].state[1].re - r).abs() < 1e-15);
        assert!((l1[1].state[1].re + r).abs() < 1e-15);
        assert_eq!(l1[2].state[2].re, 1.0);
        assert!((l1[0].energy - (5.0 + 2f64.sqrt())).abs() < 1e-14);

        let l2 = dressed_levels_analytic(2, &p).unwrap();
        // Λ₂ order: |2,T-1⟩, |1,T0⟩, |1,S⟩, |0,T1⟩
        let b1 = &l2[0].state;
        assert!((b1[3].re - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
        assert!((b1[0].re + (1.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn analytic_states_orthonormal_eigenvectors() {
        let p = params(0.7);
        for n in 1..=6 {
            let b = build_basis(n);
            let h = manifold_block(&build_hamiltonian(&p, &b), &b, n).unwrap();
            let levels = dressed_levels_analytic(n, &p).unwrap();
            for (i, li) in levels.iter().enumerate() {
                assert!((li.state.norm() - 1.0).abs() < 1e-14);
                let resid = &h * &li.state - &li.state * Complex64::from(li.energy);
                assert!(resid.norm() < 1e-12, "n={n} branch {}", li.branch);
                for lj in &levels[i + 1..] {
                    assert!(li.state.dotc(&lj.state).norm() < 1e-14);
                }
            }
        }
    }

    #[test]
    fn analytic_rejects_bad_input() {
        assert!(matches!(
            dressed_levels_analytic(0, &params(1.0)),
            Err(Error::InvalidManifold(0))
        ));
        let detuned = params(1.0).with_delta(0.1);
        assert!(matches!(
            dressed_levels_analytic(2, &detuned),
            Err(Error::NonzeroDetuning(_))
        ));
    }

    #[test]
    fn numeric_levels_match_analytic_up_to_phase() {
        let p = params(1.3);
        let b = build_basis(6);
        for n in 1..=6 {
            let num = dressed_levels_numeric(&p, &b, n).unwrap();
            let ana = dressed_levels_analytic(n, &p).unwrap();
            assert_eq!(num.len(), ana.len());
            for (x, y) in num.iter().zip(&ana) {
                assert_eq!(x.branch, y.branch);
                assert!((x.energy - y.energy).abs() < 1e-10 * (5.0 * n as f64));
                let overlap = x.state.dotc(&y.state).norm();
                assert!((overlap - 1.0).abs() < 1e-10, "n={n} branch {}", x.branch);
            }
        }
    }

    #[test]
    fn transition_lines() {
        let p = params(1.0);
        let t1 = hamiltonian_transition_frequencies(1, &p).unwrap();
        let mut f1: Vec<f64> = t1.iter().map(|t| t.frequency).collect();
        f1.sort_by(f64::total_cmp);
        assert_eq!(f1.len(), 3);
        assert!((f1[0] - (5.0 - 2f64.sqrt())).abs() < 1e-14);
        assert!((f1[1] - 5.0).abs() < 1e-14);

        let t2 = hamiltonian_transition_frequencies(2, &p).unwrap();
        assert_eq!(t2.len(), 12);
        // brute-force enumeration of the symbolic values a·√6 + b·√2 + 5
        let mut symbolic: Vec<(i32, i32)> = Vec::new();
        for u in [1, 0, -1, 0] {
            for l in [1, -1, 0] {
                let key = (u, -l);
                if !symbolic.contains(&key) {
                    symbolic.push(key);
                }
            }
        }
        let mut numeric: Vec<f64> = t2.iter().map(|t| t.frequency).collect();
        numeric.sort_by(f64::total_cmp);
        numeric.dedup_by(|a, b| (*a - *b).abs() < 1e-9);
        assert_eq!(symbolic.len(), 9);
        assert_eq!(numeric.len(), symbolic.len());
    }

    #[test]
    fn decoupled_lines_collapse() {
        let p = params(1e-12);
        for n in 1..=4 {
            for t in hamiltonian_transition_frequencies(n, &p).unwrap() {
                assert!((t.frequency - 5.0).abs() < 1e-10);
            }
        }
    }
}
