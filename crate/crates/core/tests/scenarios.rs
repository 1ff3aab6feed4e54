use std::f64::consts::SQRT_2;

use tcladder::eigenanalysis::{eps, population_eigenvalues, sc_boundary, transition_eigenvalues};
use tcladder::linalg::match_multisets;
use tcladder::spectrum::{peak_table, physical_spectrum, EmissionOperator, KernelSign, SpectrumOptions};
use tcladder::{BasisState, DensityMatrix, DickeLabel, System, SystemParams};

#[test]
fn block_dimensions_and_spectra() {
    let p = SystemParams::new(6.0, 0.5, 1.0, 1.3, 0.4).unwrap();
    let sys = System::new(p, 3).unwrap();
    for (m, dim) in [(1, 3), (2, 12), (3, 16)] {
        let b = sys.regression_block(m).unwrap();
        assert_eq!(b.operators.len(), dim);
        let want: Vec<_> = transition_eigenvalues(m, &p).unwrap().iter().map(|t| t.value).collect();
        assert!(match_multisets(&b.energies(), &want).0 < 1e-9);
    }
    for m in 0..=3 {
        let b = sys.population_block(m).unwrap();
        let want: Vec<_> = population_eigenvalues(m, &p).unwrap().iter().map(|t| t.value).collect();
        assert!(match_multisets(&b.energies(), &want).0 < 1e-9);
    }
}

#[test]
fn truncated_blocks_are_rejected() {
    let sys = System::new(SystemParams::resonant(2.0, 1.0, 0.1, 0.1).unwrap(), 2).unwrap();
    assert!(sys.regression_block(3).is_err());
    assert!(sys.population_block(3).is_err());
}

#[test]
fn cutoff_must_cover_initial_state() {
    let sys = System::new(SystemParams::resonant(2.0, 1.0, 0.1, 0.1).unwrap(), 1).unwrap();
    let rho = DensityMatrix::pure_state(sys.basis(), BasisState::new(0, DickeLabel::TPlus)).unwrap();
    assert!(matches!(sys.evolve(&rho, &[0.0, 1.0]), Err(tcladder::Error::CutoffTooSmall { .. })));
}

#[test]
fn n2_boundary_merges_all_positions() {
    let b = sc_boundary(2);
    let p = SystemParams::resonant(3.0, 1.0, 4.0 * (b + 1e-9), 0.0).unwrap();
    for e in eps(2, &p).unwrap() {
        assert!((e.value.re - 6.0).abs() < 1e-9);
    }
    let p = SystemParams::resonant(3.0, 1.0, 4.0 * (b - 1e-3), 0.0).unwrap();
    assert!(eps(2, &p).unwrap().iter().any(|e| (e.value.re - 6.0).abs() > 1e-4));
}

#[test]
fn symmetric_state_spectrum_has_vacuum_rabi_doublet() {
    let p = SystemParams::resonant(10.0, 1.0, 0.05, 0.05).unwrap();
    let sys = System::new(p, 1).unwrap();
    let rho = DensityMatrix::pure_state(sys.basis(), BasisState::new(0, DickeLabel::TZero)).unwrap();
    let grid: Vec<f64> = (0..=600).map(|i| 7.0 + i as f64 * 0.01).collect();
    for kernel in [KernelSign::Verbatim, KernelSign::Decaying] {
        let opts = SpectrumOptions { kernel, ..SpectrumOptions::default() };
        let s = physical_spectrum(&p, 1, EmissionOperator::Cavity, &rho, 0.05, 400.0, &grid, &opts).unwrap();
        let (left, right) = grid.iter().zip(&s.values).fold(((0.0, 0.0), (0.0, 0.0)), |(l, r), (&w, &v)| {
            if w < 10.0 && v > l.1 {
                ((w, v), r)
            } else if w > 10.0 && v > r.1 {
                (l, (w, v))
            } else {
                (l, r)
            }
        });
        assert!((left.0 - (10.0 - SQRT_2)).abs() <= 0.01, "{kernel:?} {left:?}");
        assert!((right.0 - (10.0 + SQRT_2)).abs() <= 0.01, "{kernel:?} {right:?}");
    }
}

#[test]
fn emitter_operators_see_the_same_lines() {
    let p = SystemParams::resonant(5.0, 1.0, 0.1, 0.1).unwrap();
    let sys = System::new(p, 1).unwrap();
    let rho = DensityMatrix::pure_state(sys.basis(), BasisState::new(1, DickeLabel::TMinus)).unwrap();
    let grid: Vec<f64> = (0..=400).map(|i| 3.0 + i as f64 * 0.01).collect();
    let opts = SpectrumOptions { kernel: KernelSign::Decaying, ..SpectrumOptions::default() };
    let table = peak_table(&p, 1).unwrap();
    for op in [EmissionOperator::Emitter1, EmissionOperator::Emitter2] {
        let s = physical_spectrum(&p, 1, op, &rho, 0.05, 60.0, &grid, &opts).unwrap();
        let peaks = s.peaks(0.02);
        assert!(!peaks.is_empty());
        for w in peaks {
            assert!(table.nearest_distance(w) <= 0.01, "{op:?} {w}");
        }
    }
}
