//! Dense complex linear algebra helpers shared by the physics modules.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const I: Complex64 = Complex64::new(0.0, 1.0);

pub fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// `max |ρ − ρ†|`
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    max_abs(&(m - m.adjoint()))
}

/// Eigenvalues of a general complex matrix from its Schur form.
pub fn eigenvalues(m: &CMatrix) -> Vec<Complex64> {
    assert!(m.is_square(), "eigenvalues of a non-square matrix");
    if m.nrows() == 0 {
        return Vec::new();
    }
    let t = nalgebra::linalg::Schur::new(m.clone()).unpack().1;
    (0..t.nrows()).map(|i| t[(i, i)]).collect()
}

/// Eigen-decomposition of a Hermitian matrix; eigenvalues ascending.
pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let herm = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    let eig = nalgebra::linalg::SymmetricEigen::new(herm);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(m.nrows(), order.len(), |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

pub fn min_hermitian_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigen(m).0.first().copied().unwrap_or(0.0)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// Complex product through four real products, which use the blocked
/// real kernel; faster than the generic complex loop for large operands.
pub fn matmul(a: &CMatrix, b: &CMatrix) -> CMatrix {
    if a.nrows() * a.ncols() * b.ncols() < 32 * 32 * 32 {
        return a * b;
    }
    let (ar, ai) = (a.map(|z| z.re), a.map(|z| z.im));
    let (br, bi) = (b.map(|z| z.re), b.map(|z| z.im));
    let re = &ar * &br - &ai * &bi;
    let im = &ar * &bi + &ai * &br;
    re.zip_map(&im, Complex64::new)
}

/// Matrix exponential by scaling and squaring with a degree-13 Padé
/// approximant.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm of a non-square matrix");
    let n = a.nrows();
    if n == 0 {
        return a.clone();
    }
    const THETA13: f64 = 5.371920351148152;
    let norm1 = (0..n)
        .map(|j| a.column(j).iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let s = if norm1 > THETA13 {
        (norm1 / THETA13).log2().ceil() as i32
    } else {
        0
    };
    let scaled = a * Complex64::from(0.5f64.powi(s));
    let b = |k: usize| Complex64::from(PADE13[k]);

    let id = CMatrix::identity(n, n);
    let a2 = matmul(&scaled, &scaled);
    let a4 = matmul(&a2, &a2);
    let a6 = matmul(&a4, &a2);

    let u_inner = matmul(&a6, &(&a6 * b(13) + &a4 * b(11) + &a2 * b(9)))
        + &a6 * b(7)
        + &a4 * b(5)
        + &a2 * b(3)
        + &id * b(1);
    let u = matmul(&scaled, &u_inner);
    let v = matmul(&a6, &(&a6 * b(12) + &a4 * b(10) + &a2 * b(8)))
        + &a6 * b(6)
        + &a4 * b(4)
        + &a2 * b(2)
        + &id * b(0);

    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.lu().solve(&p).expect("Padé denominator is singular");
    for _ in 0..s {
        r = matmul(&r, &r);
    }
    r
}

/// Optimal assignment between two equally sized complex multisets.
///
/// Minimises the summed distance with the Hungarian algorithm and returns
/// the largest pairwise distance of that assignment, plus the permutation
/// (`perm[i]` is the index in `b` matched to `a[i]`).
pub fn match_multisets(a: &[Complex64], b: &[Complex64]) -> (f64, Vec<usize>) {
    assert_eq!(a.len(), b.len(), "multisets differ in size");
    let n = a.len();
    if n == 0 {
        return (0.0, Vec::new());
    }
    let cost: Vec<Vec<f64>> = a
        .iter()
        .map(|x| b.iter().map(|y| (x - y).norm()).collect())
        .collect();
    let perm = hungarian(&cost);
    let worst = perm
        .iter()
        .enumerate()
        .map(|(i, &j)| cost[i][j])
        .fold(0.0, f64::max);
    (worst, perm)
}

/// Kuhn–Munkres with potentials, O(n³). Row `i` is assigned column `result[i]`.
fn hungarian(cost: &[Vec<f64>]) -> Vec<usize> {
    let n = cost.len();
    let inf = f64::INFINITY;
    let mut u = vec![0.0; n + 1];
    let mut v = vec![0.0; n + 1];
    // p[j]: row matched to column j (1-based, 0 = none)
    let mut p = vec![0usize; n + 1];
    let mut way = vec![0usize; n + 1];
    for i in 1..=n {
        p[0] = i;
        let mut j0 = 0usize;
        let mut minv = vec![inf; n + 1];
        let mut used = vec![false; n + 1];
        loop {
            used[j0] = true;
            let i0 = p[j0];
            let mut delta = inf;
            let mut j1 = 0usize;
            for j in 1..=n {
                if used[j] {
                    continue;
                }
                let cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
                if cur < minv[j] {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if minv[j] < delta {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for j in 0..=n {
                if used[j] {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if p[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }
    let mut result = vec![0usize; n];
    for j in 1..=n {
        if p[j] > 0 {
            result[p[j] - 1] = j - 1;
        }
    }
    result
}

/// Each element of `needles` has a partner in `haystack` within `tol`.
pub fn contained_in(needles: &[Complex64], haystack: &[Complex64], tol: f64) -> bool {
    needles
        .iter()
        .all(|x| haystack.iter().any(|y| (x - y).norm() <= tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expm_of_diagonal_and_nilpotent() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c64(1.0, 2.0), c64(-3.0, 0.5)]));
        let e = expm(&d);
        assert!((e[(0, 0)] - c64(1.0, 2.0).exp()).norm() < 1e-13);
        assert!((e[(1, 1)] - c64(-3.0, 0.5).exp()).norm() < 1e-13);

        let mut n = CMatrix::zeros(3, 3);
        n[(0, 1)] = c64(1.0, 0.0);
        n[(1, 2)] = c64(1.0, 0.0);
        let e = expm(&n);
        assert!((e[(0, 2)] - c64(0.5, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn expm_rotation_with_large_norm() {
        // exp(-i θ σx) for θ = 40 exercises the squaring phase
        let theta = 40.0;
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c64(0.0, -theta);
        m[(1, 0)] = c64(0.0, -theta);
        let e = expm(&m);
        assert!((e[(0, 0)] - c64(theta.cos(), 0.0)).norm() < 1e-11);
        assert!((e[(0, 1)] - c64(0.0, -theta.sin())).norm() < 1e-11);
    }

    #[test]
    fn eigenvalues_of_triangular() {
        let mut m = CMatrix::zeros(3, 3);
        m[(0, 0)] = c64(1.0, 1.0);
        m[(1, 1)] = c64(2.0, 0.0);
        m[(2, 2)] = c64(0.0, -1.0);
        m[(0, 2)] = c64(5.0, 0.0);
        let ev = eigenvalues(&m);
        let (err, _) = match_multisets(&ev, &[c64(2.0, 0.0), c64(0.0, -1.0), c64(1.0, 1.0)]);
        assert!(err < 1e-13);
    }

    #[test]
    fn hungarian_beats_greedy() {
        // greedy would take 0<->0 (cost 1) and be left with 1<->1 (cost 10)
        let a = [c64(0.0, 0.0), c64(1.5, 0.0)];
        let b = [c64(1.0, 0.0), c64(-0.5, 0.0)];
        let (worst, perm) = match_multisets(&a, &b);
        assert_eq!(perm, vec![1, 0]);
        assert!((worst - 0.5).abs() < 1e-15);
    }

    #[test]
    fn hermitian_min_eigen() {
        let mut m = CMatrix::zeros(2, 2);
        m[(0, 1)] = c64(0.0, 1.0);
        m[(1, 0)] = c64(0.0, -1.0);
        assert!((min_hermitian_eigenvalue(&m) + 1.0).abs() < 1e-14);
    }
}
