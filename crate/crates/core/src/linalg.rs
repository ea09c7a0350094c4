//! Small complex linear-algebra helpers shared by the signal model and the
//! estimator. Dense `nalgebra` matrices throughout.

use nalgebra::{DMatrix, DVector, Dim, Matrix, RawStorage, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub const J: Complex64 = Complex64::new(0.0, 1.0);

/// `exp(j * theta)`.
#[inline]
pub fn cis(theta: f64) -> Complex64 {
    Complex64::from_polar(1.0, theta)
}

/// Largest entry magnitude.
pub fn max_abs<R: Dim, C: Dim, S: RawStorage<Complex64, R, C>>(m: &Matrix<Complex64, R, C, S>) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise magnitude of `m - m^H`.
pub fn hermitian_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for r in 0..n {
        for c in r..n {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `(m + m^H) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// `I_n ⊗ block`.
pub fn kron_identity(n: usize, block: &CMatrix) -> CMatrix {
    let (r, c) = block.shape();
    let mut out = CMatrix::zeros(n * r, n * c);
    for k in 0..n {
        out.view_mut((k * r, k * c), (r, c)).copy_from(block);
    }
    out
}

/// Eigenpairs of a Hermitian matrix, eigenvalues ascending.
///
/// Input is assumed Hermitian; only the lower triangle is read by the
/// underlying solver.
pub fn hermitian_eigen_ascending(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let eig = SymmetricEigen::new(m.clone());
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]).then(a.cmp(&b)));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// Orthogonal projection of `v` onto the column span of `basis`, which must
/// have orthonormal columns.
pub fn project_onto(basis: &CMatrix, v: &CVector) -> CVector {
    basis * (basis.adjoint() * v)
}

pub fn to_vector(v: &[Complex64]) -> CVector {
    DVector::from_column_slice(v)
}
