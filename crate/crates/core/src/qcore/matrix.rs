use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Dense complex matrix, row/column indexed from zero.
pub type ComplexMatrix = DMatrix<C64>;
/// Dense complex column vector.
pub type ComplexVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

pub fn identity(n: usize) -> ComplexMatrix {
    ComplexMatrix::identity(n, n)
}

pub fn zeros(n: usize) -> ComplexMatrix {
    ComplexMatrix::zeros(n, n)
}

/// Builds a matrix from row-major entries.
pub fn from_rows(n_rows: usize, n_cols: usize, entries: &[C64]) -> ComplexMatrix {
    ComplexMatrix::from_row_slice(n_rows, n_cols, entries)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

pub fn pauli(which: Pauli) -> ComplexMatrix {
    let (o, l) = (re(0.0), re(1.0));
    match which {
        Pauli::I => identity(2),
        Pauli::X => from_rows(2, 2, &[o, l, l, o]),
        Pauli::Y => from_rows(2, 2, &[o, -I, I, o]),
        Pauli::Z => from_rows(2, 2, &[l, o, o, -l]),
    }
}

pub fn sigma_x() -> ComplexMatrix {
    pauli(Pauli::X)
}

pub fn sigma_y() -> ComplexMatrix {
    pauli(Pauli::Y)
}

pub fn sigma_z() -> ComplexMatrix {
    pauli(Pauli::Z)
}

/// `σ_− = σ_x − iσ_y = [[0, 0], [2, 0]]`.
///
/// Basis order is `|e⟩ = [1, 0]`, `|g⟩ = [0, 1]`, so `σ_−|e⟩ = 2|g⟩`. This
/// normalization (no factor ½) is the one under which the single-atom
/// feedback manifold and the two-qubit measurement operator take their
/// standard closed forms.
pub fn sigma_minus() -> ComplexMatrix {
    sigma_x() - sigma_y() * I
}

/// `σ_+ = σ_−†`.
pub fn sigma_plus() -> ComplexMatrix {
    dagger(&sigma_minus())
}

/// Unit lowering operator `|g⟩⟨e| = σ_−/2`.
pub fn lowering() -> ComplexMatrix {
    from_rows(2, 2, &[re(0.0), re(0.0), re(1.0), re(0.0)])
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a.kronecker(b)
}

pub fn dagger(m: &ComplexMatrix) -> ComplexMatrix {
    m.adjoint()
}

/// `AB − BA`.
pub fn comm(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b - b * a
}

/// `AB + BA`.
pub fn anticomm(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    a * b + b * a
}

/// Frobenius norm.
pub fn norm(m: &ComplexMatrix) -> f64 {
    m.norm()
}

pub fn trace(m: &ComplexMatrix) -> C64 {
    m.trace()
}

/// `(M + M†)/2`.
pub fn hermitize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// `‖M − M†‖_F`.
pub fn hermiticity_defect(m: &ComplexMatrix) -> f64 {
    (m - m.adjoint()).norm()
}

pub fn is_finite(m: &ComplexMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

pub fn ensure_square(m: &ComplexMatrix, what: &str) -> Result<usize> {
    if m.nrows() != m.ncols() {
        return Err(Error::Dimension(format!(
            "{what} must be square, got {}x{}",
            m.nrows(),
            m.ncols()
        )));
    }
    if !is_finite(m) {
        return Err(Error::Validation(format!("{what} has non-finite entries")));
    }
    Ok(m.nrows())
}

/// Fails unless `m` is Hermitian to `tol·max(1, ‖m‖)`.
pub fn ensure_hermitian(m: &ComplexMatrix, tol: f64, what: &str) -> Result<()> {
    let defect = hermiticity_defect(m);
    if defect > tol * m.norm().max(1.0) {
        return Err(Error::Validation(format!(
            "{what} is not Hermitian (‖M−M†‖ = {defect:.3e})"
        )));
    }
    Ok(())
}

/// `|v⟩⟨v|`.
pub fn outer(v: &ComplexVector) -> ComplexMatrix {
    v * v.adjoint()
}

/// `⟨v|M|v⟩` for a normalized `v`.
pub fn expectation(m: &ComplexMatrix, v: &ComplexVector) -> C64 {
    v.dotc(&(m * v))
}

/// Entrywise largest modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Extracts the block `rows × cols` starting at `(r0, c0)`.
pub fn block(m: &ComplexMatrix, r0: usize, c0: usize, rows: usize, cols: usize) -> ComplexMatrix {
    m.view((r0, c0), (rows, cols)).into_owned()
}
