//! Small dense complex linear algebra shared by every module.
//!
//! Operators are `nalgebra::DMatrix<Complex64>`; the Hilbert spaces in this
//! crate never exceed four levels so dense storage is always adequate.
//! Density matrices are vectorized column-stacked, so `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.

use nalgebra::{DMatrix, DVector, Matrix2};
use num_complex::Complex64;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn sigma_x() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, ONE, ONE, ZERO])
}

pub fn sigma_y() -> CMat {
    CMat::from_row_slice(2, 2, &[ZERO, -I, I, ZERO])
}

pub fn sigma_z() -> CMat {
    CMat::from_row_slice(2, 2, &[ONE, ZERO, ZERO, -ONE])
}

/// `exp(-i (a·σ))` for a real 3-vector `a`, evaluated in closed form.
pub fn su2_exp(a: [f64; 3]) -> Matrix2<C64> {
    let norm = (a[0] * a[0] + a[1] * a[1] + a[2] * a[2]).sqrt();
    let (cs, sn_over) = if norm < 1e-300 {
        (1.0, 1.0)
    } else {
        (norm.cos(), norm.sin() / norm)
    };
    let (x, y, z) = (a[0] * sn_over, a[1] * sn_over, a[2] * sn_over);
    // cos|a| I - i sin|a| (â·σ)
    Matrix2::new(c(cs, -z), c(-y, -x), c(y, -x), c(cs, z))
}

pub fn mat2_to_dyn(m: &Matrix2<C64>) -> CMat {
    CMat::from_fn(2, 2, |i, j| m[(i, j)])
}

pub fn dyn_to_mat2(m: &CMat) -> Matrix2<C64> {
    Matrix2::from_fn(|i, j| m[(i, j)])
}

/// Rotation by `angle` about the equatorial axis at azimuth `phase`:
/// `exp(-i angle/2 (cos φ σx + sin φ σy))`.
pub fn rotation(angle: f64, phase: f64) -> CMat {
    let h = angle / 2.0;
    mat2_to_dyn(&su2_exp([h * phase.cos(), h * phase.sin(), 0.0]))
}

/// `exp(-i θ/2 σz)`.
pub fn rz(theta: f64) -> CMat {
    mat2_to_dyn(&su2_exp([0.0, 0.0, theta / 2.0]))
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

/// Largest entry magnitude of `U†U - I`.
pub fn unitarity_defect(u: &CMat) -> f64 {
    let d = u.nrows();
    let e = u.adjoint() * u - identity(d);
    e.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn max_abs_diff(a: &CMat, b: &CMat) -> f64 {
    (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigenvalues (ascending) and eigenvectors of a Hermitian matrix.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = hermitian_part(m).symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let vals = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let vecs = CMat::from_fn(m.nrows(), m.ncols(), |i, j| eig.eigenvectors[(i, order[j])]);
    (vals, vecs)
}

/// Trace distance `½‖A − B‖₁` between Hermitian matrices.
pub fn trace_distance(a: &CMat, b: &CMat) -> f64 {
    let (vals, _) = eigh(&(a - b));
    0.5 * vals.iter().map(|v| v.abs()).sum::<f64>()
}

pub fn ket_to_dm(psi: &CVec) -> CMat {
    psi * psi.adjoint()
}

/// Column-stacked vectorization.
pub fn vectorize(m: &CMat) -> CVec {
    CVec::from_iterator(m.len(), m.iter().copied())
}

pub fn unvectorize(v: &CVec, d: usize) -> CMat {
    CMat::from_iterator(d, d, v.iter().copied())
}

/// Superoperator of `ρ ↦ U ρ U†`.
pub fn unitary_superop(u: &CMat) -> CMat {
    kron(&u.conjugate(), u)
}

/// Lindblad generator `L` with `d vec(ρ)/dt = L vec(ρ)`.
pub fn lindblad_generator(h: &CMat, collapse: &[CMat]) -> CMat {
    let d = h.nrows();
    let id = identity(d);
    let mut l = (kron(&id, h) - kron(&h.transpose(), &id)) * (-I);
    for op in collapse {
        let ldl = op.adjoint() * op;
        l += kron(&op.conjugate(), op);
        l -= (kron(&id, &ldl) + kron(&ldl.transpose(), &id)).scale(0.5);
    }
    l
}

/// Bloch vector `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a single-qubit density matrix.
pub fn bloch_of_dm(rho: &CMat) -> [f64; 3] {
    let r01 = rho[(0, 1)];
    [2.0 * r01.re, -2.0 * r01.im, (rho[(0, 0)] - rho[(1, 1)]).re]
}

pub fn bloch_of_ket(psi: &CVec) -> [f64; 3] {
    bloch_of_dm(&ket_to_dm(psi))
}

/// `|0⟩ cos χ/2 + e^{iξ} sin χ/2 |1⟩`.
pub fn ket_from_angles(chi: f64, xi: f64) -> CVec {
    CVec::from_vec(vec![
        c((chi / 2.0).cos(), 0.0),
        C64::from_polar((chi / 2.0).sin(), xi),
    ])
}

pub fn basis_ket(d: usize, k: usize) -> CVec {
    let mut v = CVec::zeros(d);
    v[k] = ONE;
    v
}

/// Phase-insensitive overlap `|Tr(A†B)| / d`.
pub fn phase_free_overlap(a: &CMat, b: &CMat) -> f64 {
    trace(&(a.adjoint() * b)).norm() / a.nrows() as f64
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn su2_exp_matches_pade_exponential() {
        let a = [0.3, -1.1, 0.7];
        let gen = (sigma_x().scale(a[0]) + sigma_y().scale(a[1]) + sigma_z().scale(a[2])) * (-I);
        let reference = gen.exp();
        assert!(max_abs_diff(&mat2_to_dyn(&su2_exp(a)), &reference) < 1e-13);
    }

    #[test]
    fn rotation_conventions() {
        // X(π) = -iσx, Y(π/2)|0⟩ = |+⟩
        let x = rotation(std::f64::consts::PI, 0.0);
        assert!(max_abs_diff(&x, &(sigma_x() * (-I))) < 1e-15);
        let plus = rotation(std::f64::consts::FRAC_PI_2, std::f64::consts::FRAC_PI_2) * basis_ket(2, 0);
        let b = bloch_of_ket(&plus);
        assert!((b[0] - 1.0).abs() < 1e-14 && b[1].abs() < 1e-14 && b[2].abs() < 1e-14);
    }

    #[test]
    fn vectorization_identity() {
        let a = CMat::from_fn(2, 2, |i, j| c(i as f64 + 0.5, j as f64 - 0.2));
        let x = CMat::from_fn(2, 2, |i, j| c(0.1 * j as f64, 1.0 + i as f64));
        let b = CMat::from_fn(2, 2, |i, j| c((i * j) as f64, 0.3));
        let lhs = vectorize(&(&a * &x * &b));
        let rhs = kron(&b.transpose(), &a) * vectorize(&x);
        assert!((lhs - rhs).norm() < 1e-13);
    }
}
