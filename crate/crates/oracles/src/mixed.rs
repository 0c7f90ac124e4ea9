//! Random-intercept mixed model quantities computed with dense matrices.
//!
//! For cluster i with n_i points: V_i = s2b * J + s2 * I.

use nalgebra::{DMatrix, DVector};

fn v_inverse(n: usize, s2: f64, s2b: f64) -> DMatrix<f64> {
    let v = DMatrix::from_element(n, n, s2b) + DMatrix::identity(n, n) * s2;
    v.try_inverse().expect("V is positive definite")
}

/// b_i = s2b * 1' V_i^-1 r_i.
pub fn estep(residuals: &[Vec<f64>], s2: f64, s2b: f64) -> Vec<f64> {
    residuals
        .iter()
        .map(|r| {
            let n = r.len();
            let vinv = v_inverse(n, s2, s2b);
            let ones = DVector::from_element(n, 1.0);
            s2b * (ones.transpose() * vinv * DVector::from_column_slice(r))[(0, 0)]
        })
        .collect()
}

/// Variance-component EM updates with explicit traces and quadratic forms.
pub fn update_variance(residuals: &[Vec<f64>], b: &[f64], s2: f64, s2b: f64) -> (f64, f64) {
    let total: usize = residuals.iter().map(Vec::len).sum();
    let q = residuals.len() as f64;
    let (mut acc_e, mut acc_b) = (0.0, 0.0);
    for (r, &bi) in residuals.iter().zip(b) {
        let n = r.len();
        let vinv = v_inverse(n, s2, s2b);
        let eps = DVector::from_iterator(n, r.iter().map(|v| v - bi));
        acc_e += eps.dot(&eps) + s2 * (n as f64 - s2 * vinv.trace());
        let ones = DVector::from_element(n, 1.0);
        let quad = (ones.transpose() * &vinv * &ones)[(0, 0)];
        acc_b += bi * bi + (s2b - s2b * quad * s2b);
    }
    ((acc_e / total as f64).max(1e-8), acc_b / q)
}

/// sum_i [eps_i' R_i^-1 eps_i + b_i D^-1 b_i + ln|D| + ln|R_i|], R_i = s2 I,
/// with determinants and inverses taken numerically.
pub fn gll(residuals: &[Vec<f64>], b: &[f64], s2: f64, s2b: f64) -> f64 {
    let mut total = 0.0;
    for (r, &bi) in residuals.iter().zip(b) {
        let n = r.len();
        let big_r = DMatrix::identity(n, n) * s2;
        let eps = DVector::from_iterator(n, r.iter().map(|v| v - bi));
        let rinv = big_r.clone().try_inverse().unwrap();
        total += (eps.transpose() * rinv * &eps)[(0, 0)] + big_r.determinant().ln();
        if s2b > 0.0 {
            let d = DMatrix::from_element(1, 1, s2b);
            let dinv = d.clone().try_inverse().unwrap();
            total += bi * dinv[(0, 0)] * bi + d.determinant().ln();
        }
    }
    total
}
