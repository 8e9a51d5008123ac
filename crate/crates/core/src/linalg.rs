use nalgebra::{DMatrix, DVector};

/// Solves `a x = b` for symmetric positive (semi)definite `a` by Cholesky.
///
/// If the factorization fails a ridge of `1e-8 * trace / k` is added (and
/// grown tenfold until it succeeds). The second return value reports whether
/// any ridge was needed.
pub(crate) fn solve_spd(a: DMatrix<f64>, b: &DVector<f64>) -> (DVector<f64>, bool) {
    let k = a.nrows();
    if k == 0 {
        return (DVector::zeros(0), false);
    }
    if let Some(chol) = a.clone().cholesky() {
        return (chol.solve(b), false);
    }
    let trace = a.trace().abs().max(f64::MIN_POSITIVE);
    let mut ridge = 1e-8 * trace / k as f64;
    loop {
        let mut jittered = a.clone();
        for i in 0..k {
            jittered[(i, i)] += ridge;
        }
        if let Some(chol) = jittered.cholesky() {
            return (chol.solve(b), true);
        }
        ridge *= 10.0;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_well_posed_system() {
        let a = DMatrix::from_row_slice(2, 2, &[4.0, 1.0, 1.0, 3.0]);
        let b = DVector::from_vec(vec![1.0, 2.0]);
        let (x, jittered) = solve_spd(a.clone(), &b);
        assert!(!jittered);
        assert!((a * x - b).norm() < 1e-12);
    }

    #[test]
    fn singular_system_gets_ridge() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let b = DVector::from_vec(vec![2.0, 2.0]);
        let (x, jittered) = solve_spd(a, &b);
        assert!(jittered);
        assert!((x[0] - 1.0).abs() < 1e-6 && (x[1] - 1.0).abs() < 1e-6);
    }
}
