//! Small dense helpers for `dim <= 2` state matrices.

/// `a = sigma sigma^T` for a row-major `d x d` sigma.
#[inline]
pub fn outer_square(sigma: &[f64], d: usize, a: &mut [f64]) {
    for i in 0..d {
        for j in 0..d {
            let mut s = 0.0;
            for k in 0..d {
                s += sigma[i * d + k] * sigma[j * d + k];
            }
            a[i * d + j] = s;
        }
    }
}

/// Least eigenvalue of a symmetric `d x d` matrix, `d` in {1, 2}.
pub fn min_eigenvalue_sym(a: &[f64], d: usize) -> f64 {
    match d {
        1 => a[0],
        2 => {
            let mean = 0.5 * (a[0] + a[3]);
            let half_diff = 0.5 * (a[0] - a[3]);
            let off = 0.5 * (a[1] + a[2]);
            mean - libm::hypot(half_diff, off)
        }
        _ => panic!("min_eigenvalue_sym supports d <= 2"),
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    libm::sqrt(v.iter().map(|x| x * x).sum())
}

pub fn norm1(v: &[f64]) -> f64 {
    v.iter().map(|x| x.abs()).sum()
}

pub fn dist1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_eigenvalue() {
        let mut a = [0.0; 4];
        outer_square(&[1.0, 0.0, 0.0, 1.0], 2, &mut a);
        assert_eq!(min_eigenvalue_sym(&a, 2), 1.0);
    }

    #[test]
    fn rotated_diagonal() {
        // eigenvalues 1 and 3 for [[2,1],[1,2]]
        assert!((min_eigenvalue_sym(&[2.0, 1.0, 1.0, 2.0], 2) - 1.0).abs() < 1e-15);
        assert_eq!(min_eigenvalue_sym(&[0.25], 1), 0.25);
    }
}
