//! Dense determinants by LU with partial pivoting.

use super::logspace::LogValue;

/// Determinant of a row-major `n x n` matrix whose entries are given in
/// log-magnitude/sign form.
///
/// Each row is rescaled by its largest magnitude before elimination, so rows
/// whose entries differ by hundreds of orders of magnitude stay representable.
pub fn log_det(entries: &[LogValue], n: usize) -> LogValue {
    assert_eq!(entries.len(), n * n, "matrix must be n x n");
    if n == 0 {
        return LogValue::ONE;
    }
    let mut scale = 0.0;
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        let row = &entries[i * n..(i + 1) * n];
        let row_max = row
            .iter()
            .filter(|e| !e.is_zero())
            .map(|e| e.log_magnitude())
            .fold(f64::NEG_INFINITY, f64::max);
        if row_max == f64::NEG_INFINITY {
            return LogValue::ZERO;
        }
        scale += row_max;
        for (dst, e) in a[i * n..(i + 1) * n].iter_mut().zip(row) {
            *dst = if e.is_zero() {
                0.0
            } else {
                f64::from(e.sign()) * (e.log_magnitude() - row_max).exp()
            };
        }
    }
    let lu = lu_log_det(&mut a, n);
    LogValue::new(lu.log_magnitude() + scale, lu.sign())
}

/// Determinant of a row-major `f64` matrix.
pub fn det(matrix: &[f64], n: usize) -> f64 {
    assert_eq!(matrix.len(), n * n, "matrix must be n x n");
    let mut a = matrix.to_vec();
    lu_log_det(&mut a, n).value()
}

/// In-place LU with partial pivoting; returns the determinant in log form.
fn lu_log_det(a: &mut [f64], n: usize) -> LogValue {
    let mut log_mag = 0.0;
    let mut sign: i8 = 1;
    for k in 0..n {
        let (piv, piv_abs) = (k..n)
            .map(|i| (i, a[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if piv_abs == 0.0 || !piv_abs.is_finite() {
            return if piv_abs == 0.0 {
                LogValue::ZERO
            } else {
                LogValue::new(f64::NAN, 1)
            };
        }
        if piv != k {
            for j in 0..n {
                a.swap(k * n + j, piv * n + j);
            }
            sign = -sign;
        }
        let pivot = a[k * n + k];
        if pivot < 0.0 {
            sign = -sign;
        }
        log_mag += pivot.abs().ln();
        for i in (k + 1)..n {
            let factor = a[i * n + k] / pivot;
            if factor == 0.0 {
                continue;
            }
            for j in (k + 1)..n {
                a[i * n + j] -= factor * a[k * n + j];
            }
        }
    }
    LogValue::new(log_mag, sign)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn leibniz(m: &[f64], n: usize) -> f64 {
        fn perms(n: usize) -> Vec<Vec<usize>> {
            if n == 1 {
                return vec![vec![0]];
            }
            let mut out = Vec::new();
            for p in perms(n - 1) {
                for pos in 0..n {
                    let mut q = p.clone();
                    q.insert(pos, n - 1);
                    out.push(q);
                }
            }
            out
        }
        perms(n)
            .into_iter()
            .map(|p| {
                let inversions = (0..n)
                    .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
                    .filter(|&(i, j)| p[i] > p[j])
                    .count();
                let s = if inversions % 2 == 0 { 1.0 } else { -1.0 };
                s * (0..n).map(|i| m[i * n + p[i]]).product::<f64>()
            })
            .sum()
    }

    #[test]
    fn matches_leibniz_expansion() {
        let m = [2.0, -1.0, 0.5, 3.0, 0.0, 1.5, -2.0, 4.0, 1.0, 0.0, 2.0, -3.0, 1.0, 1.0, 1.0, 1.0];
        let exact = leibniz(&m, 4);
        assert!((det(&m, 4) - exact).abs() < 1e-12 * exact.abs().max(1.0));
        let logs: Vec<_> = m.iter().map(|&v| LogValue::from_f64(v)).collect();
        assert!((log_det(&logs, 4).value() - exact).abs() < 1e-12 * exact.abs().max(1.0));
    }

    #[test]
    fn survives_extreme_row_scales() {
        // rows scaled by e^{+-700}: the determinant is e^{700-700} * det(base)
        let base = [1.0, 2.0, 3.0, 5.0];
        let entries = vec![
            LogValue::new(700.0, 1),
            LogValue::new(700.0 + 2f64.ln(), 1),
            LogValue::new(-700.0 + 3f64.ln(), 1),
            LogValue::new(-700.0 + 5f64.ln(), 1),
        ];
        let d = log_det(&entries, 2);
        assert_eq!(d.sign(), -1);
        assert!((d.value() - det(&base, 2)).abs() < 1e-12);
    }

    #[test]
    fn singular_is_exact_zero() {
        assert_eq!(det(&[1.0, 2.0, 2.0, 4.0], 2), 0.0);
        let zero_row = vec![LogValue::ZERO, LogValue::ZERO, LogValue::ONE, LogValue::ONE];
        assert!(log_det(&zero_row, 2).is_zero());
    }
}
