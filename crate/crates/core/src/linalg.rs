//! Dense LU factorization with partial pivoting, kept in log scale.

/// Pivots below this magnitude are treated as exact zeros.
pub const PIVOT_FLOOR: f64 = 1e-300;

/// `PA = LU` for a square row-major matrix.
#[derive(Clone, Debug)]
pub struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    log_abs_det: f64,
    singular: bool,
}

impl Lu {
    /// Factors `a` (row-major, `n x n`). Factorization stops at the first
    /// pivot below [`PIVOT_FLOOR`]; the matrix is then reported singular.
    pub fn factor(n: usize, mut a: Vec<f64>) -> Lu {
        assert_eq!(a.len(), n * n, "matrix is not n x n");
        let mut perm: Vec<usize> = (0..n).collect();
        let mut log_abs_det = 0.0;
        let mut singular = false;
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if !(best >= PIVOT_FLOOR) {
                singular = true;
                log_abs_det = f64::NEG_INFINITY;
                break;
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                perm.swap(k, p);
            }
            let pivot = a[k * n + k];
            log_abs_det += pivot.abs().ln();
            for i in k + 1..n {
                let factor = a[i * n + k] / pivot;
                a[i * n + k] = factor;
                if factor != 0.0 {
                    for j in k + 1..n {
                        a[i * n + j] -= factor * a[k * n + j];
                    }
                }
            }
        }
        Lu {
            n,
            lu: a,
            perm,
            log_abs_det,
            singular,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn log_abs_det(&self) -> f64 {
        self.log_abs_det
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    /// Solves `A x = b` in place. Panics on a singular factorization.
    pub fn solve(&self, b: &mut [f64]) {
        assert!(!self.singular, "solve on singular factorization");
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.lu[i * n + j] * y[j];
            }
            y[i] = s / self.lu[i * n + i];
        }
        b.copy_from_slice(&y);
    }

    /// Solves `A^T x = b` in place. Panics on a singular factorization.
    pub fn solve_transpose(&self, b: &mut [f64]) {
        assert!(!self.singular, "solve on singular factorization");
        let n = self.n;
        // U^T w = b
        let mut w = b.to_vec();
        for i in 0..n {
            let mut s = w[i];
            for j in 0..i {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s / self.lu[i * n + i];
        }
        // L^T v = w
        for i in (0..n).rev() {
            let mut s = w[i];
            for j in i + 1..n {
                s -= self.lu[j * n + i] * w[j];
            }
            w[i] = s;
        }
        for (i, &p) in self.perm.iter().enumerate() {
            b[p] = w[i];
        }
    }
}

/// `log |det a|` for a row-major square matrix; `-inf` when singular.
pub fn log_abs_det(n: usize, a: Vec<f64>) -> f64 {
    Lu::factor(n, a).log_abs_det()
}

/// Numerically stable `log(Σ exp(x_i))`; `-inf` for an empty or all `-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Streaming version of [`log_sum_exp`].
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        LogSumExp {
            max: f64::NEG_INFINITY,
            sum: 0.0,
        }
    }
}

impl LogSumExp {
    pub fn add(&mut self, x: f64) {
        if x == f64::NEG_INFINITY {
            return;
        }
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    pub fn value(&self) -> f64 {
        if self.max == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn determinant_of_small_matrices() {
        let lu = Lu::factor(2, vec![1.0, 1.0, -1.0, 1.0]);
        assert!((lu.log_abs_det() - 2f64.ln()).abs() < 1e-15);
        let lu = Lu::factor(3, vec![2.0, 0.0, 0.0, 0.0, 3.0, 0.0, 0.0, 0.0, -5.0]);
        assert!((lu.log_abs_det() - 30f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn singular_matrix_is_neg_infinity() {
        let lu = Lu::factor(2, vec![1.0, 2.0, 0.0, 0.0]);
        assert!(lu.is_singular());
        assert_eq!(lu.log_abs_det(), f64::NEG_INFINITY);
        assert_eq!(log_abs_det(0, vec![]), 0.0);
    }

    #[test]
    fn solves_and_transposed_solves() {
        let a = vec![0.0, 2.0, 1.0, 1.0, 1.0, 0.0, 3.0, 0.0, 1.0];
        let lu = Lu::factor(3, a.clone());
        let x = [1.0, -2.0, 0.5];
        let mut b: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[i * 3 + j] * x[j]).sum())
            .collect();
        lu.solve(&mut b);
        for i in 0..3 {
            assert!((b[i] - x[i]).abs() < 1e-12);
        }
        let mut bt: Vec<f64> = (0..3)
            .map(|i| (0..3).map(|j| a[j * 3 + i] * x[j]).sum())
            .collect();
        lu.solve_transpose(&mut bt);
        for i in 0..3 {
            assert!((bt[i] - x[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [0.0, 1.0, -3.0, 2.5];
        let direct = xs.iter().map(|x: &f64| x.exp()).sum::<f64>().ln();
        assert!((log_sum_exp(&xs) - direct).abs() < 1e-14);
        let mut acc = LogSumExp::default();
        for x in xs {
            acc.add(x);
        }
        acc.add(f64::NEG_INFINITY);
        assert!((acc.value() - direct).abs() < 1e-14);
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
    }
}
