//! Tridiagonal systems (Thomas algorithm with a reusable factorization).

/// A tridiagonal matrix stored by diagonals. `sub[0]` and `sup[n - 1]` are unused.
#[derive(Debug, Clone, PartialEq)]
pub struct Tridiagonal {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
}

/// LU factors of a [`Tridiagonal`] matrix.
#[derive(Debug, Clone)]
pub struct Factored {
    sub: Vec<f64>,
    inv_pivot: Vec<f64>,
    sup_scaled: Vec<f64>,
}

impl Tridiagonal {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.sub[i] * x[i - 1];
            }
            if i + 1 < n {
                v += self.sup[i] * x[i + 1];
            }
            y[i] = v;
        }
    }

    /// Forward elimination without pivoting; fine for the diagonally
    /// dominant systems of implicit time stepping.
    pub fn factor(&self) -> Factored {
        let n = self.len();
        let mut inv_pivot = vec![0.0; n];
        let mut sup_scaled = vec![0.0; n];
        let mut prev = 0.0;
        for i in 0..n {
            let pivot = self.diag[i] - if i > 0 { self.sub[i] * prev } else { 0.0 };
            inv_pivot[i] = 1.0 / pivot;
            prev = if i + 1 < n { self.sup[i] * inv_pivot[i] } else { 0.0 };
            sup_scaled[i] = prev;
        }
        Factored {
            sub: self.sub.clone(),
            inv_pivot,
            sup_scaled,
        }
    }
}

impl Factored {
    /// Solve in place: `rhs` is overwritten with the solution.
    pub fn solve(&self, rhs: &mut [f64]) {
        let n = rhs.len();
        if n == 0 {
            return;
        }
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.sup_scaled[i] * rhs[i + 1];
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_against_dense_product() {
        let n = 7;
        let m = Tridiagonal {
            sub: (0..n).map(|i| -0.3 - 0.01 * i as f64).collect(),
            diag: (0..n).map(|i| 2.0 + 0.1 * i as f64).collect(),
            sup: (0..n).map(|i| -0.7 + 0.02 * i as f64).collect(),
        };
        let x: Vec<f64> = (0..n).map(|i| (i as f64).sin() + 0.5).collect();
        let mut b = vec![0.0; n];
        m.apply(&x, &mut b);
        m.factor().solve(&mut b);
        for (u, v) in b.iter().zip(&x) {
            assert!((u - v).abs() < 1e-14);
        }
    }
}
