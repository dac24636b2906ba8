/// LU factors of a tridiagonal matrix for repeated solves (Thomas algorithm).
///
/// No pivoting: the matrix must be diagonally dominant, which holds for every
/// implicit diffusion operator built in this crate.
#[derive(Debug, Clone)]
pub struct TridiagonalLu {
    sub: Vec<f64>,
    upper: Vec<f64>,
    inv_pivot: Vec<f64>,
}

impl TridiagonalLu {
    /// `sub[i]` multiplies `x[i-1]` in row `i` (`sub[0]` unused), `sup[i]`
    /// multiplies `x[i+1]` (`sup[n-1]` unused).
    pub fn factor(sub: &[f64], diag: &[f64], sup: &[f64]) -> Self {
        let n = diag.len();
        assert!(n >= 1 && sub.len() == n && sup.len() == n);
        let mut upper = vec![0.0; n];
        let mut inv_pivot = vec![0.0; n];
        let mut pivot = diag[0];
        inv_pivot[0] = 1.0 / pivot;
        for i in 1..n {
            upper[i - 1] = sup[i - 1] * inv_pivot[i - 1];
            pivot = diag[i] - sub[i] * upper[i - 1];
            inv_pivot[i] = 1.0 / pivot;
        }
        Self {
            sub: sub.to_vec(),
            upper,
            inv_pivot,
        }
    }

    pub fn len(&self) -> usize {
        self.inv_pivot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_pivot.is_empty()
    }

    pub fn solve_in_place(&self, rhs: &mut [f64]) {
        let n = self.len();
        assert_eq!(rhs.len(), n);
        rhs[0] *= self.inv_pivot[0];
        for i in 1..n {
            rhs[i] = (rhs[i] - self.sub[i] * rhs[i - 1]) * self.inv_pivot[i];
        }
        for i in (0..n - 1).rev() {
            rhs[i] -= self.upper[i] * rhs[i + 1];
        }
    }
}
