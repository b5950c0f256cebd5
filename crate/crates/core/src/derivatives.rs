//! Derivatives of `ψ(λ) = e^{-φ(λ)}`.
//!
//! The table stores the normalized Taylor coefficients
//! `t_j = λ^j ψ^(j)(λ) / j!` instead of the raw derivatives. For a completely
//! monotone `ψ` the terms `(-1)^j t_j` are non-negative and sum to at most one,
//! so the table never overflows or loses range, whatever `λ` and the order.
//! In these variables the Leibniz recursion for `ψ' = -φ'ψ` reads
//!
//! ```text
//! t_0 = e^{-φ(λ)},   t_{j+1} = -1/(j+1) Σ_{i=0}^{j} t_i b_{j+1-i}
//! ```
//!
//! with `b_n = λ^n φ^(n)(λ) / (n-1)!`. The recursion is linear, so the
//! coefficients are kept as `t_j = u_j e^{s}` with a shared log-scale `s`
//! that absorbs `e^{-φ}` and any renormalization. That keeps large-`φ`
//! tables usable even when `e^{-φ}` itself underflows.

use crate::error::{Error, Result};
use crate::models::ValidatedModel;
use crate::real::{ln_factorial, Real};
use crate::special::pascal_row;

/// Renormalize once a coefficient passes `2^RESCALE_BITS`.
const RESCALE_BITS: i32 = 800;

#[derive(Debug, Clone, PartialEq)]
pub struct PsiDerivativeTable<T> {
    lambda: T,
    ln_scale: T,
    coefficients: Vec<T>,
}

impl<T: Real> PsiDerivativeTable<T> {
    /// Builds the table of order `k` (entries `0..=k`) from `φ(λ)` and the
    /// normalized derivatives `b_1..b_k`.
    pub fn from_normalized(lambda: T, phi_value: T, b: &[T], k: usize) -> Result<Self> {
        if b.len() < k {
            return Err(Error::Contract(format!(
                "order {k} needs {k} φ-derivatives, got {}",
                b.len()
            )));
        }
        let (mut ln_scale, first) = if phi_value < T::from_f64(600.0) {
            (T::zero(), (-phi_value).exp())
        } else {
            (-phi_value, T::one())
        };
        let limit = T::from_f64(2f64.powi(RESCALE_BITS));
        let shrink = T::from_f64(2f64.powi(-RESCALE_BITS));
        let mut u = Vec::with_capacity(k + 1);
        u.push(first);
        for j in 0..k {
            let acc: T = (0..=j).map(|i| u[i] * b[j - i]).sum();
            let next = -acc / T::from_usize(j + 1);
            u.push(next);
            if next.abs() > limit {
                for v in u.iter_mut() {
                    *v *= shrink;
                }
                ln_scale += T::from_f64(RESCALE_BITS as f64) * T::ln_2();
            }
        }
        Ok(PsiDerivativeTable { lambda, ln_scale, coefficients: u })
    }

    /// Builds the order-`k` table at `λ` for a model.
    pub fn for_model(model: &ValidatedModel, lambda: T, k: usize) -> Result<Self> {
        let phi = model.phi(lambda)?;
        let b = model.normalized_derivatives(lambda, k)?;
        Self::from_normalized(lambda, phi, &b, k)
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// `t_j = λ^j ψ^(j)(λ) / j!`; underflows to zero when `φ(λ)` is huge.
    pub fn normalized(&self, j: usize) -> T {
        let u = self.coefficients[j];
        if self.ln_scale == T::zero() || u == T::zero() {
            u
        } else {
            u * self.ln_scale.exp()
        }
    }

    /// `(u, s)` with `t_j = u_j e^s`.
    pub fn scaled_coefficients(&self) -> (&[T], T) {
        (&self.coefficients, self.ln_scale)
    }

    /// `t_0..=t_order`.
    pub fn normalized_coefficients(&self) -> Vec<T> {
        (0..=self.order()).map(|j| self.normalized(j)).collect()
    }

    /// `ψ^(j)(λ)`; may over- or underflow for large `j`.
    pub fn derivative(&self, j: usize) -> T {
        let u = self.coefficients[j];
        if u == T::zero() {
            return u;
        }
        u * (self.ln_scale + ln_factorial::<T>(j) - T::from_usize(j) * self.lambda.ln()).exp()
    }

    /// `(ln|ψ^(j)(λ)|, negative?)`, always representable.
    pub fn log_abs_derivative(&self, j: usize) -> (T, bool) {
        let u = self.coefficients[j];
        (
            u.abs().ln() + self.ln_scale + ln_factorial::<T>(j) - T::from_usize(j) * self.lambda.ln(),
            u.is_sign_negative(),
        )
    }

    /// `ψ^(0..=order)(λ)`.
    pub fn values(&self) -> Vec<T> {
        (0..=self.order()).map(|j| self.derivative(j)).collect()
    }
}

/// The Leibniz recursion on raw derivatives, exactly as written:
/// `ψ^(j+1) = -Σ_{i=0}^{j} C(j,i) ψ^(i) φ^(j+1-i)`, with `phi_derivs[n-1] = φ^(n)`.
pub fn psi_derivatives_recursive<T: Real>(
    phi_derivs: &[T],
    phi_value: T,
    lambda: T,
    k: usize,
) -> Result<PsiDerivativeTable<T>> {
    if phi_derivs.len() < k {
        return Err(Error::Contract(format!(
            "order {k} needs {k} φ-derivatives, got {}",
            phi_derivs.len()
        )));
    }
    let mut psi = Vec::with_capacity(k + 1);
    psi.push((-phi_value).exp());
    for j in 0..k {
        let row = pascal_row(j);
        let acc: T = (0..=j)
            .map(|i| row.get::<T>(i) * psi[i] * phi_derivs[j - i])
            .sum();
        psi.push(-acc);
    }
    let ln_lambda = lambda.ln();
    let coefficients = psi
        .into_iter()
        .enumerate()
        .map(|(j, v)| {
            if v == T::zero() {
                v
            } else {
                v * (T::from_usize(j) * ln_lambda - ln_factorial::<T>(j)).exp()
            }
        })
        .collect();
    Ok(PsiDerivativeTable { lambda, ln_scale: T::zero(), coefficients })
}

/// Complete Bell polynomials `B_0..=B_k` by
/// `B_{n+1} = Σ_{i=0}^{n} C(n,i) B_{n-i} x_{i+1}`.
pub fn bell_polynomials<T: Real>(x: &[T], k: usize) -> Result<Vec<T>> {
    if x.len() < k {
        return Err(Error::Contract(format!("B_{k} needs {k} arguments, got {}", x.len())));
    }
    let mut b = Vec::with_capacity(k + 1);
    b.push(T::one());
    for n in 0..k {
        let row = pascal_row(n);
        let next: T = (0..=n).map(|i| row.get::<T>(i) * b[n - i] * x[i]).sum();
        b.push(next);
    }
    Ok(b)
}

/// `B_k(x_1..x_k)` as the `k × k` Hessenberg determinant with entries
/// `C(k-1-r, c-r) x_{c-r+1}` on and above the diagonal and `-1` below it.
pub fn bell_determinant<T: Real>(x: &[T], k: usize) -> Result<T> {
    if k == 0 {
        return Ok(T::one());
    }
    if x.len() < k {
        return Err(Error::Contract(format!("B_{k} needs {k} arguments, got {}", x.len())));
    }
    let mut a = vec![vec![T::zero(); k]; k];
    for r in 0..k {
        let row = pascal_row(k - 1 - r);
        for c in r..k {
            a[r][c] = row.get::<T>(c - r) * x[c - r];
        }
        if r > 0 {
            a[r][r - 1] = -T::one();
        }
    }
    // Gaussian elimination with partial pivoting.
    let mut det = T::one();
    for col in 0..k {
        let pivot = (col..k)
            .max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).expect("finite entries"))
            .expect("non-empty range");
        if a[pivot][col] == T::zero() {
            return Ok(T::zero());
        }
        if pivot != col {
            a.swap(pivot, col);
            det = -det;
        }
        det *= a[col][col];
        for r in col + 1..k {
            let factor = a[r][col] / a[col][col];
            if factor != T::zero() {
                for c in col..k {
                    let v = a[col][c];
                    a[r][c] -= factor * v;
                }
            }
        }
    }
    Ok(det)
}

/// `ψ^(k)(λ) = e^{-φ} B_k(-φ^(1), …, -φ^(k))` through the Bell recurrence.
pub fn psi_derivative_bell<T: Real>(phi_derivs: &[T], phi_value: T, k: usize) -> Result<T> {
    let x: Vec<T> = phi_derivs.iter().take(k).map(|&v| -v).collect();
    Ok((-phi_value).exp() * bell_polynomials(&x, k)?[k])
}

/// Same as [`psi_derivative_bell`] through the determinant.
pub fn psi_derivative_determinant<T: Real>(phi_derivs: &[T], phi_value: T, k: usize) -> Result<T> {
    let x: Vec<T> = phi_derivs.iter().take(k).map(|&v| -v).collect();
    Ok((-phi_value).exp() * bell_determinant(&x, k)?)
}

/// k-th derivative of `λ^q ψ(λ)`:
/// `Σ_{j=0}^{q∧k} C(k,j) q!/(q-j)! λ^{q-j} ψ^(k-j)(λ)`.
pub fn scaled_transform_derivatives<T: Real>(table: &PsiDerivativeTable<T>, q: usize, k: usize) -> Result<T> {
    if table.order() < k {
        return Err(Error::Contract(format!(
            "table of order {} cannot supply derivative {k}",
            table.order()
        )));
    }
    let row = pascal_row(k);
    let lambda = table.lambda();
    let mut falling = T::one(); // q!/(q-j)!
    let mut acc = T::zero();
    for j in 0..=q.min(k) {
        if j > 0 {
            falling *= T::from_usize(q + 1 - j);
        }
        acc += row.get::<T>(j) * falling * lambda.powi((q - j) as i32) * table.derivative(k - j);
    }
    Ok(acc)
}
