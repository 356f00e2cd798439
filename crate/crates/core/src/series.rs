//! Finitely supported Laurent series on the unit circle.
//!
//! Index `n` is the coefficient of `z^n`. Hardy-space elements live on
//! `n <= 0` (`a_0 + a_1 z^-1 + ...`), the anticausal class on `n >= 1`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::scalar::{czero, Real, C};

/// Absolute threshold below which edge coefficients are trimmed.
pub const TRIM_THRESHOLD: f64 = 1e-14;

/// Two-sided coefficient sequence with finite support `[lo, lo + len)`.
///
/// Always kept in canonical form: the first and last stored coefficients
/// are nonzero, and the zero series has no storage.
#[derive(Clone, PartialEq)]
pub struct LaurentSeries<T: Real> {
    lo: i64,
    coeffs: Vec<C<T>>,
}

impl<T: Real> fmt::Debug for LaurentSeries<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (n, c) in self.iter() {
            m.entry(&n, &c);
        }
        m.finish()
    }
}

impl<T: Real> Default for LaurentSeries<T> {
    fn default() -> Self {
        Self::zero()
    }
}

impl<T: Real> LaurentSeries<T> {
    pub fn zero() -> Self {
        Self {
            lo: 0,
            coeffs: Vec::new(),
        }
    }

    /// Series with `coeffs[j]` the coefficient of `z^(lo + j)`.
    pub fn new(lo: i64, coeffs: Vec<C<T>>) -> Self {
        let mut s = Self { lo, coeffs };
        s.trim(T::lit(TRIM_THRESHOLD));
        s
    }

    pub fn from_real(lo: i64, coeffs: &[T]) -> Self {
        Self::new(lo, coeffs.iter().map(|&r| C::new(r, T::zero())).collect())
    }

    pub fn constant(c: C<T>) -> Self {
        Self::monomial(0, c)
    }

    pub fn monomial(n: i64, c: C<T>) -> Self {
        Self::new(n, vec![c])
    }

    /// Build from `(index, value)` pairs; repeated indices accumulate.
    pub fn from_pairs<I: IntoIterator<Item = (i64, C<T>)>>(pairs: I) -> Self {
        let pairs: Vec<_> = pairs.into_iter().collect();
        let Some(lo) = pairs.iter().map(|p| p.0).min() else {
            return Self::zero();
        };
        let hi = pairs.iter().map(|p| p.0).max().unwrap();
        let mut coeffs = vec![czero(); (hi - lo + 1) as usize];
        for (n, c) in pairs {
            coeffs[(n - lo) as usize] += c;
        }
        Self::new(lo, coeffs)
    }

    fn trim(&mut self, threshold: T) {
        let keep = |c: &C<T>| c.norm() > threshold;
        let Some(first) = self.coeffs.iter().position(keep) else {
            self.coeffs.clear();
            self.lo = 0;
            return;
        };
        let last = self.coeffs.iter().rposition(keep).unwrap();
        self.coeffs.truncate(last + 1);
        self.coeffs.drain(..first);
        self.lo += first as i64;
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Inclusive support `(n_lo, n_hi)`, or `None` for the zero series.
    pub fn support(&self) -> Option<(i64, i64)> {
        if self.is_zero() {
            None
        } else {
            Some((self.lo, self.lo + self.coeffs.len() as i64 - 1))
        }
    }

    /// Number of indices spanned by the support.
    pub fn width(&self) -> usize {
        self.coeffs.len()
    }

    pub fn n_lo(&self) -> Option<i64> {
        self.support().map(|s| s.0)
    }

    pub fn n_hi(&self) -> Option<i64> {
        self.support().map(|s| s.1)
    }

    /// Number of indices in `[n_lo, 0]` when the series reaches `n <= 0`.
    pub fn causal_width(&self) -> usize {
        match self.n_lo() {
            Some(lo) if lo <= 0 => (1 - lo) as usize,
            _ => 0,
        }
    }

    pub fn coeff(&self, n: i64) -> C<T> {
        let j = n - self.lo;
        if j < 0 || j as usize >= self.coeffs.len() {
            czero()
        } else {
            self.coeffs[j as usize]
        }
    }

    /// Contiguous coefficient storage starting at `n_lo`.
    pub fn coeffs(&self) -> &[C<T>] {
        &self.coeffs
    }

    pub fn iter(&self) -> impl Iterator<Item = (i64, C<T>)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(j, &c)| (self.lo + j as i64, c))
    }

    /// Member of the Hardy class: support in `n <= 0`.
    pub fn in_h(&self) -> bool {
        self.n_hi().is_none_or(|hi| hi <= 0)
    }

    /// Member of the anticausal class: support in `n >= 1`.
    pub fn in_hperp(&self) -> bool {
        self.n_lo().is_none_or(|lo| lo >= 1)
    }

    /// Member of H1 vanishing at infinity: support in `n <= -1`.
    pub fn in_h1_0(&self) -> bool {
        self.n_hi().is_none_or(|hi| hi <= -1)
    }

    /// Forward shift `(qf)(z) = z f(z)`.
    pub fn shift_q(&self) -> Self {
        self.shift(1)
    }

    /// Multiply by `z^k`.
    pub fn shift(&self, k: i64) -> Self {
        Self {
            lo: if self.is_zero() { 0 } else { self.lo + k },
            coeffs: self.coeffs.clone(),
        }
    }

    /// Reversion: coefficient at `n` moves to `-n`.
    pub fn reverse(&self) -> Self {
        match self.support() {
            None => Self::zero(),
            Some((_, hi)) => Self {
                lo: -hi,
                coeffs: self.coeffs.iter().rev().copied().collect(),
            },
        }
    }

    /// `f~(e^{iw}) = conj(f(e^{-iw}))`: conjugate every coefficient in place.
    pub fn conj_tilde(&self) -> Self {
        Self {
            lo: self.lo,
            coeffs: self.coeffs.iter().map(|c| c.conj()).collect(),
        }
    }

    /// Keep only indices in `[lo, hi]`.
    pub fn restrict(&self, lo: i64, hi: i64) -> Self {
        let Some((s_lo, s_hi)) = self.support() else {
            return Self::zero();
        };
        let a = lo.max(s_lo);
        let b = hi.min(s_hi);
        if a > b {
            return Self::zero();
        }
        let start = (a - s_lo) as usize;
        let end = (b - s_lo) as usize + 1;
        Self::new(a, self.coeffs[start..end].to_vec())
    }

    /// Orthogonal projection onto H2 (indices `n <= 0`).
    pub fn project_h2(&self) -> Self {
        self.restrict(i64::MIN, 0)
    }

    /// Anticausal part (indices `n >= 1`).
    pub fn project_hperp(&self) -> Self {
        self.restrict(1, i64::MAX)
    }

    /// Part vanishing at infinity (indices `n <= -1`).
    pub fn project_h1_0(&self) -> Self {
        self.restrict(i64::MIN, -1)
    }

    pub fn scale(&self, a: C<T>) -> Self {
        Self::new(self.lo, self.coeffs.iter().map(|&c| c * a).collect())
    }

    /// Exact coefficient convolution.
    pub fn multiply(&self, other: &Self) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![czero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::new(self.lo + other.lo, out)
    }

    fn combine(&self, other: &Self, sign: T) -> Self {
        if other.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return other.scale(C::new(sign, T::zero()));
        }
        let lo = self.lo.min(other.lo);
        let hi = self.n_hi().unwrap().max(other.n_hi().unwrap());
        let coeffs = (lo..=hi)
            .map(|n| self.coeff(n) + other.coeff(n) * sign)
            .collect();
        Self::new(lo, coeffs)
    }

    /// `(f, g) = sum_n f_n conj(g_n)`.
    pub fn inner_product(&self, other: &Self) -> C<T> {
        self.iter()
            .map(|(n, c)| c * other.coeff(n).conj())
            .fold(czero(), |a, b| a + b)
    }

    /// Bilinear pairing `<x, phi> = (1/2pi) int phi x dw = sum_n phi_n x_{-n}`
    /// with `self` as `x`.
    pub fn dual_pair(&self, phi: &Self) -> C<T> {
        self.iter()
            .map(|(n, c)| c * phi.coeff(-n))
            .fold(czero(), |a, b| a + b)
    }

    pub fn l2_norm_sqr(&self) -> T {
        self.coeffs.iter().map(|c| c.norm_sqr()).sum()
    }

    pub fn l2_norm(&self) -> T {
        self.l2_norm_sqr().sqrt()
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> T {
        self.coeffs.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Drop every coefficient whose modulus is below `threshold`.
    pub fn drop_below(&self, threshold: T) -> Self {
        Self::new(
            self.lo,
            self.coeffs
                .iter()
                .map(|&c| if c.norm() < threshold { czero() } else { c })
                .collect(),
        )
    }

    /// Evaluate at a point `z` (`z != 0` when the support reaches `n < 0`).
    pub fn eval_at(&self, z: C<T>) -> C<T> {
        let Some((lo, _)) = self.support() else {
            return czero();
        };
        // Horner in z, then scale by z^lo.
        let mut acc: C<T> = czero();
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(lo as i32)
    }
}

impl<T: Real> Add for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn add(self, rhs: Self) -> LaurentSeries<T> {
        self.combine(rhs, T::one())
    }
}

impl<T: Real> Sub for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn sub(self, rhs: Self) -> LaurentSeries<T> {
        self.combine(rhs, -T::one())
    }
}

impl<T: Real> Mul for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn mul(self, rhs: Self) -> LaurentSeries<T> {
        self.multiply(rhs)
    }
}

impl<T: Real> Neg for &LaurentSeries<T> {
    type Output = LaurentSeries<T>;
    fn neg(self) -> LaurentSeries<T> {
        self.scale(C::new(-T::one(), T::zero()))
    }
}
