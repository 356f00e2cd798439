//! Samples on a uniform dyadic grid of the unit circle.

use std::ops::{Div, Mul, Sub};

use rustfft::FftPlanner;

use crate::error::NehariError;
use crate::scalar::{cis, czero, next_pow2, Real, C};
use crate::series::LaurentSeries;

/// Values at `w_k = 2 pi k / G`, `k = 0..G`.
#[derive(Clone, Debug, PartialEq)]
pub struct GridFunction<T: Real> {
    values: Vec<C<T>>,
}

pub fn check_grid_size(g: usize) -> Result<(), NehariError> {
    if g >= 4 && g.is_power_of_two() {
        Ok(())
    } else {
        Err(NehariError::BadGridSize(g))
    }
}

/// Default grid for sup-norm evaluation: 8 x next_pow2(width + 1).
pub fn default_grid_size(width: usize) -> usize {
    (8 * next_pow2(width + 1)).max(4)
}

fn fft_in_place<T: Real>(buf: &mut [C<T>], inverse: bool) {
    let mut planner = FftPlanner::<T>::new();
    let fft = if inverse {
        planner.plan_fft_inverse(buf.len())
    } else {
        planner.plan_fft_forward(buf.len())
    };
    fft.process(buf);
}

impl<T: Real> GridFunction<T> {
    pub fn new(values: Vec<C<T>>) -> Result<Self, NehariError> {
        check_grid_size(values.len())?;
        Ok(Self { values })
    }

    /// Sample `f(w)` at every grid angle.
    pub fn from_fn<F: FnMut(T) -> C<T>>(size: usize, mut f: F) -> Result<Self, NehariError> {
        check_grid_size(size)?;
        let values = (0..size).map(|k| f(Self::angle_of(k, size))).collect();
        Ok(Self { values })
    }

    pub fn constant(size: usize, c: C<T>) -> Result<Self, NehariError> {
        Self::new(vec![c; size])
    }

    fn angle_of(k: usize, size: usize) -> T {
        T::TAU() * T::from_usize_lossy(k) / T::from_usize_lossy(size)
    }

    pub fn size(&self) -> usize {
        self.values.len()
    }

    pub fn values(&self) -> &[C<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<C<T>> {
        self.values
    }

    pub fn angle(&self, k: usize) -> T {
        Self::angle_of(k, self.size())
    }

    pub fn angles(&self) -> impl Iterator<Item = T> + '_ {
        (0..self.size()).map(|k| self.angle(k))
    }

    /// Sample `f(e^{iw})` from coefficients. Indices are folded modulo `G`
    /// before the inverse transform, so any finite support is evaluated
    /// exactly.
    pub fn from_series(f: &LaurentSeries<T>, size: usize) -> Result<Self, NehariError> {
        check_grid_size(size)?;
        let g = size as i64;
        let mut buf = vec![czero(); size];
        for (n, c) in f.iter() {
            buf[n.rem_euclid(g) as usize] += c;
        }
        fft_in_place(&mut buf, true);
        Ok(Self { values: buf })
    }

    /// All folded DFT coefficients, `hat[j]` for `j = 0..G` (index `n`
    /// lives at `n mod G`).
    pub fn dft(&self) -> Vec<C<T>> {
        let mut buf = self.values.clone();
        fft_in_place(&mut buf, false);
        let inv = T::one() / T::from_usize_lossy(self.size());
        buf.iter_mut().for_each(|c| *c *= inv);
        buf
    }

    /// Recover coefficients on `[n_lo, n_hi]`; exact inverse of
    /// [`GridFunction::from_series`] when the support fits.
    pub fn to_series(&self, n_lo: i64, n_hi: i64) -> Result<LaurentSeries<T>, NehariError> {
        let size = self.size();
        let width = (n_hi - n_lo + 1).max(0) as usize;
        if width > size {
            return Err(NehariError::SupportTooWide { width, grid: size });
        }
        if width == 0 {
            return Ok(LaurentSeries::zero());
        }
        let hat = self.dft();
        let g = size as i64;
        let coeffs = (n_lo..=n_hi)
            .map(|n| hat[n.rem_euclid(g) as usize])
            .collect();
        Ok(LaurentSeries::new(n_lo, coeffs))
    }

    /// Coefficients on the symmetric window `[-G/2, G/2 - 1]`.
    pub fn to_series_centered(&self) -> LaurentSeries<T> {
        let h = (self.size() / 2) as i64;
        self.to_series(-h, h - 1).expect("window fits grid")
    }

    /// Grid max-modulus; a lower bound on the essential supremum.
    pub fn norm_sup(&self) -> T {
        self.values.iter().map(|c| c.norm()).fold(T::zero(), T::max)
    }

    /// Grid mean-modulus.
    pub fn norm_l1(&self) -> T {
        self.mean_by(|c| c.norm())
    }

    pub fn norm_l2(&self) -> T {
        self.mean_by(|c| c.norm_sqr()).sqrt()
    }

    pub fn min_modulus(&self) -> T {
        self.values
            .iter()
            .map(|c| c.norm())
            .fold(T::infinity(), T::min)
    }

    fn mean_by<F: Fn(&C<T>) -> T>(&self, f: F) -> T {
        self.values.iter().map(f).sum::<T>() / T::from_usize_lossy(self.size())
    }

    /// Trapezoidal rule for `(1/2pi) int f dw`.
    pub fn mean(&self) -> C<T> {
        let s = self.values.iter().fold(czero(), |a, &b| a + b);
        s / T::from_usize_lossy(self.size())
    }

    pub fn map<F: Fn(C<T>) -> C<T>>(&self, f: F) -> Self {
        Self {
            values: self.values.iter().map(|&c| f(c)).collect(),
        }
    }

    /// Pointwise combination of two grids of the same size.
    pub fn zip_with<F: Fn(C<T>, C<T>) -> C<T>>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.size(), other.size(), "grid size mismatch");
        Self {
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    /// Samples at the mirrored angles: `out[k] = self[(G - k) mod G]`, i.e.
    /// `f(e^{-iw_k})`.
    pub fn mirrored(&self) -> Self {
        let g = self.size();
        Self {
            values: (0..g).map(|k| self.values[(g - k) % g]).collect(),
        }
    }

    /// Multiply sample `k` by `e^{i m w_k}`.
    pub fn times_monomial(&self, m: i64) -> Self {
        let g = self.size() as i64;
        let step = T::TAU() / T::from_usize_lossy(self.size());
        Self {
            values: self
                .values
                .iter()
                .enumerate()
                .map(|(k, &c)| {
                    let j = (m * k as i64).rem_euclid(g);
                    c * cis(step * T::lit(j as f64))
                })
                .collect(),
        }
    }

    /// Largest `|a_k - b_k|`.
    pub fn sup_distance(&self, other: &Self) -> T {
        (self - other).norm_sup()
    }
}

/// Grid sup-norm of `f` on `G` points together with the refinement delta
/// `|sup_2G - sup_G|`.
pub fn sup_with_refinement<T: Real>(
    f: &LaurentSeries<T>,
    size: usize,
) -> Result<(T, T), NehariError> {
    let coarse = GridFunction::from_series(f, size)?.norm_sup();
    let fine = GridFunction::from_series(f, 2 * size)?.norm_sup();
    Ok((fine.max(coarse), (fine - coarse).abs()))
}

impl<T: Real> Sub for &GridFunction<T> {
    type Output = GridFunction<T>;
    fn sub(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl<T: Real> Mul for &GridFunction<T> {
    type Output = GridFunction<T>;
    fn mul(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a * b)
    }
}

impl<T: Real> Div for &GridFunction<T> {
    type Output = GridFunction<T>;
    fn div(self, rhs: Self) -> GridFunction<T> {
        self.zip_with(rhs, |a, b| a / b)
    }
}
