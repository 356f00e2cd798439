//! Inner-outer splitting and the Riesz factorization of H1 polynomials.
//!
//! Polynomials are handled in the disk variable `v = z^-1`, in which a
//! series supported on `n <= 0` is `sum_j c_{-j} v^j`. Zeros in `|z| > 1`
//! are zeros with `|v| < 1` and go into a Blaschke product; the rest of the
//! modulus is carried by the outer factor `exp(u + i H[u])`, `u = log|f|`.

use nalgebra::DMatrix;

use crate::error::NehariError;
use crate::grid::{check_grid_size, GridFunction};
use crate::scalar::{czero, next_pow2, Real, C};
use crate::series::LaurentSeries;

/// Roots with `| |z| - 1 |` at or below this are rejected.
pub const CIRCLE_MARGIN: f64 = 1e-6;
/// Blaschke zeros must satisfy `|a| > 1 + BLASCHKE_MARGIN` in the z-plane.
pub const BLASCHKE_MARGIN: f64 = 1e-9;
/// Minimum grid modulus accepted by [`outer_factor`].
pub const OUTER_FLOOR: f64 = 1e-9;

/// Finite Blaschke product in the disk variable `w = z^-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct BlaschkeProduct<T: Real> {
    disk_zeros: Vec<C<T>>,
}

impl<T: Real> BlaschkeProduct<T> {
    /// Zeros `w0` with `|w0| < 1`; `w0 = 0` stands for a zero at `z = inf`.
    pub fn from_disk_zeros(disk_zeros: Vec<C<T>>) -> Result<Self, NehariError> {
        let limit = T::one() / (T::one() + T::lit(BLASCHKE_MARGIN));
        for w0 in &disk_zeros {
            if w0.norm() >= limit {
                return Err(NehariError::ZeroOutsideDisk {
                    modulus: w0.norm().to_f64_lossy(),
                });
            }
        }
        Ok(Self { disk_zeros })
    }

    /// Zeros `a` in the exterior `|a| > 1` of the z-plane.
    pub fn from_exterior_zeros(zeros: &[C<T>]) -> Result<Self, NehariError> {
        let margin = T::one() + T::lit(BLASCHKE_MARGIN);
        let mut disk = Vec::with_capacity(zeros.len());
        for a in zeros {
            if a.norm() <= margin {
                return Err(NehariError::ZeroOutsideDisk {
                    modulus: (T::one() / a.norm()).to_f64_lossy(),
                });
            }
            disk.push(a.inv());
        }
        Ok(Self { disk_zeros: disk })
    }

    pub fn disk_zeros(&self) -> &[C<T>] {
        &self.disk_zeros
    }

    /// Value at a disk point `w` (analytic continuation off the circle).
    pub fn eval_disk(&self, w: C<T>) -> C<T> {
        self.disk_zeros
            .iter()
            .fold(C::new(T::one(), T::zero()), |acc, &w0| acc * factor(w0, w))
    }

    /// Samples on the circle, `w = e^{-i w_k}`.
    pub fn sample(&self, size: usize) -> Result<GridFunction<T>, NehariError> {
        GridFunction::from_fn(size, |omega: T| {
            self.eval_disk(C::new(omega.cos(), -omega.sin()))
        })
    }
}

fn factor<T: Real>(w0: C<T>, w: C<T>) -> C<T> {
    let r = w0.norm();
    if r.is_zero() {
        -w
    } else {
        (w0 - w) / (C::new(T::one(), T::zero()) - w0.conj() * w) * (w0.conj() / r)
    }
}

/// Blaschke product with the given exterior zeros, sampled on `size` points.
pub fn blaschke<T: Real>(zeros_in_e: &[C<T>], size: usize) -> Result<GridFunction<T>, NehariError> {
    BlaschkeProduct::from_exterior_zeros(zeros_in_e)?.sample(size)
}

/// `u + i H[u]` for `u = log|f|`, analytic on `n <= 0`.
fn outer_log<T: Real>(f: &GridFunction<T>) -> Result<GridFunction<T>, NehariError> {
    let min = f.min_modulus();
    if min.is_nan() || min <= T::lit(OUTER_FLOOR) {
        return Err(NehariError::NearZero {
            min_modulus: min.to_f64_lossy(),
        });
    }
    let size = f.size();
    let half = size / 2;
    let u = f.map(|c| C::new(c.norm().ln(), T::zero()));
    let hat = u.dft();
    // Index -n lives at folded slot G - n; the Nyquist slot is self-conjugate.
    let two = T::lit(2.0);
    let coeffs: Vec<C<T>> = (0..=half)
        .map(|j| {
            let n = half - j; // coefficient index -n
            match n {
                0 => hat[0],
                n if n == half => hat[half],
                n => hat[size - n] * two,
            }
        })
        .collect();
    GridFunction::from_series(&LaurentSeries::new(-(half as i64), coeffs), size)
}

/// Zero-free analytic function with `|O| = |f|` on the grid.
pub fn outer_factor<T: Real>(f: &GridFunction<T>) -> Result<GridFunction<T>, NehariError> {
    Ok(outer_log(f)?.map(|c| c.exp()))
}

/// Relative coefficient mass of a grid function at `n >= 1`.
pub fn anticausal_mass<T: Real>(f: &GridFunction<T>) -> T {
    let c = f.to_series_centered();
    let total = c.l2_norm();
    if total.is_zero() {
        return T::zero();
    }
    c.project_hperp().l2_norm() / total
}

/// Inner-outer split of a polynomial in `v = z^-1`.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerOuterParts<T: Real> {
    pub outer: GridFunction<T>,
    /// Blaschke product times the unimodular constant, so `f = inner * outer`.
    pub inner: GridFunction<T>,
    /// Disk-variable zeros `w0 = 1/a` of the exterior roots `a` (0 for `a = inf`).
    pub disk_zeros: Vec<C<T>>,
    pub unit: C<T>,
}

/// Roots of `sum_j a_j v^j` via the eigenvalues of its companion matrix,
/// refined by Newton steps on the original coefficients.
pub fn polynomial_roots<T: Real>(coeffs: &[C<T>]) -> Result<Vec<C<T>>, NehariError> {
    let a: Vec<C<f64>> = coeffs
        .iter()
        .map(|c| C::new(c.re.to_f64_lossy(), c.im.to_f64_lossy()))
        .collect();
    let deg = a.iter().rposition(|c| c.norm() > 0.0).unwrap_or(0);
    if deg == 0 {
        return Ok(Vec::new());
    }
    let lead = a[deg];
    let companion = DMatrix::<C<f64>>::from_fn(deg, deg, |i, j| {
        if i == 0 {
            -a[deg - 1 - j] / lead
        } else if i == j + 1 {
            C::new(1.0, 0.0)
        } else {
            C::new(0.0, 0.0)
        }
    });
    let schur = companion
        .try_schur(f64::EPSILON, 10_000)
        .ok_or_else(|| NehariError::RootFinding("Schur iteration did not converge".into()))?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| NehariError::RootFinding("Schur form not triangular".into()))?;
    let horner = |x: C<f64>| -> (C<f64>, C<f64>) {
        let mut p = C::new(0.0, 0.0);
        let mut dp = C::new(0.0, 0.0);
        for &c in a[..=deg].iter().rev() {
            dp = dp * x + p;
            p = p * x + c;
        }
        (p, dp)
    };
    Ok(eig
        .iter()
        .map(|&r0| {
            let mut r = r0;
            for _ in 0..3 {
                let (p, dp) = horner(r);
                if dp.norm() == 0.0 {
                    break;
                }
                let next = r - p / dp;
                if horner(next).0.norm() >= p.norm() {
                    break;
                }
                r = next;
            }
            C::new(T::lit(r.re), T::lit(r.im))
        })
        .collect())
}

/// Split `f` (support in `n <= 0`) as `unit * B * O` on a grid.
pub fn inner_outer<T: Real>(
    f: &LaurentSeries<T>,
    size: usize,
) -> Result<InnerOuterParts<T>, NehariError> {
    check_grid_size(size)?;
    if !f.in_h() {
        return Err(NehariError::NotCausal);
    }
    // v-polynomial coefficients a_j = c_{-j}; leading zeros are zeros at z = inf.
    let deg = f.causal_width().saturating_sub(1);
    let a: Vec<C<T>> = (0..=deg).map(|j| f.coeff(-(j as i64))).collect();
    let at_inf = a.iter().position(|c| c.norm() > T::zero()).unwrap_or(0);
    let mut disk_zeros = vec![czero(); at_inf];
    for r in polynomial_roots(&a[at_inf..])? {
        let distance = (T::one() / r.norm() - T::one()).abs();
        if distance <= T::lit(CIRCLE_MARGIN) {
            return Err(NehariError::RootNearCircle {
                distance: distance.to_f64_lossy(),
            });
        }
        if r.norm() < T::one() {
            disk_zeros.push(r);
        }
    }
    let b = BlaschkeProduct::from_disk_zeros(disk_zeros)?;
    let fg = GridFunction::from_series(f, size)?;
    let outer = outer_factor(&fg)?;
    let blaschke = b.sample(size)?;
    let unit_raw = (&fg / &(&blaschke * &outer)).mean();
    let unit = unit_raw / unit_raw.norm();
    Ok(InnerOuterParts {
        inner: blaschke.map(|c| c * unit),
        outer,
        disk_zeros: b.disk_zeros,
        unit,
    })
}

/// `f = p q` with `p, q` in H2 and `||f||_1 = ||p||_2 ||q||_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct RieszFactors<T: Real> {
    pub p: GridFunction<T>,
    pub q: GridFunction<T>,
    /// `sup_k |f - p q| / ||f||_inf` on the grid.
    pub product_residual: T,
    /// `| ||f||_1 - ||p||_2 ||q||_2 |` on the grid.
    pub norm_residual: T,
    pub parts: InnerOuterParts<T>,
}

/// Default grid for factorization: at least 16 points per degree.
pub fn default_factor_grid<T: Real>(f: &LaurentSeries<T>) -> usize {
    next_pow2(16 * f.width().max(1)).max(256)
}

/// Riesz factorization `p = inner * O^(1/2)`, `q = O^(1/2)`.
pub fn riesz_factorize<T: Real>(
    f: &LaurentSeries<T>,
    size: usize,
) -> Result<RieszFactors<T>, NehariError> {
    let parts = inner_outer(f, size)?;
    let fg = GridFunction::from_series(f, size)?;
    let root = outer_log(&fg)?.map(|c| (c * T::lit(0.5)).exp());
    let p = &parts.inner * &root;
    let q = root;
    let scale = fg.norm_sup();
    let product_residual = if scale.is_zero() {
        T::zero()
    } else {
        fg.sup_distance(&(&p * &q)) / scale
    };
    let norm_residual = (fg.norm_l1() - p.norm_l2() * q.norm_l2()).abs();
    Ok(RieszFactors {
        p,
        q,
        product_residual,
        norm_residual,
        parts,
    })
}
