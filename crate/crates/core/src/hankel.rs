//! Truncated Hankel operators and their top Schmidt pair.
//!
//! In the basis `e_k = z^-k` the operator `P_H2 M_g R` has entries
//! `H[m][k] = c_{-(m+k)}(g)`.

use std::collections::hash_map::DefaultHasher;
use std::hash::{Hash, Hasher};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::NehariError;
use crate::scalar::{czero, Real, C};
use crate::series::LaurentSeries;

/// Relative gap `sigma1 - sigma2` below which the top singular value is
/// treated as degenerate.
pub const SIMPLE_GAP: f64 = 1e-8;

/// Default truncation order: `max(32, 4 x causal width)`.
pub fn default_order<T: Real>(g: &LaurentSeries<T>) -> usize {
    32.max(4 * g.causal_width())
}

/// Order-`N` truncation of the Hankel operator with a given symbol.
#[derive(Clone, Debug, PartialEq)]
pub struct HankelMatrix<T: Real> {
    order: usize,
    /// Row-major `N x N`.
    entries: Vec<C<T>>,
    symbol_hash: u64,
}

fn hash_series<T: Real>(g: &LaurentSeries<T>) -> u64 {
    let mut h = DefaultHasher::new();
    for (n, c) in g.iter() {
        n.hash(&mut h);
        c.re.to_f64_lossy().to_bits().hash(&mut h);
        c.im.to_f64_lossy().to_bits().hash(&mut h);
    }
    h.finish()
}

impl<T: Real> HankelMatrix<T> {
    /// Build from the causal coefficients `c_0, c_-1, ...` of `g`.
    pub fn build(g: &LaurentSeries<T>, order: usize) -> Result<Self, NehariError> {
        Self::from_antidiagonals(order, hash_series(g), |j| g.coeff(-(j as i64)))
    }

    /// Build the operator of the transformed problem from `phi = qRg`,
    /// reading its coefficients at `n >= 1`: `H[m][k] = phi_{m+k+1}`.
    pub fn build_coanalytic(phi: &LaurentSeries<T>, order: usize) -> Result<Self, NehariError> {
        Self::from_antidiagonals(order, hash_series(phi), |j| phi.coeff(j as i64 + 1))
    }

    fn from_antidiagonals<F: Fn(usize) -> C<T>>(
        order: usize,
        symbol_hash: u64,
        diag: F,
    ) -> Result<Self, NehariError> {
        if order == 0 {
            return Err(NehariError::BadOrder(order));
        }
        let anti: Vec<C<T>> = (0..2 * order - 1).map(diag).collect();
        let mut entries = Vec::with_capacity(order * order);
        for m in 0..order {
            entries.extend_from_slice(&anti[m..m + order]);
        }
        Ok(Self {
            order,
            entries,
            symbol_hash,
        })
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn symbol_hash(&self) -> u64 {
        self.symbol_hash
    }

    pub fn entry(&self, m: usize, k: usize) -> C<T> {
        self.entries[m * self.order + k]
    }

    pub fn entries(&self) -> &[C<T>] {
        &self.entries
    }

    pub fn is_zero(&self) -> bool {
        self.entries
            .iter()
            .all(|c| c.re.is_zero() && c.im.is_zero())
    }

    fn check_len(&self, v: &[C<T>]) -> Result<(), NehariError> {
        if v.len() == self.order {
            Ok(())
        } else {
            Err(NehariError::DimensionMismatch {
                expected: self.order,
                got: v.len(),
            })
        }
    }

    pub fn apply(&self, v: &[C<T>]) -> Result<Vec<C<T>>, NehariError> {
        self.check_len(v)?;
        Ok(self.mul_vec(v))
    }

    /// Conjugate-transpose product `H* v`.
    pub fn apply_adjoint(&self, v: &[C<T>]) -> Result<Vec<C<T>>, NehariError> {
        self.check_len(v)?;
        Ok(self.mul_adjoint_vec(v))
    }

    fn mul_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        self.entries
            .chunks_exact(self.order)
            .map(|row| row.iter().zip(v).fold(czero(), |a, (&h, &x)| a + h * x))
            .collect()
    }

    fn mul_adjoint_vec(&self, v: &[C<T>]) -> Vec<C<T>> {
        let mut out = vec![czero(); self.order];
        for (row, &x) in self.entries.chunks_exact(self.order).zip(v) {
            for (o, &h) in out.iter_mut().zip(row) {
                *o += h.conj() * x;
            }
        }
        out
    }

    /// Apply to a series supported in `[-(N-1), 0]`, returning the truncated
    /// `P_H2 (g R f)`.
    pub fn apply_series(&self, f: &LaurentSeries<T>) -> LaurentSeries<T> {
        series_from_basis(&self.mul_vec(&basis_from_series(f, self.order)))
    }
}

/// Coefficient vector `[f_0, f_-1, ..., f_-(N-1)]`.
pub fn basis_from_series<T: Real>(f: &LaurentSeries<T>, order: usize) -> Vec<C<T>> {
    (0..order).map(|k| f.coeff(-(k as i64))).collect()
}

/// Inverse of [`basis_from_series`].
pub fn series_from_basis<T: Real>(v: &[C<T>]) -> LaurentSeries<T> {
    if v.is_empty() {
        return LaurentSeries::zero();
    }
    let lo = -(v.len() as i64 - 1);
    LaurentSeries::new(lo, v.iter().rev().copied().collect())
}

/// Settings for the power iteration on `H* H`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerIteration<T: Real> {
    /// Relative tolerance on successive singular-value estimates.
    pub tol: T,
    pub max_iter: usize,
    pub seed: u64,
}

impl<T: Real> Default for PowerIteration<T> {
    fn default() -> Self {
        Self {
            tol: T::lit(1e-12),
            max_iter: 10_000,
            seed: 42,
        }
    }
}

impl<T: Real> PowerIteration<T> {
    pub fn with_seed(self, seed: u64) -> Self {
        Self { seed, ..self }
    }

    fn validate(&self) -> Result<(), NehariError> {
        if self.tol > T::zero() {
            Ok(())
        } else {
            Err(NehariError::BadTolerance)
        }
    }

    /// Eigen-residual target `||H*Hv - s^2 v|| / s^2`.
    fn residual_tol(&self) -> T {
        (self.tol * T::lit(1e2)).max(T::epsilon() * T::lit(1e3))
    }
}

/// Top singular triple of a truncated Hankel operator.
#[derive(Clone, Debug, PartialEq)]
pub struct SchmidtPair<T: Real> {
    pub sigma: T,
    /// Unit right singular vector as a series on `[-(N-1), 0]`.
    pub y: LaurentSeries<T>,
    /// `H y / sigma`, or zero when the operator vanishes.
    pub u: LaurentSeries<T>,
    /// Deflated estimate of the second singular value.
    pub sigma2_estimate: T,
    pub converged: bool,
    pub iterations: usize,
    pub rank_zero: bool,
    pub non_simple: bool,
}

impl<T: Real> SchmidtPair<T> {
    /// `|| H y || = sigma ||y||` residual for a matrix `h`.
    pub fn attainment_residual(&self, h: &HankelMatrix<T>) -> T {
        let hy = h.apply_series(&self.y);
        (hy.l2_norm() - self.sigma * self.y.l2_norm()).abs()
    }
}

struct Dominant<T: Real> {
    sigma: T,
    v: Vec<C<T>>,
    converged: bool,
    iterations: usize,
}

fn vec_norm<T: Real>(v: &[C<T>]) -> T {
    v.iter().map(|c| c.norm_sqr()).sum::<T>().sqrt()
}

fn normalize<T: Real>(v: &mut [C<T>]) -> T {
    let n = vec_norm(v);
    if n > T::zero() {
        let inv = T::one() / n;
        v.iter_mut().for_each(|c| *c *= inv);
    }
    n
}

fn project_out<T: Real>(v: &mut [C<T>], basis: Option<&[C<T>]>) {
    if let Some(b) = basis {
        let dot = b
            .iter()
            .zip(v.iter())
            .fold(czero(), |a, (&x, &y)| a + x.conj() * y);
        v.iter_mut().zip(b).for_each(|(y, &x)| *y -= x * dot);
    }
}

fn random_start<T: Real>(n: usize, seed: u64) -> Vec<C<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            C::new(
                T::lit(rng.random_range(-1.0..1.0)),
                T::lit(rng.random_range(-1.0..1.0)),
            )
        })
        .collect()
}

/// Rotate so the largest-magnitude component is real positive.
fn fix_phase<T: Real>(v: &mut [C<T>]) {
    let mut best = 0;
    let mut best_abs = T::zero();
    for (i, c) in v.iter().enumerate() {
        if c.norm() > best_abs {
            best_abs = c.norm();
            best = i;
        }
    }
    if best_abs > T::zero() {
        let phase = v[best].conj() / best_abs;
        v.iter_mut().for_each(|c| *c *= phase);
    }
}

fn dominant<T: Real>(
    h: &HankelMatrix<T>,
    opts: &PowerIteration<T>,
    seed: u64,
    deflate: Option<&[C<T>]>,
    floor: T,
) -> Dominant<T> {
    let mut v = random_start(h.order(), seed);
    project_out(&mut v, deflate);
    if normalize(&mut v).is_zero() {
        return Dominant {
            sigma: T::zero(),
            v,
            converged: true,
            iterations: 0,
        };
    }
    let resid_tol = opts.residual_tol();
    let mut sigma_old = T::zero();
    let mut sigma = T::zero();
    for it in 1..=opts.max_iter {
        let w = h.mul_vec(&v);
        let s2 = w.iter().map(|c| c.norm_sqr()).sum::<T>();
        let mut x = h.mul_adjoint_vec(&w);
        project_out(&mut x, deflate);
        sigma = s2.sqrt();
        // Below the floor the deflated operator is rounding noise.
        if s2.is_zero() || sigma <= floor {
            return Dominant {
                sigma,
                v,
                converged: true,
                iterations: it,
            };
        }
        let resid = x
            .iter()
            .zip(&v)
            .map(|(&a, &b)| (a - b * s2).norm_sqr())
            .sum::<T>()
            .sqrt()
            / s2;
        let stable = (sigma - sigma_old).abs() <= opts.tol * sigma;
        if stable && resid <= resid_tol {
            return Dominant {
                sigma,
                v,
                converged: true,
                iterations: it,
            };
        }
        sigma_old = sigma;
        normalize(&mut x);
        // Renormalizing noise can revive the deflated direction.
        if deflate.is_some() {
            project_out(&mut x, deflate);
            normalize(&mut x);
        }
        v = x;
    }
    Dominant {
        sigma,
        v,
        converged: false,
        iterations: opts.max_iter,
    }
}

/// Largest singular value and vector of `h` by power iteration on `H* H`
/// from a seeded start, followed by one deflated run for `sigma2`.
pub fn top_singular<T: Real>(
    h: &HankelMatrix<T>,
    opts: &PowerIteration<T>,
) -> Result<SchmidtPair<T>, NehariError> {
    opts.validate()?;
    let n = h.order();
    if h.is_zero() {
        let mut e0 = vec![czero(); n];
        e0[0] = C::new(T::one(), T::zero());
        return Ok(SchmidtPair {
            sigma: T::zero(),
            y: series_from_basis(&e0),
            u: LaurentSeries::zero(),
            sigma2_estimate: T::zero(),
            converged: true,
            iterations: 0,
            rank_zero: true,
            non_simple: false,
        });
    }
    let top = dominant(h, opts, opts.seed, None, T::zero());
    let mut v = top.v;
    fix_phase(&mut v);
    let hv = h.mul_vec(&v);
    let sigma = vec_norm(&hv);
    let inv = T::one() / sigma;
    let u: Vec<C<T>> = hv.iter().map(|&c| c * inv).collect();

    let second = if n > 1 {
        let floor = T::epsilon() * T::lit(1e3) * sigma;
        dominant(
            h,
            opts,
            opts.seed.wrapping_add(0x9e37_79b9),
            Some(&v),
            floor,
        )
        .sigma
    } else {
        T::zero()
    };
    Ok(SchmidtPair {
        sigma,
        y: series_from_basis(&v),
        u: series_from_basis(&u),
        sigma2_estimate: second,
        converged: top.converged,
        iterations: top.iterations,
        rank_zero: false,
        non_simple: sigma - second < T::lit(SIMPLE_GAP) * sigma,
    })
}

/// Singular-value estimate without the deflated run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NormEstimate<T: Real> {
    pub sigma: T,
    pub converged: bool,
    pub iterations: usize,
}

/// Largest singular value of a prebuilt matrix.
pub fn matrix_norm<T: Real>(
    h: &HankelMatrix<T>,
    opts: &PowerIteration<T>,
) -> Result<NormEstimate<T>, NehariError> {
    opts.validate()?;
    if h.is_zero() {
        return Ok(NormEstimate {
            sigma: T::zero(),
            converged: true,
            iterations: 0,
        });
    }
    let d = dominant(h, opts, opts.seed, None, T::zero());
    Ok(NormEstimate {
        sigma: d.sigma,
        converged: d.converged,
        iterations: d.iterations,
    })
}

/// `||Gamma_g||` at truncation order `order`.
pub fn hankel_norm<T: Real>(
    g: &LaurentSeries<T>,
    order: usize,
    opts: &PowerIteration<T>,
) -> Result<NormEstimate<T>, NehariError> {
    matrix_norm(&HankelMatrix::build(g, order)?, opts)
}

/// `sigma(N)` and `sigma(2N)` with their gap.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TruncationDrift<T: Real> {
    pub sigma_n: NormEstimate<T>,
    pub sigma_2n: NormEstimate<T>,
    pub drift: T,
}

impl<T: Real> TruncationDrift<T> {
    /// `|sigma(2N) - sigma(N)| > 1e-6 sigma`.
    pub fn drifting(&self) -> bool {
        self.drift > T::lit(1e-6) * self.sigma_2n.sigma
    }
}

pub fn hankel_norm_drift<T: Real>(
    g: &LaurentSeries<T>,
    order: usize,
    opts: &PowerIteration<T>,
) -> Result<TruncationDrift<T>, NehariError> {
    let a = hankel_norm(g, order, opts)?;
    let b = hankel_norm(g, 2 * order, opts)?;
    Ok(TruncationDrift {
        sigma_n: a,
        sigma_2n: b,
        drift: (b.sigma - a.sigma).abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = LaurentSeries<f64>;

    fn c(re: f64) -> C<f64> {
        C::new(re, 0.0)
    }

    #[test]
    fn order_zero_rejected() {
        assert_eq!(
            HankelMatrix::build(&S::constant(c(1.0)), 0),
            Err(NehariError::BadOrder(0))
        );
    }

    #[test]
    fn constant_symbol_matrix() {
        let h = HankelMatrix::build(&S::constant(c(2.5)), 4).unwrap();
        for m in 0..4 {
            for k in 0..4 {
                let want = if m == 0 && k == 0 { c(2.5) } else { c(0.0) };
                assert_eq!(h.entry(m, k), want);
            }
        }
    }

    #[test]
    fn geometric_symbol_is_rank_one() {
        let g = S::from_real(
            -40,
            &(0..=40).rev().map(|n| 0.5f64.powi(n)).collect::<Vec<_>>(),
        );
        let h = HankelMatrix::build(&g, 8).unwrap();
        for m in 0..8 {
            for k in 0..8 {
                assert_eq!(h.entry(m, k), c(0.5f64.powi((m + k) as i32)));
            }
        }
    }

    #[test]
    fn apply_checks_dimension() {
        let h = HankelMatrix::build(&S::constant(c(1.0)), 3).unwrap();
        assert_eq!(
            h.apply(&[c(1.0); 2]),
            Err(NehariError::DimensionMismatch {
                expected: 3,
                got: 2
            })
        );
        let out = h.apply(&[c(1.0), c(0.0), c(0.0)]).unwrap();
        assert_eq!(out, vec![c(1.0), c(0.0), c(0.0)]);
    }

    #[test]
    fn anticausal_symbol_gives_zero_map() {
        let h = HankelMatrix::build(&S::monomial(1, c(1.0)), 5).unwrap();
        assert!(h.is_zero());
        let pair = top_singular(&h, &PowerIteration::default()).unwrap();
        assert!(pair.rank_zero);
        assert_eq!(pair.sigma, 0.0);
        assert!(pair.u.is_zero());
    }

    #[test]
    fn constant_symbol_singular_pair() {
        let h = HankelMatrix::build(&S::constant(C::new(0.0, -3.0)), 6).unwrap();
        let pair = top_singular(&h, &PowerIteration::default()).unwrap();
        assert!((pair.sigma - 3.0).abs() < 1e-12);
        assert!(pair.converged);
        assert!((pair.y.coeff(0) - c(1.0)).norm() < 1e-12);
        assert!((pair.y.l2_norm() - 1.0).abs() < 1e-12);
        assert!((pair.u.l2_norm() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rank_one_second_value_is_zero_for_every_seed() {
        let h = HankelMatrix::build(&S::constant(c(2.0)), 32).unwrap();
        for seed in 0..50 {
            let pair = top_singular(&h, &PowerIteration::default().with_seed(seed)).unwrap();
            assert!(
                pair.sigma2_estimate < 1e-12,
                "seed {seed}: {}",
                pair.sigma2_estimate
            );
            assert!(!pair.non_simple);
        }
    }

    #[test]
    fn golden_ratio_symbol() {
        // Oracle: eigenvalues of [[1,1],[1,0]] are (1 +- sqrt 5)/2.
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let h = HankelMatrix::build(&S::from_real(-1, &[1.0, 1.0]), 16).unwrap();
        let pair = top_singular(&h, &PowerIteration::default()).unwrap();
        assert!((pair.sigma - phi).abs() < 1e-12);
        assert!((pair.sigma2_estimate - (phi - 1.0)).abs() < 1e-8);
        assert!(!pair.non_simple);
        assert!(pair.attainment_residual(&h) < 1e-12);
    }

    #[test]
    fn bad_tolerance() {
        let h = HankelMatrix::build(&S::constant(c(1.0)), 2).unwrap();
        let opts = PowerIteration {
            tol: 0.0,
            ..Default::default()
        };
        assert_eq!(top_singular(&h, &opts), Err(NehariError::BadTolerance));
    }

    #[test]
    fn non_convergence_is_flagged() {
        let g = S::from_real(
            -20,
            &(0..=20)
                .rev()
                .map(|n| 1.0 / (n as f64 + 1.0))
                .collect::<Vec<_>>(),
        );
        let h = HankelMatrix::build(&g, 21).unwrap();
        let opts = PowerIteration {
            max_iter: 2,
            ..Default::default()
        };
        let pair = top_singular(&h, &opts).unwrap();
        assert!(!pair.converged);
        assert_eq!(pair.iterations, 2);
        assert!(pair.sigma > 0.0);
    }

    #[test]
    fn basis_round_trip() {
        let v = vec![c(1.0), C::new(0.0, 2.0), c(-1.0)];
        let s = series_from_basis(&v);
        assert_eq!(s.support(), Some((-2, 0)));
        assert_eq!(basis_from_series(&s, 3), v);
    }

    #[test]
    fn anticausal_part_invisible() {
        let g = S::from_real(0, &[2.0, 0.0, 3.0]);
        let est = hankel_norm(&g, 8, &PowerIteration::default()).unwrap();
        assert!((est.sigma - 2.0).abs() < 1e-12);
    }

    #[test]
    fn f32_instantiation() {
        let g = LaurentSeries::<f32>::from_real(-1, &[1.0, 1.0]);
        let opts = PowerIteration {
            tol: 1e-5f32,
            ..Default::default()
        };
        let est = hankel_norm(&g, 8, &opts).unwrap();
        assert!((est.sigma - 1.618034f32).abs() < 1e-4);
    }
}
