//! Direct minimization of `max_k |g(e^{iw_k}) - sum_{n=1..M} b_n e^{inw_k}|`
//! by subgradient descent, used as an independent upper bound on the
//! optimal value.

use rand::Rng;

use crate::error::NehariError;
use crate::grid::{check_grid_size, GridFunction};
use crate::scalar::{cis, czero, Real, C};
use crate::series::LaurentSeries;
use crate::solver::seeded_rng;

/// Diminishing step sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSchedule<T: Real> {
    /// `c / sqrt(t)`; `None` uses `c = ||g||_inf` on the grid.
    InvSqrt(Option<T>),
}

impl<T: Real> Default for StepSchedule<T> {
    fn default() -> Self {
        StepSchedule::InvSqrt(None)
    }
}

impl<T: Real> StepSchedule<T> {
    fn step(&self, scale: T, t: usize) -> T {
        match *self {
            StepSchedule::InvSqrt(c) => c.unwrap_or(scale) / T::from_usize_lossy(t).sqrt(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PrimalOptions<T: Real> {
    /// Number of anticausal coefficients `b_1..b_M`.
    pub coeffs: usize,
    pub grid: usize,
    pub iters: usize,
    pub step: StepSchedule<T>,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PrimalResult<T: Real> {
    /// Best grid sup found.
    pub value: T,
    pub f: LaurentSeries<T>,
    pub iterations: usize,
    pub final_step: T,
}

/// Iterations between exact recomputations of the residual.
const RESYNC: usize = 512;

fn residual_from<T: Real>(g_grid: &GridFunction<T>, b: &[C<T>]) -> Vec<C<T>> {
    let f = LaurentSeries::new(1, b.to_vec());
    let fg = GridFunction::from_series(&f, g_grid.size()).expect("valid grid");
    (g_grid - &fg).into_values()
}

fn sup_and_argmax<T: Real>(r: &[C<T>], rng: &mut impl Rng) -> (T, usize) {
    let moduli: Vec<T> = r.iter().map(|c| c.norm()).collect();
    let max = moduli.iter().copied().fold(T::zero(), T::max);
    let cut = max * (T::one() - T::lit(1e-12));
    let active: Vec<usize> = (0..r.len()).filter(|&k| moduli[k] >= cut).collect();
    let k = active[rng.random_range(0..active.len())];
    (max, k)
}

/// Subgradient descent over `b in C^M` with steps `c / sqrt(t)`,
/// warm-started at the anticausal part of `g` truncated to `M` terms.
///
/// The reported value is the best grid sup seen over the iterates and
/// their step-weighted average across the second half of the run.
pub fn primal_bruteforce<T: Real>(
    g: &LaurentSeries<T>,
    opts: &PrimalOptions<T>,
) -> Result<PrimalResult<T>, NehariError> {
    check_grid_size(opts.grid)?;
    let m = opts.coeffs.max(1);
    let size = opts.grid;
    let mut rng = seeded_rng(opts.seed);
    let g_grid = GridFunction::from_series(g, size)?;
    let scale = g_grid.norm_sup();

    let mut b: Vec<C<T>> = (1..=m as i64).map(|n| g.coeff(n)).collect();
    let mut r = residual_from(&g_grid, &b);
    let (mut best, _) = sup_and_argmax(&r, &mut rng);
    let mut best_b = b.clone();

    // kernel[j] = sum_{n=1..M} e^{i n 2 pi j / G} / sqrt(M)
    let inv_sqrt_m = T::one() / T::from_usize_lossy(m).sqrt();
    let unit = T::TAU() / T::from_usize_lossy(size);
    let kernel: Vec<C<T>> = (0..size)
        .map(|j| {
            (1..=m)
                .map(|n| cis(unit * T::from_usize_lossy((n * j) % size)))
                .fold(czero(), |a, c| a + c)
                * inv_sqrt_m
        })
        .collect();

    // Step-weighted running average of the iterates over the second half.
    let mut avg = vec![czero(); m];
    let mut weight = T::zero();
    let tail_start = opts.iters / 2;

    let mut step = T::zero();
    let mut iterations = 0;
    for t in 1..=opts.iters {
        let (value, k) = sup_and_argmax(&r, &mut rng);
        if value < best {
            best = value;
            best_b.clone_from(&b);
        }
        if value.is_zero() {
            break;
        }
        iterations = t;
        step = opts.step.step(scale, t);
        let s = r[k] / value;
        let wk = unit * T::from_usize_lossy(k);
        for (n, bn) in b.iter_mut().enumerate() {
            let n = T::from_usize_lossy(n + 1);
            *bn += s * cis(-(n * wk)) * (step * inv_sqrt_m);
        }
        let a = s * step;
        for (j, rj) in r.iter_mut().enumerate() {
            *rj -= a * kernel[(j + size - k) % size];
        }
        if t > tail_start {
            weight += step;
            let frac = step / weight;
            avg.iter_mut()
                .zip(&b)
                .for_each(|(a, &x)| *a = *a + (x - *a) * frac);
        }
        if t % RESYNC == 0 {
            r = residual_from(&g_grid, &b);
            if weight > T::zero() {
                let (v, _) = sup_and_argmax(&residual_from(&g_grid, &avg), &mut rng);
                if v < best {
                    best = v;
                    best_b.clone_from(&avg);
                }
            }
        }
    }
    if weight > T::zero() {
        let (v, _) = sup_and_argmax(&residual_from(&g_grid, &avg), &mut rng);
        if v < best {
            best = v;
            best_b.clone_from(&avg);
        }
    }
    let r = residual_from(&g_grid, &b);
    let (value, _) = sup_and_argmax(&r, &mut rng);
    if value < best {
        best = value;
        best_b = b;
    }
    Ok(PrimalResult {
        value: best,
        f: LaurentSeries::new(1, best_b),
        iterations,
        final_step: step,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = LaurentSeries<f64>;

    fn opts(m: usize, grid: usize, iters: usize) -> PrimalOptions<f64> {
        PrimalOptions {
            coeffs: m,
            grid,
            iters,
            step: StepSchedule::default(),
            seed: 7,
        }
    }

    #[test]
    fn constant_symbol_stays_at_zero() {
        let g = S::constant(C::new(-1.5, 2.0));
        let res = primal_bruteforce(&g, &opts(8, 128, 500)).unwrap();
        assert!((res.value - 2.5).abs() < 1e-12);
        assert!(res.f.is_zero());
    }

    #[test]
    fn anticausal_symbol_is_feasible() {
        let g = S::new(1, vec![C::new(0.3, -0.2), C::new(1.0, 0.5)]);
        let res = primal_bruteforce(&g, &opts(4, 64, 100)).unwrap();
        assert!(res.value < 1e-12);
        assert_eq!(res.iterations, 0);
    }

    #[test]
    fn kernel_update_tracks_exact_residual() {
        let g = S::from_real(-2, &[0.5, 1.0, 1.0]);
        let res = primal_bruteforce(&g, &opts(6, 64, RESYNC - 1)).unwrap();
        let direct = GridFunction::from_series(&(&g - &res.f), 64)
            .unwrap()
            .norm_sup();
        assert!((direct - res.value).abs() < 1e-10);
    }

    #[test]
    fn golden_symbol_upper_bound() {
        let phi = (1.0 + 5f64.sqrt()) / 2.0;
        let g = S::from_real(-1, &[1.0, 1.0]);
        let res = primal_bruteforce(&g, &opts(16, 256, 4000)).unwrap();
        assert!(res.value >= phi - 1e-9);
        assert!(res.value < 2.0);
    }
}
