//! Optimal anticausal approximation of a symbol in the sup norm.
//!
//! The optimal value is the Hankel norm `sigma`; given a maximizing vector
//! `y` the optimal residual is `g - f_opt = (Gamma_g y) / (R y)`, and
//! `x_opt = z^-1 z_opt conj(w_opt(1/z))` is a unit-norm element of H1_0
//! whose pairing with `qRg` is `sigma`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::NehariError;
use crate::grid::{check_grid_size, sup_with_refinement, GridFunction};
use crate::hankel::{
    self, default_order, matrix_norm, top_singular, HankelMatrix, NormEstimate, PowerIteration,
    SchmidtPair,
};
use crate::scalar::{czero, next_pow2, Real, C};
use crate::series::LaurentSeries;

/// `|Ry|` floor, relative to `||y||_2`, for the residual division.
pub const DIVISION_FLOOR: f64 = 1e-9;
/// Maximum fraction of grid points that may fall under the floor.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;
/// Relative flatness deviation above which a residual is declared non-flat.
pub const FLATNESS_TOL: f64 = 1e-4;
/// Coefficients of `f_opt` below this modulus are dropped.
pub const COEFF_DROP: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveOptions<T: Real> {
    pub order: usize,
    pub grid: usize,
    pub power: PowerIteration<T>,
    /// Also compute `sigma(2N)` and flag truncation drift.
    pub check_drift: bool,
}

impl<T: Real> SolveOptions<T> {
    /// `N = max(32, 4 x causal width)`, `G = 8 x next_pow2(2N)`.
    pub fn for_symbol(g: &LaurentSeries<T>) -> Self {
        let order = default_order(g);
        Self {
            order,
            grid: default_grid_for_order(order),
            power: PowerIteration::default(),
            check_drift: true,
        }
    }

    pub fn with_order(self, order: usize) -> Self {
        Self { order, ..self }
    }

    pub fn with_grid(self, grid: usize) -> Self {
        Self { grid, ..self }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        Self {
            power: self.power.with_seed(seed),
            ..self
        }
    }
}

pub fn default_grid_for_order(order: usize) -> usize {
    8 * next_pow2(2 * order)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct SolutionFlags {
    pub non_simple_sigma: bool,
    pub rank_zero: bool,
    pub non_flat: bool,
    pub not_converged: bool,
    pub drifting: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct NehariSolution<T: Real> {
    /// Optimal value `sigma = ||Gamma_g||` at the truncation order.
    pub d: T,
    pub sigma2_estimate: T,
    /// Anticausal approximant (support in `n >= 1`).
    pub f_opt: LaurentSeries<T>,
    /// Samples of `g - f_opt` from the division formula.
    pub residual: GridFunction<T>,
    /// `max_k | |r_k| / d - 1 |` (absolute `max |r_k|` when `d = 0`).
    pub flatness_dev: T,
    /// Largest mismatch between the causal coefficients of the residual
    /// and those of `g`.
    pub h2_leakage: T,
    /// Grid sup of `g - f_opt` evaluated from the returned coefficients.
    pub achieved_sup: T,
    pub dual_pairing: C<T>,
    pub x_opt_l1: T,
    pub h1_0_leakage: T,
    /// `max_k | |w(e^{iw_k})| - |z(e^{-iw_k})| |`.
    pub modulus_agreement: T,
    pub excluded_points: usize,
    /// `sigma(2N) - sigma(N)` when drift checking is on.
    pub drift: Option<T>,
    /// Primal value minus `d`, filled in by certification.
    pub gap: Option<T>,
    pub pair: SchmidtPair<T>,
    pub flags: SolutionFlags,
}

/// `max_k | |r_k| / d - 1 |`.
pub fn flatness_check<T: Real>(r: &GridFunction<T>, d: T) -> T {
    debug_assert!(d > T::zero());
    r.values()
        .iter()
        .map(|c| (c.norm() / d - T::one()).abs())
        .fold(T::zero(), T::max)
}

/// Optimality witness in the predual ball.
#[derive(Clone, Debug, PartialEq)]
pub struct DualCertificate<T: Real> {
    /// `<x_opt, qRg>` by grid quadrature.
    pub pairing: C<T>,
    /// Grid L1 norm of `x_opt`.
    pub x_l1: T,
    /// l2 mass of the grid coefficients of `x_opt` at `n >= 0`.
    pub h1_0_leakage: T,
    pub x_opt: GridFunction<T>,
}

/// `x_opt` as an exact series: `z^-1 * z_opt * conj_tilde(w_opt)`.
pub fn dual_certificate_series<T: Real>(pair: &SchmidtPair<T>) -> LaurentSeries<T> {
    let z_opt = pair.y.scale(C::new(T::one() / pair.y.l2_norm(), T::zero()));
    z_opt.multiply(&pair.u.conj_tilde()).shift(-1)
}

pub fn dual_certificate<T: Real>(
    g: &LaurentSeries<T>,
    pair: &SchmidtPair<T>,
    grid: usize,
) -> Result<DualCertificate<T>, NehariError> {
    check_grid_size(grid)?;
    if pair.rank_zero || pair.sigma <= T::zero() {
        return Err(NehariError::RankZero("dual certificate"));
    }
    let y_norm = pair.y.l2_norm();
    let z = GridFunction::from_series(&pair.y, grid)?.map(|c| c / y_norm);
    let w = GridFunction::from_series(&pair.u, grid)?;
    let x = (&z * &w.mirrored().conj()).times_monomial(-1);

    let phi = GridFunction::from_series(&g.reverse().shift_q(), grid)?;
    let pairing = (&phi * &x).mean();
    let coeffs = x.dft();
    let h = grid / 2;
    // Folded index j holds n = j for j < G/2; n >= 0 there.
    let leak = coeffs[..h].iter().map(|c| c.norm_sqr()).sum::<T>().sqrt();
    Ok(DualCertificate {
        pairing,
        x_l1: x.norm_l1(),
        h1_0_leakage: leak,
        x_opt: x,
    })
}

/// `max_k | |w(e^{iw_k})| - |z(e^{-iw_k})| |` for `z = y/||y||`, `w = u`.
pub fn modulus_agreement<T: Real>(pair: &SchmidtPair<T>, grid: usize) -> Result<T, NehariError> {
    let y_norm = pair.y.l2_norm();
    let z = GridFunction::from_series(&pair.y, grid)?.mirrored();
    let w = GridFunction::from_series(&pair.u, grid)?;
    Ok(w.values()
        .iter()
        .zip(z.values())
        .map(|(a, b)| (a.norm() - b.norm() / y_norm).abs())
        .fold(T::zero(), T::max))
}

/// Divide `num / den` on the grid, replacing points where `|den| < floor`
/// by the midpoint of the nearest valid neighbours.
fn guarded_division<T: Real>(
    num: &GridFunction<T>,
    den: &GridFunction<T>,
    floor: T,
) -> Result<(GridFunction<T>, usize), NehariError> {
    let g = num.size();
    let valid: Vec<bool> = den.values().iter().map(|c| c.norm() >= floor).collect();
    let excluded = valid.iter().filter(|v| !**v).count();
    if excluded as f64 > MAX_EXCLUDED_FRACTION * g as f64 {
        return Err(NehariError::IllConditionedDivision { excluded, grid: g });
    }
    let raw: Vec<C<T>> = num
        .values()
        .iter()
        .zip(den.values())
        .zip(&valid)
        .map(|((&a, &b), &ok)| if ok { a / b } else { czero() })
        .collect();
    let mut out = raw.clone();
    if excluded > 0 {
        for k in (0..g).filter(|&k| !valid[k]) {
            let left = (1..g).map(|s| (k + g - s) % g).find(|&j| valid[j]);
            let right = (1..g).map(|s| (k + s) % g).find(|&j| valid[j]);
            if let (Some(l), Some(r)) = (left, right) {
                out[k] = (raw[l] + raw[r]) * T::lit(0.5);
            }
        }
    }
    Ok((GridFunction::new(out)?, excluded))
}

/// Solve the best anticausal approximation problem for `g`.
pub fn solve<T: Real>(
    g: &LaurentSeries<T>,
    opts: &SolveOptions<T>,
) -> Result<NehariSolution<T>, NehariError> {
    check_grid_size(opts.grid)?;
    let grid = opts.grid;
    let h = HankelMatrix::build(g, opts.order)?;
    let pair = top_singular(&h, &opts.power)?;
    let drift = if opts.check_drift {
        let big = hankel::hankel_norm(g, 2 * opts.order, &opts.power)?;
        Some(big.sigma - pair.sigma)
    } else {
        None
    };
    let mut flags = SolutionFlags {
        non_simple_sigma: pair.non_simple,
        rank_zero: pair.rank_zero,
        not_converged: !pair.converged,
        drifting: drift.is_some_and(|dr| dr.abs() > T::lit(1e-6) * pair.sigma),
        non_flat: false,
    };

    if pair.rank_zero {
        let f_opt = g.project_hperp();
        let residual = GridFunction::from_series(&g.project_h2(), grid)?;
        let achieved = residual.norm_sup();
        return Ok(NehariSolution {
            d: T::zero(),
            sigma2_estimate: T::zero(),
            f_opt,
            flatness_dev: achieved,
            h2_leakage: T::zero(),
            achieved_sup: achieved,
            residual,
            dual_pairing: czero(),
            x_opt_l1: T::zero(),
            h1_0_leakage: T::zero(),
            modulus_agreement: T::zero(),
            excluded_points: 0,
            drift,
            gap: None,
            pair,
            flags,
        });
    }

    let d = pair.sigma;
    let ry = pair.y.reverse();
    let gamma_y = g.multiply(&ry).project_h2();
    let num = GridFunction::from_series(&gamma_y, grid)?;
    let den = GridFunction::from_series(&ry, grid)?;
    let floor = T::lit(DIVISION_FLOOR) * pair.y.l2_norm();
    let (residual, excluded) = guarded_division(&num, &den, floor)?;

    let half = (grid / 2) as i64;
    let r_coeffs = residual.to_series_centered();
    let h2_leakage = (-half..=0)
        .map(|n| (r_coeffs.coeff(n) - g.coeff(n)).norm())
        .fold(T::zero(), T::max);
    let keep = (half - g.causal_width() as i64).clamp(1, half - 1);
    let correction = r_coeffs.restrict(1, keep).drop_below(T::lit(COEFF_DROP));
    let f_opt = (&g.project_hperp() - &correction).drop_below(T::lit(COEFF_DROP));
    let achieved_sup = GridFunction::from_series(&(g - &f_opt), grid)?.norm_sup();

    let flatness_dev = flatness_check(&residual, d);
    flags.non_flat = flatness_dev > T::lit(FLATNESS_TOL);
    let cert = dual_certificate(g, &pair, grid)?;
    let agreement = modulus_agreement(&pair, grid)?;

    Ok(NehariSolution {
        d,
        sigma2_estimate: pair.sigma2_estimate,
        f_opt,
        residual,
        flatness_dev,
        h2_leakage,
        achieved_sup,
        dual_pairing: cert.pairing,
        x_opt_l1: cert.x_l1,
        h1_0_leakage: cert.h1_0_leakage,
        modulus_agreement: agreement,
        excluded_points: excluded,
        drift,
        gap: None,
        pair,
        flags,
    })
}

/// Outcome of the weak duality inequality `||g - f||_inf >= sigma_N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct WeakDuality<T: Real> {
    pub holds: bool,
    /// Grid sup of `g - f` (max of the `G` and `2G` grids).
    pub primal_sup: T,
    pub sigma: T,
    /// Refinement delta plus a rounding allowance.
    pub eps_grid: T,
}

pub fn weak_duality_check<T: Real>(
    g: &LaurentSeries<T>,
    f_candidate: &LaurentSeries<T>,
    order: usize,
    grid: usize,
    power: &PowerIteration<T>,
) -> Result<WeakDuality<T>, NehariError> {
    if !f_candidate.in_hperp() {
        return Err(NehariError::NotAnticausal);
    }
    let sigma = hankel::hankel_norm(g, order, power)?.sigma;
    let (primal_sup, delta) = sup_with_refinement(&(g - f_candidate), grid)?;
    let eps_grid = delta + T::epsilon() * T::lit(1e3) * sigma.max(T::one());
    Ok(WeakDuality {
        holds: primal_sup >= sigma - eps_grid,
        primal_sup,
        sigma,
        eps_grid,
    })
}

/// Spread of solutions across power-iteration seeds.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniquenessReport<T: Real> {
    /// Max pairwise sup distance of the complex residual grids.
    pub residual_distance: T,
    /// Same for the residual moduli.
    pub modulus_distance: T,
    /// Max pairwise largest-coefficient distance of `f_opt`.
    pub f_opt_distance: T,
    pub runs: usize,
}

impl<T: Real> UniquenessReport<T> {
    pub fn max_distance(&self) -> T {
        self.residual_distance
            .max(self.modulus_distance)
            .max(self.f_opt_distance)
    }
}

pub fn uniqueness_probe<T: Real>(
    g: &LaurentSeries<T>,
    opts: &SolveOptions<T>,
    seeds: &[u64],
) -> Result<UniquenessReport<T>, NehariError> {
    let opts = SolveOptions {
        check_drift: false,
        ..*opts
    };
    let mut sols = Vec::with_capacity(seeds.len());
    for &seed in seeds {
        let sol = solve(g, &opts.with_seed(seed))?;
        if sol.flags.non_simple_sigma {
            return Err(NehariError::DegenerateSigma {
                sigma1: sol.d.to_f64_lossy(),
                sigma2: sol.sigma2_estimate.to_f64_lossy(),
            });
        }
        sols.push(sol);
    }
    let mut rep = UniquenessReport {
        residual_distance: T::zero(),
        modulus_distance: T::zero(),
        f_opt_distance: T::zero(),
        runs: sols.len(),
    };
    for (i, a) in sols.iter().enumerate() {
        for b in &sols[i + 1..] {
            rep.residual_distance = rep
                .residual_distance
                .max(a.residual.sup_distance(&b.residual));
            let ma = a.residual.map(|c| C::new(c.norm(), T::zero()));
            let mb = b.residual.map(|c| C::new(c.norm(), T::zero()));
            rep.modulus_distance = rep.modulus_distance.max(ma.sup_distance(&mb));
            rep.f_opt_distance = rep.f_opt_distance.max((&a.f_opt - &b.f_opt).max_abs());
        }
    }
    Ok(rep)
}

/// Optimal value computed on the transformed problem
/// `inf_{h in H_inf} ||qRg - h||_inf`, whose Hankel matrix reads the
/// coefficients of `qRg` at `n >= 1`.
pub fn transformed_distance<T: Real>(
    g: &LaurentSeries<T>,
    order: usize,
    power: &PowerIteration<T>,
) -> Result<NormEstimate<T>, NehariError> {
    let phi = g.reverse().shift_q();
    let h = HankelMatrix::build_coanalytic(&phi, order)?;
    matrix_norm(&h, &power.with_seed(power.seed.wrapping_add(1)))
}

/// Random anticausal perturbation used by sweeps.
pub fn random_anticausal<T: Real>(
    rng: &mut ChaCha8Rng,
    degree: usize,
    magnitude: f64,
) -> LaurentSeries<T> {
    let coeffs = (0..degree)
        .map(|_| {
            C::new(
                T::lit(rng.random_range(-magnitude..=magnitude)),
                T::lit(rng.random_range(-magnitude..=magnitude)),
            )
        })
        .collect();
    LaurentSeries::new(1, coeffs)
}

/// Seeded generator shared by the randomized helpers.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
