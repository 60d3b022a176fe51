//! Nonincreasing profiles on `(0, 1]`, the averaging operator
//! `(Hg)(t) = (1/t)∫₀ᵗ g`, and the continuous-side inequality machinery:
//! power-law families with closed-form integrals, the averaged sharp bound,
//! and the sharpness sweeps that chase its best constant.
//!
//! Two kinds of profile are supported. Step profiles (a [`Rearranged`],
//! typically a decreasing rearrangement from the tree side) integrate
//! exactly where possible; the only quadrature in the crate happens here,
//! where `∫(Hg)^r` over one segment has integrand `(a + b/t)^r` for
//! arbitrary real `r` — smooth on the segment, handled by adaptive
//! Gauss–Kronrod refinement with the error budget split across segments.
//! Power laws `g(t) = c·t^(−α)` never touch quadrature: every integral the
//! sharpness analysis needs has a closed form, so those checks are not
//! polluted by quadrature error.

use crate::bellman::{a0, bound_coefficients};
use crate::maximal::GapReport;
use crate::tree::Rearranged;
use crate::{numeric, Error, Result};
use std::collections::BTreeMap;

/// Total absolute error budget for the step-profile quadrature paths.
const QUAD_TOL: f64 = 1e-10;

/// `g(t) = c·t^(−α)` on `(0, 1]` with `c ≥ 0` and `α ∈ [0, 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerLaw {
    scale: f64,
    alpha: f64,
}

impl PowerLaw {
    pub fn new(scale: f64, alpha: f64) -> Result<Self> {
        if !(scale.is_finite() && scale >= 0.0) {
            return Err(Error::domain(format!(
                "power-law scale must be finite and nonnegative (got {scale})"
            )));
        }
        if !(alpha.is_finite() && (0.0..1.0).contains(&alpha)) {
            return Err(Error::domain(format!(
                "power-law exponent must lie in [0, 1) (got {alpha})"
            )));
        }
        Ok(PowerLaw { scale, alpha })
    }

    /// The member of the family with mean `f` and parameter `β`:
    /// `α = β/(β+1)`, `c = f·(1−α)`, so that `∫₀¹ g = f`.
    pub fn from_mean_and_beta(f: f64, beta: f64) -> Result<Self> {
        if !(f.is_finite() && f >= 0.0) {
            return Err(Error::domain(format!("mean must be >= 0 (got {f})")));
        }
        if !(beta.is_finite() && beta >= 0.0) {
            return Err(Error::domain(format!("beta must be >= 0 (got {beta})")));
        }
        let alpha = beta / (beta + 1.0);
        PowerLaw::new(f * (1.0 - alpha), alpha)
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// The `β` with `α = β/(β+1)`.
    pub fn beta(&self) -> f64 {
        self.alpha / (1.0 - self.alpha)
    }

    pub fn value_at(&self, t: f64) -> f64 {
        self.scale * t.powf(-self.alpha)
    }

    /// `∫₀¹ g = c/(1−α)`.
    pub fn integral(&self) -> f64 {
        self.scale / (1.0 - self.alpha)
    }

    /// `∫₀ᵗ g = c·t^{1−α}/(1−α)` for `t ∈ [0, 1]`.
    pub fn integral_up_to(&self, t: f64) -> f64 {
        if self.alpha == 0.0 {
            return self.scale * t;
        }
        self.scale * t.powf(1.0 - self.alpha) / (1.0 - self.alpha)
    }

    /// `∫₀¹ g^r = c^r/(1−αr)`, defined when `αr < 1` (otherwise `g ∉ L^r`).
    pub fn lp_integral(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::domain(format!("exponent must be positive (got {r})")));
        }
        if self.alpha * r >= 1.0 {
            return Err(Error::domain(format!(
                "profile is not r-integrable: alpha*r = {} >= 1",
                self.alpha * r
            )));
        }
        Ok(self.scale.powf(r) / (1.0 - self.alpha * r))
    }
}

/// A nonincreasing profile: either a step profile with exact segment
/// arithmetic or a closed-form power law.
#[derive(Debug, Clone)]
pub enum Profile {
    Step(Rearranged),
    Power(PowerLaw),
}

/// One maximal constant segment of a step profile, with its averaging
/// coefficients: on `(lo, hi]` the profile equals `value` and
/// `Hg(t) = a + b/t`.
struct Piece {
    lo: f64,
    hi: f64,
    a: f64,
    b: f64,
    value: f64,
}

fn pieces(profile: &Rearranged) -> Vec<Piece> {
    let mut out = Vec::with_capacity(profile.segment_count());
    let mut prefix = 0.0;
    let mut lo = 0.0;
    for (&hi, &value) in profile.breakpoints().iter().zip(profile.values()) {
        // ∫₀ᵗ g = prefix + value·(t − lo) on this segment, so the average
        // is value + (prefix − value·lo)/t; b ≥ 0 because g is
        // nonincreasing. The first segment always has b = 0: no quadrature
        // ever sees the t → 0 endpoint.
        out.push(Piece {
            lo,
            hi,
            a: value,
            b: prefix - value * lo,
            value,
        });
        prefix += value * (hi - lo);
        lo = hi;
    }
    out
}

fn check_unit_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0 && t <= 1.0) {
        return Err(Error::domain(format!("time must lie in (0, 1] (got {t})")));
    }
    Ok(())
}

impl Profile {
    /// `∫₀¹ g`.
    pub fn integral(&self) -> f64 {
        match self {
            Profile::Step(r) => r.integral(),
            Profile::Power(g) => g.integral(),
        }
    }

    /// `g(t)` for `t ∈ (0, 1]`.
    pub fn value_at(&self, t: f64) -> Result<f64> {
        check_unit_time(t)?;
        Ok(match self {
            Profile::Step(r) => r.value_at(t),
            Profile::Power(g) => g.value_at(t),
        })
    }

    /// `∫₀ᵗ g` for `t ∈ [0, 1]`: an exact prefix sum for step profiles, a
    /// closed form for power laws.
    pub fn integral_up_to(&self, t: f64) -> Result<f64> {
        if !(t.is_finite() && (0.0..=1.0).contains(&t)) {
            return Err(Error::domain(format!("time must lie in [0, 1] (got {t})")));
        }
        Ok(match self {
            Profile::Step(r) => r.integral_up_to(t),
            Profile::Power(g) => g.integral_up_to(t),
        })
    }

    /// `(Hg)(t) = (1/t)∫₀ᵗ g` for `t ∈ (0, 1]`: an exact prefix sum for
    /// step profiles, `c·t^(−α)/(1−α)` for power laws.
    pub fn hardy_average(&self, t: f64) -> Result<f64> {
        check_unit_time(t)?;
        Ok(match self {
            Profile::Step(r) => r.integral_up_to(t) / t,
            Profile::Power(g) => g.value_at(t) / (1.0 - g.alpha()),
        })
    }

    /// `∫₀¹ g^r`: exact for step profiles, closed form for power laws.
    pub fn lp_integral(&self, r: f64) -> Result<f64> {
        match self {
            Profile::Step(rr) => rr.power_integral(r),
            Profile::Power(g) => g.lp_integral(r),
        }
    }

    /// `∫₀¹ (Hg)^p dt`.
    pub fn hardy_power_integral(&self, p: f64) -> Result<f64> {
        if !(p.is_finite() && p >= 1.0) {
            return Err(Error::domain(format!("exponent must satisfy p >= 1 (got {p})")));
        }
        match self {
            Profile::Power(g) => {
                if g.alpha() * p >= 1.0 {
                    return Err(Error::domain(format!(
                        "averaged profile is not p-integrable: alpha*p = {} >= 1",
                        g.alpha() * p
                    )));
                }
                Ok((g.scale() / (1.0 - g.alpha())).powf(p) / (1.0 - g.alpha() * p))
            }
            Profile::Step(r) => Ok(integrate_pieces(&pieces(r), |piece, t| {
                (piece.a + piece.b / t).powf(p)
            })),
        }
    }

    /// `∫₀¹ (Hg)^{p−q}·g^q dt`.
    pub fn cross_integral(&self, p: f64, q: f64) -> Result<f64> {
        if !(p.is_finite() && p > 1.0 && q.is_finite() && (1.0..=p).contains(&q)) {
            return Err(Error::domain(format!(
                "cross integral needs p > 1 and q in [1, p] (got p = {p}, q = {q})"
            )));
        }
        match self {
            Profile::Power(g) => {
                if g.alpha() * p >= 1.0 {
                    return Err(Error::domain(format!(
                        "averaged profile is not p-integrable: alpha*p = {} >= 1",
                        g.alpha() * p
                    )));
                }
                let scaled = g.scale() / (1.0 - g.alpha());
                Ok(scaled.powf(p - q) * g.scale().powf(q) / (1.0 - g.alpha() * p))
            }
            Profile::Step(r) => Ok(integrate_pieces(&pieces(r), |piece, t| {
                (piece.a + piece.b / t).powf(p - q) * piece.value.powf(q)
            })),
        }
    }
}

/// Integrates `f(piece, t)` over every segment, exactly on segments where
/// the average is constant (`b = 0`) and by adaptive quadrature elsewhere,
/// with the absolute error budget split across segments by length.
fn integrate_pieces(pieces: &[Piece], f: impl Fn(&Piece, f64) -> f64) -> f64 {
    let terms: Vec<f64> = pieces
        .iter()
        .map(|piece| {
            let len = piece.hi - piece.lo;
            if piece.b == 0.0 {
                f(piece, piece.hi) * len
            } else {
                let tol = (QUAD_TOL * len).max(1e-14);
                numeric::integrate_adaptive(&|t| f(piece, t), piece.lo, piece.hi, tol).0
            }
        })
        .collect();
    numeric::pairwise_sum(&terms)
}

/// The averaged sharp bound on a nonincreasing profile:
///
/// ```text
/// ∫₀¹ (Hg)^p dt ≤ −c1·f^p + c2·∫₀¹ (Hg)^{p−q} g^q dt,   f = ∫₀¹ g,
/// ```
///
/// with the `(c1, c2)` of [`bound_coefficients`]. Components carry both gap
/// conventions: the direct `rhs − lhs` in `gap`, and the lower-bound
/// arrangement as `residual41 = K − A₀·L` next to its extremal target
/// `jExpected = (q/p)(β+1)^{1−q}·f^p`, whose difference is `gap41`.
pub fn hardy_bound_report(g: &Profile, p: f64, q: f64, beta: f64) -> Result<GapReport> {
    let (c1, c2) = bound_coefficients(p, q, beta)?;
    let a = a0(beta, p, q)?;
    let f = g.integral();
    let lhs = g.hardy_power_integral(p)?;
    let cross = g.cross_integral(p, q)?;
    let rhs = -c1 * f.powf(p) + c2 * cross;
    let j_expected = (q / p) * (beta + 1.0).powf(1.0 - q) * f.powf(p);
    let residual41 = cross - a * lhs;
    let mut components = BTreeMap::new();
    components.insert("f".into(), f);
    components.insert("c1".into(), c1);
    components.insert("c2".into(), c2);
    components.insert("a0".into(), a);
    components.insert("crossIntegral".into(), cross);
    components.insert("jExpected".into(), j_expected);
    components.insert("residual41".into(), residual41);
    components.insert("gap41".into(), residual41 - j_expected);
    Ok(GapReport::le_claim(lhs, rhs, components))
}

/// One sharpness sample: the normalized extremal gap `ratio` at parameter
/// `param`, against the limiting constant `q/(p−1)`.
#[derive(Debug, Clone, Copy)]
pub struct SweepPoint {
    pub param: f64,
    pub ratio: f64,
    pub limit: f64,
    pub abs_err: f64,
}

/// The normalized gap of the power-law family `g_α`:
/// `((p/(p−1))^q (1−α)^q − 1)/(1 − αp)`, defined for `α ∈ (0, 1/p)`.
/// Tends to `q/(p−1)` as `α ↑ 1/p`.
pub fn sharpness_ratio(p: f64, q: f64, alpha: f64) -> Result<f64> {
    if !(p.is_finite() && p > 1.0 && q.is_finite() && (1.0..=p).contains(&q)) {
        return Err(Error::domain(format!(
            "sharpness ratio needs p > 1 and q in [1, p] (got p = {p}, q = {q})"
        )));
    }
    if !(alpha.is_finite() && alpha > 0.0 && alpha < 1.0 / p) {
        return Err(Error::domain(format!(
            "alpha must lie in (0, 1/p) (got alpha = {alpha}, p = {p})"
        )));
    }
    let strong = (p / (p - 1.0)).powf(q);
    Ok((strong * (1.0 - alpha).powf(q) - 1.0) / (1.0 - alpha * p))
}

/// Evaluates [`sharpness_ratio`] on a grid of `α` values.
pub fn sharpness_sweep(p: f64, q: f64, alphas: &[f64]) -> Result<Vec<SweepPoint>> {
    let limit = q / (p - 1.0);
    alphas
        .iter()
        .map(|&alpha| {
            let ratio = sharpness_ratio(p, q, alpha)?;
            Ok(SweepPoint {
                param: alpha,
                ratio,
                limit,
                abs_err: (ratio - limit).abs(),
            })
        })
        .collect()
}

/// The same sweep in the `β` parametrization (`α = β/(β+1)`, so the grid
/// approaches `β = 1/(p−1)`), for the β-flavored CSV output.
pub fn beta_sweep(p: f64, q: f64, betas: &[f64]) -> Result<Vec<SweepPoint>> {
    let limit = q / (p - 1.0);
    betas
        .iter()
        .map(|&beta| {
            if !(beta.is_finite() && beta > 0.0) {
                return Err(Error::domain(format!("beta must be positive (got {beta})")));
            }
            let ratio = sharpness_ratio(p, q, beta / (beta + 1.0))?;
            Ok(SweepPoint {
                param: beta,
                ratio,
                limit,
                abs_err: (ratio - limit).abs(),
            })
        })
        .collect()
}

/// Grid of `α` values approaching `1/p` geometrically: the distances
/// `1/p − α` are log-spaced from `first_gap` down to `last_gap`. The
/// endpoint itself is never produced (the profile leaves `L^p` there).
pub fn geometric_alpha_grid(
    p: f64,
    first_gap: f64,
    last_gap: f64,
    count: usize,
) -> Result<Vec<f64>> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::domain(format!("exponent must satisfy p > 1 (got {p})")));
    }
    let cap = 1.0 / p;
    if !(0.0 < last_gap && last_gap <= first_gap && first_gap < cap) {
        return Err(Error::domain(
            "need 0 < last_gap <= first_gap < 1/p for the sweep grid",
        ));
    }
    if count < 2 {
        return Err(Error::domain("sweep grid needs at least two points"));
    }
    let ratio = (last_gap / first_gap).ln() / (count as f64 - 1.0);
    Ok((0..count)
        .map(|k| cap - first_gap * (ratio * k as f64).exp())
        .collect())
}

/// Renders sweep points as CSV with header `<param_name>,G,limit,abs_err`.
pub fn sweep_csv(points: &[SweepPoint], param_name: &str) -> String {
    let mut out = format!("{param_name},G,limit,abs_err\n");
    for point in points {
        out.push_str(&format!(
            "{},{},{},{}\n",
            point.param, point.ratio, point.limit, point.abs_err
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bellman::g_beta;
    use crate::tree::{make_tree, StepFunction};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_profile(rng: &mut ChaCha8Rng, max_arity: u32, max_depth: u32) -> Rearranged {
        let arity = rng.gen_range(2..=max_arity);
        let depth = rng.gen_range(1..=max_depth);
        let config = make_tree(arity, depth).unwrap();
        let values = (0..config.leaf_count())
            .map(|_| {
                if rng.gen_bool(0.2) {
                    0.0
                } else {
                    rng.gen_range(0.0..4.0)
                }
            })
            .collect();
        StepFunction::new(config, values)
            .unwrap()
            .decreasing_rearrangement()
    }

    #[test]
    fn powerlaw_construction_and_accessors() {
        let g = PowerLaw::from_mean_and_beta(1.0, 0.5).unwrap();
        assert!((g.alpha() - 1.0 / 3.0).abs() < 1e-15);
        assert!((g.scale() - 2.0 / 3.0).abs() < 1e-15);
        assert!((g.beta() - 0.5).abs() < 1e-14);
        assert!((g.integral() - 1.0).abs() < 1e-15);
        assert!(PowerLaw::new(-1.0, 0.5).is_err());
        assert!(PowerLaw::new(1.0, 1.0).is_err());
        assert!(PowerLaw::from_mean_and_beta(1.0, -0.5).is_err());
    }

    #[test]
    fn powerlaw_integrals_match_closed_forms() {
        let flat = PowerLaw::new(0.7, 0.0).unwrap();
        assert!((flat.lp_integral(2.5).unwrap() - 0.7f64.powf(2.5)).abs() < 1e-15);

        let g = PowerLaw::from_mean_and_beta(1.0, 0.5).unwrap();
        let got = g.lp_integral(2.0).unwrap();
        assert!((got - 4.0 / 3.0).abs() < 1e-14);
        assert!((got - g_beta(0.5, 2.0).unwrap()).abs() < 1e-14);

        let direct = PowerLaw::new(0.6, 0.4).unwrap();
        assert!((direct.lp_integral(2.0).unwrap() - 1.8).abs() < 1e-14);
        assert!(direct.lp_integral(2.5).is_err());
    }

    #[test]
    fn powerlaw_lp_matches_mass_ratio_across_parameters() {
        for p in [1.5, 2.0, 3.0] {
            for k in 0..20 {
                let beta = (1.0 / (p - 1.0)) * (k as f64 + 0.5) / 21.0;
                let f = 1.3;
                let g = PowerLaw::from_mean_and_beta(f, beta).unwrap();
                let expected = f.powf(p) * g_beta(beta, p).unwrap();
                let got = g.lp_integral(p).unwrap();
                assert!(
                    (got - expected).abs() <= 1e-12 * expected,
                    "p = {p}, beta = {beta}"
                );
            }
        }
    }

    #[test]
    fn hardy_average_fixed_profiles() {
        let constant = Profile::Step(
            Rearranged::from_segments(vec![1.0], vec![1.5]).unwrap(),
        );
        // Dyadic times keep the prefix-sum division exact; a general t is
        // exact only up to one rounding in (1.5·t)/t.
        for t in [0.25, 0.5, 1.0] {
            assert_eq!(constant.hardy_average(t).unwrap(), 1.5);
        }
        assert!((constant.hardy_average(0.1).unwrap() - 1.5).abs() < 1e-15);
        let two_step = Profile::Step(
            Rearranged::from_segments(vec![0.5, 1.0], vec![2.0, 0.0]).unwrap(),
        );
        assert_eq!(two_step.hardy_average(1.0).unwrap(), 1.0);
        assert_eq!(two_step.hardy_average(0.25).unwrap(), 2.0);
        assert!((two_step.hardy_average(0.75).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!(two_step.hardy_average(0.0).is_err());
        assert!(two_step.hardy_average(1.5).is_err());
    }

    #[test]
    fn powerlaw_average_is_an_eigenrelation() {
        let g = PowerLaw::from_mean_and_beta(1.2, 0.7).unwrap();
        let profile = Profile::Power(g);
        for k in 1..=100 {
            let t = k as f64 / 100.0;
            let lhs = profile.hardy_average(t).unwrap();
            let rhs = (g.beta() + 1.0) * g.value_at(t);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs().max(1.0), "t = {t}");
        }
    }

    #[test]
    fn hardy_average_dominates_and_decreases() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a5d_0001);
        for _ in 0..50 {
            let profile = Profile::Step(random_profile(&mut rng, 4, 5));
            let mut prev = f64::INFINITY;
            for k in 1..=64 {
                let t = k as f64 / 64.0;
                let avg = profile.hardy_average(t).unwrap();
                assert!(avg <= prev + 1e-12 * prev.abs().max(1.0));
                assert!(avg >= profile.value_at(t).unwrap() - 1e-12);
                prev = avg;
            }
        }
    }

    #[test]
    fn step_hardy_power_integral_matches_midpoint_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a5d_0002);
        for _ in 0..10 {
            let profile = Profile::Step(random_profile(&mut rng, 3, 4));
            for p in [1.5, 2.0, 2.7] {
                let got = profile.hardy_power_integral(p).unwrap();
                let n = 100_000;
                let mid: f64 = (0..n)
                    .map(|i| {
                        let t = (i as f64 + 0.5) / n as f64;
                        profile.hardy_average(t).unwrap().powf(p)
                    })
                    .sum::<f64>()
                    / n as f64;
                assert!(
                    (got - mid).abs() <= 1e-6 * mid.abs().max(1.0),
                    "p = {p}: {got} vs {mid}"
                );
            }
        }
    }

    #[test]
    fn cross_integral_degenerates_to_mass_at_q_equals_p() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a5d_0003);
        for _ in 0..20 {
            let raw = random_profile(&mut rng, 4, 4);
            let profile = Profile::Step(raw.clone());
            for p in [1.5, 2.0, 3.0] {
                let cross = profile.cross_integral(p, p).unwrap();
                let mass = raw.power_integral(p).unwrap();
                assert!((cross - mass).abs() <= 1e-10 * mass.abs().max(1.0));
            }
        }
    }

    #[test]
    fn averaged_bound_is_exact_at_the_classical_point() {
        // q = 1, β = 1/(p−1) turns the bound into an identity for every
        // profile; the residual measures quadrature error only.
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a5d_0004);
        for _ in 0..30 {
            let profile = Profile::Step(random_profile(&mut rng, 4, 5));
            for p in [1.5, 2.0, 3.0] {
                let report = hardy_bound_report(&profile, p, 1.0, 1.0 / (p - 1.0)).unwrap();
                assert!(
                    report.gap.abs() <= 1e-9 * report.rhs.abs().max(1.0),
                    "p = {p}: gap {}",
                    report.gap
                );
            }
        }
    }

    #[test]
    fn averaged_bound_holds_on_random_profiles_and_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x4a5d_0005);
        for _ in 0..60 {
            let profile = Profile::Step(random_profile(&mut rng, 4, 5));
            let p = rng.gen_range(1.3..3.5);
            let q = 1.0 + (p - 1.0) * rng.gen_range(0.0..1.0);
            let beta = rng.gen_range(0.01..2.5);
            let report = hardy_bound_report(&profile, p, q, beta).unwrap();
            assert!(
                report.holds(1e-9 * report.rhs.abs().max(1.0)),
                "gap {} at p={p} q={q} beta={beta}",
                report.gap
            );
        }
    }

    #[test]
    fn matched_powerlaw_residual_hits_the_extremal_value() {
        // For the matched family the lower-bound arrangement leaves exactly
        // the transfer term J = (q/p)(β+1)^{1−q} f^p.
        for p in [1.5, 2.0, 3.0] {
            for qs in 1..6 {
                let q = 1.0 + (p - 1.0) * qs as f64 / 6.0;
                for ks in 0..6 {
                    let beta = (1.0 / (p - 1.0)) * (ks as f64 + 0.4) / 6.4;
                    let f = 1.1;
                    let g = PowerLaw::from_mean_and_beta(f, beta).unwrap();
                    let report = hardy_bound_report(&Profile::Power(g), p, q, beta).unwrap();
                    let residual = report.components["residual41"];
                    let j = report.components["jExpected"];
                    assert!(
                        (residual - j).abs() <= 1e-12 * j.abs().max(1.0),
                        "p={p} q={q} beta={beta}: residual {residual} vs J {j}"
                    );
                    assert!(report.components["gap41"].abs() <= 1e-12 * j.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn constant_profile_gap_is_the_coefficient_excess() {
        let profile = Profile::Step(
            Rearranged::from_segments(vec![1.0], vec![1.3]).unwrap(),
        );
        for (p, q, beta) in [(2.0, 1.5, 0.4), (3.0, 2.0, 0.8), (1.7, 1.0, 0.2)] {
            let report = hardy_bound_report(&profile, p, q, beta).unwrap();
            let (c1, c2) = bound_coefficients(p, q, beta).unwrap();
            let expected = (c2 - c1 - 1.0) * 1.3f64.powf(p);
            assert!(
                (report.gap - expected).abs() <= 1e-12 * expected.abs().max(1.0),
                "p={p} q={q} beta={beta}"
            );
            assert!(report.gap >= -1e-12);
        }
    }

    #[test]
    fn sharpness_ratio_fixed_values() {
        assert_eq!(sharpness_ratio(2.0, 1.0, 0.25).unwrap(), 1.0);
        // α → 0 recovers (p/(p−1))^q − 1.
        for (p, q) in [(2.0, 2.0), (3.0, 1.5), (1.5, 1.2)] {
            let near_zero = sharpness_ratio(p, q, 1e-12).unwrap();
            let expected = (p / (p - 1.0)).powf(q) - 1.0;
            assert!((near_zero - expected).abs() <= 1e-9 * expected.max(1.0));
        }
        let near_limit = sharpness_ratio(2.0, 2.0, 0.5 - 1e-6).unwrap();
        assert!((near_limit - 2.0).abs() <= 1e-3 * 2.0);
        assert!(sharpness_ratio(2.0, 2.0, 0.5).is_err());
        assert!(sharpness_ratio(2.0, 2.0, 0.0).is_err());
    }

    #[test]
    fn sweeps_converge_to_the_limit() {
        for (p, q) in [(2.0, 2.0), (3.0, 1.5), (1.5, 1.2)] {
            let grid = geometric_alpha_grid(p, 0.2 / p, 1e-6, 24).unwrap();
            let points = sharpness_sweep(p, q, &grid).unwrap();
            for pair in points.windows(2) {
                assert!(
                    pair[1].abs_err < pair[0].abs_err,
                    "p={p} q={q}: {} then {}",
                    pair[0].abs_err,
                    pair[1].abs_err
                );
            }
            let last = points.last().unwrap();
            assert!(last.abs_err <= 1e-3 * last.limit.max(1.0));
            assert!((last.limit - q / (p - 1.0)).abs() < 1e-15);
        }
    }

    #[test]
    fn beta_sweep_mirrors_the_alpha_parametrization() {
        let betas = [0.2, 0.5, 0.8, 0.95];
        let points = beta_sweep(2.0, 1.5, &betas).unwrap();
        for (point, &beta) in points.iter().zip(&betas) {
            let alpha = beta / (beta + 1.0);
            let direct = sharpness_ratio(2.0, 1.5, alpha).unwrap();
            assert_eq!(point.ratio, direct);
            assert_eq!(point.param, beta);
        }
        assert!(beta_sweep(2.0, 1.5, &[0.0]).is_err());
    }

    #[test]
    fn sweep_grid_is_geometric_and_monotone() {
        let grid = geometric_alpha_grid(2.0, 0.1, 1e-5, 12).unwrap();
        assert_eq!(grid.len(), 12);
        assert!((grid[0] - 0.4).abs() < 1e-12);
        assert!((grid[11] - (0.5 - 1e-5)).abs() < 1e-12);
        for pair in grid.windows(2) {
            assert!(pair[1] > pair[0]);
        }
        assert!(geometric_alpha_grid(2.0, 1e-5, 0.1, 12).is_err());
        assert!(geometric_alpha_grid(2.0, 0.6, 1e-5, 12).is_err());
    }

    #[test]
    fn sweep_csv_layout() {
        let points = sharpness_sweep(2.0, 1.0, &[0.25]).unwrap();
        let text = sweep_csv(&points, "alpha");
        assert_eq!(text, "alpha,G,limit,abs_err\n0.25,1,1,0\n");
        let beta_points = beta_sweep(2.0, 1.0, &[0.5]).unwrap();
        let beta_text = sweep_csv(&beta_points, "beta");
        assert!(beta_text.starts_with("beta,G,limit,abs_err\n0.5,"));
    }
}
