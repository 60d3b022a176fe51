//! Scalar building blocks: the concave profile `H_p`, its inverse `ω_p`, the
//! Bellman value of the maximal problem, the coefficient pair of the sharp
//! bound, the constant `A_0(β)` of its equivalent form, the power-law mass
//! ratio `G(β)`, and the solver recovering `β` from `(f, F)`.
//!
//! Everything here is a pure function of a handful of reals. The only
//! iterative piece is the inversion of `H_p`, done by bisection over the
//! bracket `[1, p/(p−1)]` (where `H_p` is strictly decreasing) down to a
//! width of `1e−14`, then polished by one guarded Newton step. Bisection is
//! deliberate: `H_p′` vanishes at the left endpoint, so an unguarded Newton
//! iteration is fragile exactly where the verification work needs `ω_p` most
//! (near `z = 1`).

use crate::{Error, Result};

/// `H_p(z) = −(p−1)·z^p + p·z^{p−1}` for `z ≥ 0`.
pub fn h_p(z: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if !(z.is_finite() && z >= 0.0) {
        return Err(Error::domain(format!("h_p needs z >= 0 (got {z})")));
    }
    Ok(-(p - 1.0) * z.powf(p) + p * z.powf(p - 1.0))
}

/// Upper endpoint of the inversion bracket, `p/(p−1)`, where `H_p` hits 0.
pub fn omega_upper(p: f64) -> f64 {
    p / (p - 1.0)
}

/// `ω_p(z) = H_p^{−1}(z)` for `z ∈ (0, 1]`, valued in `[1, p/(p−1)]`.
///
/// `z = 0` is excluded: it maps to the endpoint `p/(p−1)`, which callers can
/// use directly instead of asking the root-finder for a limit.
pub fn omega_p(z: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if !(z.is_finite() && z > 0.0 && z <= 1.0) {
        return Err(Error::domain(format!(
            "omega_p needs z in (0, 1] (got {z})"
        )));
    }
    // H_p(1) = 1 with H_p′(1) = 0: the inverse is exact here but the
    // root-finder cannot resolve the flat spot, so answer directly.
    if z == 1.0 {
        return Ok(1.0);
    }
    let h = |w: f64| -(p - 1.0) * w.powf(p) + p * w.powf(p - 1.0);
    let mut lo = 1.0;
    let mut hi = omega_upper(p);
    // H is strictly decreasing on [lo, hi] with H(lo) = 1 >= z > 0 = H(hi).
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if h(mid) >= z {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut w = 0.5 * (lo + hi);
    // One Newton step, kept only when it lands in the bracket and improves
    // the residual; the derivative vanishes at w = 1, hence the guards.
    let derivative = p * (p - 1.0) * w.powf(p - 2.0) * (1.0 - w);
    if derivative != 0.0 {
        let candidate = w - (h(w) - z) / derivative;
        if candidate >= 1.0
            && candidate <= omega_upper(p)
            && (h(candidate) - z).abs() < (h(w) - z).abs()
        {
            w = candidate;
        }
    }
    Ok(w)
}

/// `B(f, F) = F·ω_p(f^p/F)^p`: the largest possible `∫(𝓜φ)^p` over
/// functions with mean `f` and `p`-mass `F`.
pub fn bellman_value(f: f64, big_f: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_mass_pair(f, big_f, p)?;
    let omega = omega_p(f.powf(p) / big_f, p)?;
    Ok(big_f * omega.powf(p))
}

/// Coefficients `(c1, c2)` of the sharp bound
/// `∫(𝓜φ)^p ≤ −c1·f^p + c2·∫φ^q (𝓜φ)^{p−q}`:
///
/// ```text
/// c1 = q(β+1)/D,   c2 = p(β+1)^q/D,   D = (p−1)qβ + (p−q).
/// ```
///
/// Defined for `q ∈ [1, p]` and `β ≥ 0` as long as `D > 0`, which only
/// excludes the degenerate corner `q = p`, `β = 0`.
pub fn bound_coefficients(p: f64, q: f64, beta: f64) -> Result<(f64, f64)> {
    check_pq_beta(p, q, beta)?;
    let d = (p - 1.0) * q * beta + (p - q);
    let c1 = q * (beta + 1.0) / d;
    let c2 = p * (beta + 1.0).powf(q) / d;
    Ok((c1, c2))
}

/// `A_0(β) = (q−1)β/(β+1)^q + ((p−q)/p)/(β+1)^{q−1}`, the coefficient of
/// `∫(𝓜φ)^p` in the equivalent form of the sharp bound. Always `1/c2`.
pub fn a0(beta: f64, p: f64, q: f64) -> Result<f64> {
    check_pq_beta(p, q, beta)?;
    Ok((q - 1.0) * beta / (beta + 1.0).powf(q)
        + ((p - q) / p) / (beta + 1.0).powf(q - 1.0))
}

/// `G(β) = 1/((β+1)^{p−1}·(1−β(p−1)))` for `β ∈ [0, 1/(p−1))`: the `p`-mass
/// of the normalized power-law profile with parameter `β`. Satisfies
/// `1/G(β) = H_p(β+1)`.
pub fn g_beta(beta: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    if !(beta.is_finite() && beta >= 0.0 && beta * (p - 1.0) < 1.0) {
        return Err(Error::domain(format!(
            "g_beta needs 0 <= beta < 1/(p-1) (got beta = {beta}, p = {p})"
        )));
    }
    Ok(1.0 / ((beta + 1.0).powf(p - 1.0) * (1.0 - beta * (p - 1.0))))
}

/// The unique `β ∈ [0, 1/(p−1))` with `G(β) = F/f^p`, recovered through
/// `β + 1 = ω_p(f^p/F)`.
pub fn solve_beta(f: f64, big_f: f64, p: f64) -> Result<f64> {
    check_p(p)?;
    check_mass_pair(f, big_f, p)?;
    Ok(omega_p(f.powf(p) / big_f, p)? - 1.0)
}

/// The full parameter tuple of the sharp-bound reports.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Params {
    pub p: f64,
    pub q: f64,
    pub beta: f64,
    pub f: f64,
    pub big_f: f64,
}

impl Params {
    /// Validates the verification ranges: `p > 1`, `q ∈ [1, p]`, `β ≥ 0`
    /// with `(p−1)qβ + (p−q) > 0`, `f > 0`, and `f^p ≤ F`.
    pub fn validate(&self) -> Result<()> {
        check_pq_beta(self.p, self.q, self.beta)?;
        check_mass_pair(self.f, self.big_f, self.p)
    }

    /// Additionally requires the sharpness window `0 < β ≤ 1/(p−1)`.
    pub fn validate_sharpness(&self) -> Result<()> {
        self.validate()?;
        if !(self.beta > 0.0 && self.beta <= 1.0 / (self.p - 1.0)) {
            return Err(Error::domain(format!(
                "sharpness mode needs 0 < beta <= 1/(p-1) (got beta = {}, p = {})",
                self.beta, self.p
            )));
        }
        Ok(())
    }

    /// The shared denominator `(p−1)qβ + (p−q)`.
    pub fn denominator(&self) -> f64 {
        (self.p - 1.0) * self.q * self.beta + (self.p - self.q)
    }
}

fn check_p(p: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::domain(format!("exponent must satisfy p > 1 (got {p})")));
    }
    Ok(())
}

fn check_pq_beta(p: f64, q: f64, beta: f64) -> Result<()> {
    check_p(p)?;
    if !(q.is_finite() && (1.0..=p).contains(&q)) {
        return Err(Error::domain(format!(
            "q must lie in [1, p] (got q = {q}, p = {p})"
        )));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain(format!("beta must be >= 0 (got {beta})")));
    }
    if (p - 1.0) * q * beta + (p - q) <= 0.0 {
        return Err(Error::domain(
            "degenerate parameters: q = p together with beta = 0",
        ));
    }
    Ok(())
}

fn check_mass_pair(f: f64, big_f: f64, p: f64) -> Result<()> {
    if !(f.is_finite() && f > 0.0 && big_f.is_finite() && big_f > 0.0) {
        return Err(Error::domain(format!(
            "mean and mass must be positive (got f = {f}, F = {big_f})"
        )));
    }
    if f.powf(p) > big_f {
        return Err(Error::domain(format!(
            "requires f^p <= F (got f^p = {}, F = {big_f})",
            f.powf(p)
        )));
    }
    Ok(())
}
