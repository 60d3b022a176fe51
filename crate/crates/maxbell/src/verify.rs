//! Discrete-side inequality reports: the two-parameter sharp bound on tree
//! step functions, its equivalent lower-bound arrangement, the classical
//! one-parameter specialization, and randomized oracles for the elementary
//! scalar inequalities the proofs lean on.
//!
//! Every integral here is a finite leaf sum with a fixed pairwise order, so
//! the reports carry no quadrature error — the gap of an equality case is
//! rounding noise only, and for dyadic-friendly parameters it is exactly
//! zero.

use crate::bellman::{a0, bound_coefficients};
use crate::maximal::{maximal_function, GapReport};
use crate::tree::StepFunction;
use crate::{numeric, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// `∫ φ^q (𝓜φ)^{p−q}` as an exact leaf sum. `q = 1` and `q = p` skip the
/// corresponding `powf` so those factors stay bit-exact.
fn cross_integral(phi: &StepFunction, maximal: &StepFunction, p: f64, q: f64) -> f64 {
    let phi_values = phi.values();
    let max_values = maximal.values();
    let n = phi_values.len();
    let total = numeric::pairwise_sum_by(n, &mut |i| {
        let source = if q == 1.0 {
            phi_values[i]
        } else {
            phi_values[i].powf(q)
        };
        if p == q {
            source
        } else {
            source * max_values[i].powf(p - q)
        }
    });
    total / n as f64
}

/// The sharp two-parameter bound on a tree step function:
///
/// ```text
/// ∫ (𝓜φ)^p ≤ −c1·f^p + c2·∫ φ^q (𝓜φ)^{p−q},   f = ∫ φ,
/// ```
///
/// with `(c1, c2)` from [`bound_coefficients`]. Components carry `f` and
/// the cross integral along with both constants.
pub fn sharp_bound_report(phi: &StepFunction, p: f64, q: f64, beta: f64) -> Result<GapReport> {
    let (c1, c2) = bound_coefficients(p, q, beta)?;
    let maximal = maximal_function(phi);
    let f = phi.integrate();
    let lhs = maximal.power_integral(p)?;
    let cross = cross_integral(phi, &maximal, p, q);
    let rhs = -c1 * f.powf(p) + c2 * cross;
    let mut components = BTreeMap::new();
    components.insert("c1".into(), c1);
    components.insert("c2".into(), c2);
    components.insert("crossIntegral".into(), cross);
    components.insert("f".into(), f);
    Ok(GapReport::le_claim(lhs, rhs, components))
}

/// The equivalent lower-bound arrangement of the same inequality:
///
/// ```text
/// A₀·∫ (𝓜φ)^p + (q/p)(β+1)^{1−q}·f^p ≤ ∫ φ^q (𝓜φ)^{p−q}.
/// ```
///
/// Its gap is the sharp-bound gap divided by `c2`, up to rounding.
pub fn equivalent_form_report(phi: &StepFunction, p: f64, q: f64, beta: f64) -> Result<GapReport> {
    let a = a0(beta, p, q)?;
    let (c1, c2) = bound_coefficients(p, q, beta)?;
    let maximal = maximal_function(phi);
    let f = phi.integrate();
    let maximal_integral = maximal.power_integral(p)?;
    let cross = cross_integral(phi, &maximal, p, q);
    let j_term = (q / p) * (beta + 1.0).powf(1.0 - q) * f.powf(p);
    let lhs = a * maximal_integral + j_term;
    let mut components = BTreeMap::new();
    components.insert("a0".into(), a);
    components.insert("c1".into(), c1);
    components.insert("c2".into(), c2);
    components.insert("crossIntegral".into(), cross);
    components.insert("f".into(), f);
    components.insert("jTerm".into(), j_term);
    components.insert("maximalIntegral".into(), maximal_integral);
    Ok(GapReport::le_claim(lhs, cross, components))
}

/// The classical one-parameter bound
/// `∫ (𝓜φ)^p ≤ −f^p/(p−1) + (p/(p−1))·∫ φ(𝓜φ)^{p−1}`: exactly the sharp
/// bound at `q = 1`, `β = 1/(p−1)`, reported through the identical code
/// path so both calls agree bit for bit.
pub fn classic_bound_report(phi: &StepFunction, p: f64) -> Result<GapReport> {
    sharp_bound_report(phi, p, 1.0, 1.0 / (p - 1.0))
}

/// How continuously the sharp bound approaches its `q = 1` edge: the
/// scaled difference between the right sides at `q = 1` and `q = 1 + 1e−8`.
pub fn q_edge_continuity(phi: &StepFunction, p: f64, beta: f64) -> Result<f64> {
    let at_edge = sharp_bound_report(phi, p, 1.0, beta)?;
    let near_edge = sharp_bound_report(phi, p, 1.0 + 1e-8, beta)?;
    Ok(numeric::scaled_gap(near_edge.rhs, at_edge.rhs))
}

/// Worst (most negative) slacks seen by the randomized oracles for the
/// three elementary scalar inequalities underneath the sharp bound. Each
/// slack is `rhs − lhs` of a true inequality, so up to rounding every
/// field is nonnegative.
#[derive(Debug, Clone, Copy)]
pub struct ElementaryWorst {
    /// Samples drawn per inequality.
    pub samples: u64,
    /// Superadditivity of `(λ, σ) ↦ λ^q/σ^{q−1}`:
    /// `(Σλᵢ)^q/(Σσᵢ)^{q−1} ≤ Σ λᵢ^q/σᵢ^{q−1}` over up to 8 terms.
    pub superadditivity: f64,
    /// The weighted Young inequality
    /// `p·x^q·y^{p−q} ≤ q·x^p + (p−q)·y^p` for `1 ≤ q ≤ p`, `x, y ≥ 0`.
    pub young: f64,
    /// Convexity of `τ ↦ τ^{1−q}`: for `x ∈ [0, 1]`, `β > 0`,
    /// `((β+1)−βx)^{1−q} − (β+1)^{1−q} ≥ (q−1)βx/(β+1)^q`.
    pub tau_convexity: f64,
}

/// Runs the three elementary-inequality oracles on `samples` random draws
/// each, with the given seed, and reports the worst slack seen per
/// inequality.
pub fn elementary_oracles(samples: u64, seed: u64) -> ElementaryWorst {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = ElementaryWorst {
        samples,
        superadditivity: f64::INFINITY,
        young: f64::INFINITY,
        tau_convexity: f64::INFINITY,
    };
    for _ in 0..samples {
        // Superadditivity over m ≤ 8 terms.
        let q = rng.gen_range(1.0..4.0);
        let m = rng.gen_range(2..=8usize);
        let lambdas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.0f64..3.0)).collect();
        let sigmas: Vec<f64> = (0..m).map(|_| rng.gen_range(0.05..2.0)).collect();
        let lambda_total = numeric::pairwise_sum(&lambdas);
        let sigma_total = numeric::pairwise_sum(&sigmas);
        let split = numeric::pairwise_sum_by(m, &mut |i| {
            lambdas[i].powf(q) / sigmas[i].powf(q - 1.0)
        });
        let joined = lambda_total.powf(q) / sigma_total.powf(q - 1.0);
        worst.superadditivity = worst.superadditivity.min(split - joined);

        // Weighted Young inequality.
        let p = rng.gen_range(1.05..4.0);
        let q = rng.gen_range(1.0..=p);
        let x: f64 = rng.gen_range(0.0..3.0);
        let y: f64 = rng.gen_range(0.0..3.0);
        let young = q * x.powf(p) + (p - q) * y.powf(p) - p * x.powf(q) * y.powf(p - q);
        worst.young = worst.young.min(young);

        // Convexity of τ^{1−q} at τ between β+1−β and β+1.
        let beta = rng.gen_range(0.0_f64..5.0).max(1e-6);
        let q = rng.gen_range(1.0..4.0);
        let x = rng.gen_range(0.0..=1.0);
        let tau = (beta + 1.0) - beta * x;
        let convexity = tau.powf(1.0 - q) - (beta + 1.0).powf(1.0 - q)
            - (q - 1.0) * beta * x / (beta + 1.0).powf(q);
        worst.tau_convexity = worst.tau_convexity.min(convexity);
    }
    worst
}

fn json_number(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}

fn json_map(map: &BTreeMap<String, f64>) -> String {
    let inner: Vec<String> = map
        .iter()
        .map(|(key, value)| {
            format!(
                "{}:{}",
                serde_json::to_string(key).unwrap_or_else(|_| "\"\"".into()),
                json_number(*value)
            )
        })
        .collect();
    format!("{{{}}}", inner.join(","))
}

/// Serializes a report with its parameters as
/// `{"lhs":…,"rhs":…,"gap":…,"components":{…},"params":{…}}`, with the
/// inner maps in sorted key order so the output is byte-stable.
pub fn report_json(report: &GapReport, params: &BTreeMap<String, f64>) -> String {
    format!(
        "{{\"lhs\":{},\"rhs\":{},\"gap\":{},\"components\":{},\"params\":{}}}",
        json_number(report.lhs),
        json_number(report.rhs),
        json_number(report.gap),
        json_map(&report.components),
        json_map(params)
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{make_tree, StepFunction};

    fn step(arity: u32, depth: u32, values: &[f64]) -> StepFunction {
        StepFunction::new(make_tree(arity, depth).unwrap(), values.to_vec()).unwrap()
    }

    fn random_step(rng: &mut ChaCha8Rng, max_arity: u32, max_depth: u32) -> StepFunction {
        let arity = rng.gen_range(2..=max_arity);
        let depth = rng.gen_range(1..=max_depth);
        let config = make_tree(arity, depth).unwrap();
        let values = (0..config.leaf_count())
            .map(|_| {
                if rng.gen_bool(0.15) {
                    0.0
                } else {
                    rng.gen_range(0.0..4.0)
                }
            })
            .collect();
        StepFunction::new(config, values).unwrap()
    }

    #[test]
    fn sharp_bound_fixed_example_q1() {
        let phi = step(2, 1, &[2.0, 0.0]);
        let report = sharp_bound_report(&phi, 2.0, 1.0, 1.0).unwrap();
        assert_eq!(report.lhs, 2.5);
        assert_eq!(report.rhs, 3.0);
        assert_eq!(report.gap, 0.5);
        assert_eq!(report.components["f"], 1.0);
        assert_eq!(report.components["crossIntegral"], 2.0);
        assert_eq!(report.components["c1"], 1.0);
        assert_eq!(report.components["c2"], 2.0);
    }

    #[test]
    fn sharp_bound_fixed_example_q2() {
        let phi = step(2, 1, &[2.0, 0.0]);
        let report = sharp_bound_report(&phi, 2.0, 2.0, 1.0).unwrap();
        assert_eq!(report.lhs, 2.5);
        assert_eq!(report.rhs, 6.0);
        assert_eq!(report.components["crossIntegral"], 2.0);
        assert_eq!(report.components["c1"], 2.0);
        assert_eq!(report.components["c2"], 4.0);
    }

    #[test]
    fn classical_point_is_exact_for_constants() {
        // With f = 1 every leaf power is exactly 1 and, for p−1 a power of
        // two, both constants are exact dyadics with c2 − c1 = 1: the gap
        // is zero to the last bit even on odd arities.
        for arity in [2, 3] {
            for p in [1.5, 2.0, 3.0, 5.0] {
                let phi = StepFunction::constant(make_tree(arity, 3).unwrap(), 1.0).unwrap();
                let report = sharp_bound_report(&phi, p, 1.0, 1.0 / (p - 1.0)).unwrap();
                assert_eq!(report.gap, 0.0, "arity {arity}, p = {p}");
            }
        }
    }

    #[test]
    fn equivalent_form_is_exact_for_constants_at_beta_zero() {
        let phi = StepFunction::constant(make_tree(2, 4).unwrap(), 1.0).unwrap();
        let report = equivalent_form_report(&phi, 2.0, 1.5, 0.0).unwrap();
        assert_eq!(report.gap, 0.0);
        assert_eq!(report.components["a0"], 0.25);
        assert_eq!(report.components["jTerm"], 0.75);
    }

    #[test]
    fn both_arrangements_share_one_gap_up_to_c2() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e41_0001);
        for _ in 0..80 {
            let phi = random_step(&mut rng, 4, 5);
            let p = rng.gen_range(1.3..3.5);
            let q = 1.0 + (p - 1.0) * rng.gen_range(0.0..1.0);
            let beta = rng.gen_range(0.05..2.0);
            let sharp = sharp_bound_report(&phi, p, q, beta).unwrap();
            let equivalent = equivalent_form_report(&phi, p, q, beta).unwrap();
            let c2 = sharp.components["c2"];
            assert!(
                numeric::scaled_gap(equivalent.gap * c2, sharp.gap) <= 1e-10,
                "p={p} q={q} beta={beta}: {} vs {}",
                equivalent.gap * c2,
                sharp.gap
            );
            assert!(sharp.holds(1e-11 * sharp.rhs.abs().max(1.0)));
            assert!(equivalent.holds(1e-11 * equivalent.rhs.abs().max(1.0)));
        }
    }

    #[test]
    fn classic_report_is_bitwise_identical_to_the_specialization() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e41_0002);
        for _ in 0..20 {
            let phi = random_step(&mut rng, 3, 4);
            let p = rng.gen_range(1.2..4.0);
            let classic = classic_bound_report(&phi, p).unwrap();
            let sharp = sharp_bound_report(&phi, p, 1.0, 1.0 / (p - 1.0)).unwrap();
            assert_eq!(classic.lhs.to_bits(), sharp.lhs.to_bits());
            assert_eq!(classic.rhs.to_bits(), sharp.rhs.to_bits());
            assert_eq!(classic.gap.to_bits(), sharp.gap.to_bits());
            assert_eq!(classic.components.len(), sharp.components.len());
            for (key, value) in &classic.components {
                assert_eq!(value.to_bits(), sharp.components[key].to_bits(), "{key}");
            }
        }
    }

    #[test]
    fn edge_continuity_at_q_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(0x7e41_0003);
        for _ in 0..10 {
            let phi = random_step(&mut rng, 3, 4);
            let drift = q_edge_continuity(&phi, 2.3, 0.7).unwrap();
            assert!(drift <= 1e-6, "rhs drifted by {drift} across the q = 1 edge");
        }
    }

    #[test]
    fn elementary_oracle_slacks_stay_nonnegative() {
        let worst = elementary_oracles(20_000, 7);
        assert_eq!(worst.samples, 20_000);
        for slack in [worst.superadditivity, worst.young, worst.tau_convexity] {
            assert!(slack.is_finite());
            assert!(slack >= -1e-12, "worst slack {slack}");
        }
    }

    #[test]
    fn oracle_runs_are_deterministic() {
        let a = elementary_oracles(500, 42);
        let b = elementary_oracles(500, 42);
        assert_eq!(a.superadditivity.to_bits(), b.superadditivity.to_bits());
        assert_eq!(a.young.to_bits(), b.young.to_bits());
        assert_eq!(a.tau_convexity.to_bits(), b.tau_convexity.to_bits());
    }

    #[test]
    fn report_json_layout() {
        let phi = step(2, 1, &[2.0, 0.0]);
        let report = sharp_bound_report(&phi, 2.0, 1.0, 1.0).unwrap();
        let mut params = BTreeMap::new();
        params.insert("beta".to_string(), 1.0);
        params.insert("p".to_string(), 2.0);
        params.insert("q".to_string(), 1.0);
        let text = report_json(&report, &params);
        assert_eq!(
            text,
            "{\"lhs\":2.5,\"rhs\":3.0,\"gap\":0.5,\
             \"components\":{\"c1\":1.0,\"c2\":2.0,\"crossIntegral\":2.0,\"f\":1.0},\
             \"params\":{\"beta\":1.0,\"p\":2.0,\"q\":1.0}}"
        );
    }
}
