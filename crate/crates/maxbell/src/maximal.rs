//! The tree maximal operator on step functions, its linearization, and the
//! classical weak-type and strong-type bounds.
//!
//! The maximal function of `φ` assigns to each leaf the largest average of
//! `φ` over the cells containing it. All cell averages are computed once,
//! bottom-up, with a fixed summation order (children combined with
//! [`crate::numeric::pairwise_sum`]), and every later comparison reuses those
//! stored values verbatim. Consequences worth knowing:
//!
//! * A leaf's own average is its value divided by one, so `𝓜φ ≥ φ` holds
//!   bit-for-bit, and the reconstruction of `𝓜φ` from the linearization is
//!   exact, not approximate.
//! * When two cells have equal real averages, the stored `f64` averages are
//!   equal whenever the arity is a power of two (doubling and halving are
//!   exact) or the shared value has a short mantissa. For other arities an
//!   equal pair can round one ulp apart; the linearization then follows the
//!   stored values. Every structural identity below is order-theoretic over
//!   the stored table and survives this, with one exception: the root can in
//!   principle drop out of the support, which [`linearize`] reports as an
//!   error instead of returning a malformed result.

use crate::tree::{NodeId, StepFunction, TreeConfig};
use crate::{numeric, Error, Result};
use serde::Serialize;
use std::collections::{BTreeMap, BTreeSet};

/// A two-sided comparison `lhs ≤ rhs` with named intermediate quantities.
/// `gap = rhs − lhs` exactly as stored, so the claim holds when `gap ≥ 0`.
#[derive(Debug, Clone, Serialize)]
pub struct GapReport {
    pub lhs: f64,
    pub rhs: f64,
    pub gap: f64,
    pub components: BTreeMap<String, f64>,
}

impl GapReport {
    /// Packages the claim `lhs ≤ rhs`.
    pub fn le_claim(lhs: f64, rhs: f64, components: BTreeMap<String, f64>) -> Self {
        GapReport {
            lhs,
            rhs,
            gap: rhs - lhs,
            components,
        }
    }

    /// True when the claim holds with `tol` of slack for rounding.
    pub fn holds(&self, tol: f64) -> bool {
        self.gap >= -tol
    }
}

/// Cell averages of `φ`, one vector per level, root first.
pub(crate) fn average_table(phi: &StepFunction) -> Vec<Vec<f64>> {
    let config = phi.config();
    let m = config.arity as usize;
    let d = config.depth as usize;
    let mut levels: Vec<Vec<f64>> = Vec::with_capacity(d + 1);
    levels.push(phi.values().to_vec());
    for _ in 0..d {
        let here: Vec<f64> = {
            let below = levels.last().unwrap();
            below.chunks_exact(m).map(numeric::pairwise_sum).collect()
        };
        levels.push(here);
    }
    levels.reverse();
    for (k, level) in levels.iter_mut().enumerate() {
        let count = (config.arity as f64).powi((d - k) as i32);
        for v in level.iter_mut() {
            *v /= count;
        }
    }
    levels
}

struct Scan {
    leaf_max: Vec<f64>,
    owner: Vec<NodeId>,
    averages: Vec<Vec<f64>>,
}

/// One top-down pass: per-leaf running maximum of ancestor averages, and per
/// leaf the largest cell attaining it (smallest level wins ties, exactly).
fn scan(phi: &StepFunction) -> Scan {
    let config = phi.config();
    let m = config.arity as usize;
    let averages = average_table(phi);
    let mut run: Vec<f64> = vec![averages[0][0]];
    let mut own: Vec<NodeId> = vec![NodeId::ROOT];
    for (k, level) in averages.iter().enumerate().skip(1) {
        let mut next_run = Vec::with_capacity(level.len());
        let mut next_own = Vec::with_capacity(level.len());
        for (i, &a) in level.iter().enumerate() {
            let parent = i / m;
            if a > run[parent] {
                next_run.push(a);
                next_own.push(NodeId {
                    level: k as u32,
                    index: i as u64,
                });
            } else {
                next_run.push(run[parent]);
                next_own.push(own[parent]);
            }
        }
        run = next_run;
        own = next_own;
    }
    debug_assert_eq!(run.len(), config.leaf_count() as usize);
    Scan {
        leaf_max: run,
        owner: own,
        averages,
    }
}

/// The maximal function: per leaf, the largest average over all cells
/// containing that leaf (the leaf cell itself included).
pub fn maximal_function(phi: &StepFunction) -> StepFunction {
    let scan = scan(phi);
    StepFunction::new(phi.config(), scan.leaf_max).expect("averages are finite and nonnegative")
}

/// The structure extracted from `φ` by following, for each leaf, the largest
/// cell whose average attains the leaf's maximal value.
///
/// `support` is the set of such cells; `y_I` their averages; `a_measure(I)`
/// the measure of the leaves pointing at `I`; `star(I)` the smallest support
/// cell strictly containing `I` (absent for the root).
#[derive(Debug, Clone)]
pub struct Linearization {
    config: TreeConfig,
    support: Vec<NodeId>,
    averages: BTreeMap<NodeId, f64>,
    a_count: BTreeMap<NodeId, u64>,
    star: BTreeMap<NodeId, NodeId>,
    owner: Vec<NodeId>,
}

impl Linearization {
    pub fn config(&self) -> TreeConfig {
        self.config
    }

    /// Support cells in (level, index) order; always starts with the root.
    pub fn support(&self) -> &[NodeId] {
        &self.support
    }

    /// The average `y_I`, defined for support members.
    pub fn average(&self, node: &NodeId) -> Option<f64> {
        self.averages.get(node).copied()
    }

    /// Number of leaves assigned to `node`; positive for support members.
    pub fn a_count(&self, node: &NodeId) -> u64 {
        self.a_count.get(node).copied().unwrap_or(0)
    }

    /// Measure of the set of leaves assigned to `node`.
    pub fn a_measure(&self, node: &NodeId) -> f64 {
        self.a_count(node) as f64 / self.config.leaf_count() as f64
    }

    /// The smallest support cell strictly containing `node`; `None` for the
    /// root.
    pub fn star(&self, node: &NodeId) -> Option<NodeId> {
        self.star.get(node).copied()
    }

    /// All support cells whose star is `node`, in (level, index) order.
    pub fn star_preimage(&self, node: &NodeId) -> Vec<NodeId> {
        self.star
            .iter()
            .filter(|(_, v)| *v == node)
            .map(|(k, _)| *k)
            .collect()
    }

    /// The cell assigned to leaf `i`.
    pub fn owner(&self, leaf: usize) -> NodeId {
        self.owner[leaf]
    }

    /// Rebuilds the maximal function as `Σ_I y_I·1_{A(I)}`; bit-identical to
    /// [`maximal_function`] on every leaf.
    pub fn reconstruct(&self) -> StepFunction {
        let values: Vec<f64> = self
            .owner
            .iter()
            .map(|node| self.averages[node])
            .collect();
        StepFunction::new(self.config, values).expect("averages are finite and nonnegative")
    }

    /// JSON export with nodes rendered as digit strings (root = `""`):
    /// `{"support": [...], "y": {...}, "aMeasure": {...}, "star": {...}}`.
    pub fn to_json(&self) -> String {
        let arity = self.config.arity;
        let doc = LinearizationJson {
            support: self
                .support
                .iter()
                .map(|n| n.digit_string(arity))
                .collect(),
            y: self
                .averages
                .iter()
                .map(|(n, &y)| (n.digit_string(arity), y))
                .collect(),
            a_measure: self
                .support
                .iter()
                .map(|n| (n.digit_string(arity), self.a_measure(n)))
                .collect(),
            star: self
                .star
                .iter()
                .map(|(n, s)| (n.digit_string(arity), s.digit_string(arity)))
                .collect(),
        };
        serde_json::to_string(&doc).expect("linearization serializes")
    }
}

#[derive(Serialize)]
struct LinearizationJson {
    support: Vec<String>,
    y: BTreeMap<String, f64>,
    #[serde(rename = "aMeasure")]
    a_measure: BTreeMap<String, f64>,
    star: BTreeMap<String, String>,
}

/// Extracts the [`Linearization`] of `φ`.
///
/// Each leaf's maximum is attained by one of its finitely many ancestors,
/// which is asserted; the assignment picks the largest attaining cell. The
/// only error case is the rounding degeneracy described in the module
/// documentation, where no leaf's maximum is attained at the root.
pub fn linearize(phi: &StepFunction) -> Result<Linearization> {
    let config = phi.config();
    let scan = scan(phi);
    let mut a_count: BTreeMap<NodeId, u64> = BTreeMap::new();
    for (leaf, node) in scan.owner.iter().enumerate() {
        // The assigned cell must attain the leaf's maximum exactly — this is
        // the finite-tree goodness property.
        assert_eq!(
            scan.averages[node.level as usize][node.index as usize], scan.leaf_max[leaf],
            "assigned cell does not attain the leaf maximum"
        );
        *a_count.entry(*node).or_insert(0) += 1;
    }
    if !a_count.contains_key(&NodeId::ROOT) {
        return Err(Error::domain(
            "no leaf maximum is attained at the root: equal real averages rounded apart \
             (possible for non-power-of-two arity); perturb the input or change the arity",
        ));
    }
    let support_set: BTreeSet<NodeId> = a_count.keys().copied().collect();
    let support: Vec<NodeId> = support_set.iter().copied().collect();
    let mut averages = BTreeMap::new();
    for node in &support {
        averages.insert(
            *node,
            scan.averages[node.level as usize][node.index as usize],
        );
    }
    let mut star = BTreeMap::new();
    for node in &support {
        if *node == NodeId::ROOT {
            continue;
        }
        let mut walk = node.parent(config.arity).unwrap();
        while !support_set.contains(&walk) {
            walk = walk.parent(config.arity).unwrap();
        }
        star.insert(*node, walk);
    }
    Ok(Linearization {
        config,
        support,
        averages,
        a_count,
        star,
        owner: scan.owner,
    })
}

/// Weak-type comparison at level `λ`: the measure of `{𝓜φ > λ}` against
/// `(1/λ) ∫_{{𝓜φ > λ}} φ`.
pub fn weak_type_gap(phi: &StepFunction, lambda: f64) -> Result<GapReport> {
    if !(lambda.is_finite() && lambda > 0.0) {
        return Err(Error::domain(format!(
            "weak-type level must be positive (got {lambda})"
        )));
    }
    let maximal = maximal_function(phi);
    let selected: Vec<f64> = phi
        .values()
        .iter()
        .zip(maximal.values())
        .filter(|(_, &m)| m > lambda)
        .map(|(&v, _)| v)
        .collect();
    let count = selected.len();
    let lhs = count as f64 / phi.values().len() as f64;
    let restricted = numeric::pairwise_sum(&selected) * phi.config().leaf_measure();
    let rhs = restricted / lambda;
    let mut components = BTreeMap::new();
    components.insert("lambda".into(), lambda);
    components.insert("levelSetMeasure".into(), lhs);
    components.insert("restrictedIntegral".into(), restricted);
    Ok(GapReport::le_claim(lhs, rhs, components))
}

/// Strong-type comparison: `‖𝓜φ‖_p` against `(p/(p−1))‖φ‖_p`.
pub fn lp_bound_gap(phi: &StepFunction, p: f64) -> Result<GapReport> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::domain(format!("exponent must satisfy p > 1 (got {p})")));
    }
    let maximal = maximal_function(phi);
    let maximal_lp = maximal.power_integral(p)?;
    let phi_lp = phi.power_integral(p)?;
    let constant = p / (p - 1.0);
    let lhs = maximal_lp.powf(1.0 / p);
    let rhs = constant * phi_lp.powf(1.0 / p);
    let mut components = BTreeMap::new();
    components.insert("constant".into(), constant);
    components.insert("maximalPowerIntegral".into(), maximal_lp);
    components.insert("sourcePowerIntegral".into(), phi_lp);
    Ok(GapReport::le_claim(lhs, rhs, components))
}

fn validate_slack_params(p: f64, q: f64, beta: f64) -> Result<()> {
    if !(p.is_finite() && p > 1.0) {
        return Err(Error::domain(format!("exponent must satisfy p > 1 (got {p})")));
    }
    if !(q.is_finite() && q > 1.0 && q <= p) {
        return Err(Error::domain(format!(
            "exponent must satisfy q in (1, p] (got q = {q}, p = {p})"
        )));
    }
    if !(beta.is_finite() && beta > 0.0) {
        return Err(Error::domain(format!("beta must be positive (got {beta})")));
    }
    Ok(())
}

/// Per-support-cell slack of the splitting step behind the refined bounds:
/// for each support cell `I`,
///
/// ```text
/// slack(I) = ∫_{A(I)} φ^q dμ − [ μ(I)·y_I^q/τ_I^{q−1}
///                                − Σ_{J: J* = I} μ(J)·y_J^q/(β+1)^{q−1} ]
/// ```
///
/// with `τ_I = (β+1) − β·ρ_I` and `ρ_I = a_measure(I)/μ(I)`. Every slack is
/// nonnegative up to rounding; their `y^{p−q}`-weighted sum is dominated by
/// the gap of the equivalent-form bound.
pub fn linearization_slack(
    phi: &StepFunction,
    p: f64,
    q: f64,
    beta: f64,
) -> Result<BTreeMap<NodeId, f64>> {
    validate_slack_params(p, q, beta)?;
    let lin = linearize(phi)?;
    Ok(slack_from_linearization(phi, &lin, q, beta))
}

fn slack_from_linearization(
    phi: &StepFunction,
    lin: &Linearization,
    q: f64,
    beta: f64,
) -> BTreeMap<NodeId, f64> {
    let config = phi.config();
    let leaf_measure = config.leaf_measure();
    // ∫_{A(I)} φ^q, grouped by owner with the leaf order preserved.
    let mut grouped: BTreeMap<NodeId, Vec<f64>> = BTreeMap::new();
    for (leaf, &v) in phi.values().iter().enumerate() {
        grouped
            .entry(lin.owner(leaf))
            .or_default()
            .push(v.powf(q));
    }
    let mut restricted: BTreeMap<NodeId, f64> = BTreeMap::new();
    for (node, terms) in &grouped {
        restricted.insert(*node, numeric::pairwise_sum(terms) * leaf_measure);
    }
    // Star preimages, once.
    let mut preimage: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for node in lin.support() {
        if let Some(parent) = lin.star(node) {
            preimage.entry(parent).or_default().push(*node);
        }
    }
    let mut slacks = BTreeMap::new();
    for node in lin.support() {
        let mu = (config.arity as f64).powi(-(node.level as i32));
        let rho = lin.a_measure(node) / mu;
        let tau = (beta + 1.0) - beta * rho;
        let y = lin.average(node).expect("support member has an average");
        let own_term = mu * y.powf(q) / tau.powf(q - 1.0);
        let transfer: f64 = match preimage.get(node) {
            Some(children) => {
                let terms: Vec<f64> = children
                    .iter()
                    .map(|j| {
                        let mu_j = (config.arity as f64).powi(-(j.level as i32));
                        let y_j = lin.average(j).expect("support member has an average");
                        mu_j * y_j.powf(q) / (beta + 1.0).powf(q - 1.0)
                    })
                    .collect();
                numeric::pairwise_sum(&terms)
            }
            None => 0.0,
        };
        slacks.insert(*node, restricted[node] - (own_term - transfer));
    }
    slacks
}

/// `Σ_I y_I^{p−q}·slack(I)`: the part of the equivalent-form gap explained
/// by the per-cell splitting step.
pub fn weighted_slack_sum(phi: &StepFunction, p: f64, q: f64, beta: f64) -> Result<f64> {
    validate_slack_params(p, q, beta)?;
    let lin = linearize(phi)?;
    let slacks = slack_from_linearization(phi, &lin, q, beta);
    let terms: Vec<f64> = slacks
        .iter()
        .map(|(node, &s)| {
            let y = lin.average(node).expect("support member has an average");
            y.powf(p - q) * s
        })
        .collect();
    Ok(numeric::pairwise_sum(&terms))
}
