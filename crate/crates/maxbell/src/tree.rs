//! Homogeneous trees over the unit interval and step functions on their
//! leaves.
//!
//! A [`TreeConfig`] with arity `m` and depth `d` splits `(0, 1]` into `m^d`
//! equal leaf cells; the cells of level `k` are the `m^k` intervals of
//! measure `m^-k`. A [`StepFunction`] assigns one nonnegative value to each
//! leaf. [`Rearranged`] is the decreasing rearrangement of such a function on
//! `(0, 1]`, stored as maximal constant segments rather than resampled on a
//! grid, so equimeasurability with the original is exact.

use crate::{numeric, Error, Result};
use serde::{Deserialize, Serialize};

/// Default cap on the number of leaves a tree may materialize.
pub const DEFAULT_LEAF_BUDGET: u64 = 1 << 24;

/// Shape of a homogeneous tree: `arity >= 2` children per node, `depth >= 0`
/// levels below the root.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeConfig {
    pub arity: u32,
    pub depth: u32,
}

/// Builds a tree shape under the default leaf budget of `2^24`.
pub fn make_tree(arity: u32, depth: u32) -> Result<TreeConfig> {
    make_tree_with_budget(arity, depth, DEFAULT_LEAF_BUDGET)
}

/// Builds a tree shape, failing when `arity < 2` or when `arity^depth`
/// exceeds `budget` leaves.
pub fn make_tree_with_budget(arity: u32, depth: u32, budget: u64) -> Result<TreeConfig> {
    if arity < 2 {
        return Err(Error::ArityTooSmall(arity));
    }
    let leaves = (arity as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if leaves > budget as u128 {
        return Err(Error::TooManyLeaves { leaves, budget });
    }
    Ok(TreeConfig { arity, depth })
}

impl TreeConfig {
    /// Number of leaf cells, `arity^depth`.
    pub fn leaf_count(&self) -> u64 {
        (self.arity as u64).pow(self.depth)
    }

    /// Number of cells at `level`, `arity^level`.
    pub fn nodes_at(&self, level: u32) -> u64 {
        (self.arity as u64).pow(level)
    }

    /// Measure of one leaf cell, `arity^-depth`.
    pub fn leaf_measure(&self) -> f64 {
        (self.arity as f64).powi(-(self.depth as i32))
    }

    /// Total number of cells across all levels, root included.
    pub fn total_nodes(&self) -> u64 {
        (0..=self.depth).map(|k| self.nodes_at(k)).sum()
    }
}

/// A cell of the tree: `level` steps below the root, `index` counted from the
/// left among the `arity^level` cells of that level.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId {
    pub level: u32,
    pub index: u64,
}

impl NodeId {
    pub const ROOT: NodeId = NodeId { level: 0, index: 0 };

    /// The ancestor of this node at the given shallower (or equal) level.
    pub fn ancestor_at(&self, level: u32, arity: u32) -> NodeId {
        debug_assert!(level <= self.level);
        NodeId {
            level,
            index: self.index / (arity as u64).pow(self.level - level),
        }
    }

    /// Parent cell; `None` for the root.
    pub fn parent(&self, arity: u32) -> Option<NodeId> {
        (self.level > 0).then(|| NodeId {
            level: self.level - 1,
            index: self.index / arity as u64,
        })
    }

    /// True when `self` contains `other` (every cell contains itself).
    pub fn contains(&self, other: &NodeId, arity: u32) -> bool {
        other.level >= self.level && other.ancestor_at(self.level, arity) == *self
    }

    /// Digit-string form: the child indices along the path from the root,
    /// the root itself being the empty string. Digits are concatenated for
    /// arity up to 10 and dot-separated beyond that.
    pub fn digit_string(&self, arity: u32) -> String {
        let mut digits = Vec::with_capacity(self.level as usize);
        let mut rest = self.index;
        for _ in 0..self.level {
            digits.push((rest % arity as u64) as u32);
            rest /= arity as u64;
        }
        digits.reverse();
        if arity <= 10 {
            digits.iter().map(|d| d.to_string()).collect()
        } else {
            digits
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(".")
        }
    }
}

/// Measure of a cell: `arity^-level`. Fails when the node does not belong to
/// the tree.
pub fn node_measure(config: &TreeConfig, node: &NodeId) -> Result<f64> {
    if node.level > config.depth || node.index >= config.nodes_at(node.level) {
        return Err(Error::InvalidNode(format!(
            "level {} index {} in an arity-{} depth-{} tree",
            node.level, node.index, config.arity, config.depth
        )));
    }
    Ok((config.arity as f64).powi(-(node.level as i32)))
}

/// A nonnegative step function given by one value per leaf cell, ordered left
/// to right.
#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    config: TreeConfig,
    values: Vec<f64>,
}

impl StepFunction {
    /// Wraps leaf values, validating the count and that every value is finite
    /// and nonnegative. Negative zeros are normalized to `+0.0` so that equal
    /// values are also bitwise equal.
    pub fn new(config: TreeConfig, values: Vec<f64>) -> Result<Self> {
        let expected = config.leaf_count();
        if values.len() as u64 != expected {
            return Err(Error::LeafCountMismatch {
                expected,
                got: values.len(),
            });
        }
        let mut values = values;
        for (index, v) in values.iter_mut().enumerate() {
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::BadLeafValue { index, value: *v });
            }
            if *v == 0.0 {
                *v = 0.0;
            }
        }
        Ok(StepFunction { config, values })
    }

    /// Constant function with the given value on every leaf.
    pub fn constant(config: TreeConfig, value: f64) -> Result<Self> {
        StepFunction::new(config, vec![value; config.leaf_count() as usize])
    }

    pub fn config(&self) -> TreeConfig {
        self.config
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `∫ φ dμ`: the pairwise sum of the leaf values times the leaf measure.
    pub fn integrate(&self) -> f64 {
        numeric::pairwise_sum(&self.values) * self.config.leaf_measure()
    }

    /// `∫ φ^r dμ` for `r >= 1`, with `φ^1` taken verbatim rather than through
    /// `powf` so that `power_integral(1)` and `integrate` agree exactly.
    pub fn power_integral(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::domain(format!("exponent must satisfy r >= 1 (got {r})")));
        }
        if r == 1.0 {
            return Ok(self.integrate());
        }
        let sum = numeric::pairwise_sum_by(self.values.len(), &mut |i| self.values[i].powf(r));
        Ok(sum * self.config.leaf_measure())
    }

    /// `μ{φ > λ}` computed from the leaf count, so it is bit-identical to the
    /// corresponding distribution value of the decreasing rearrangement.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let count = self.values.iter().filter(|&&v| v > lambda).count();
        count as f64 / self.values.len() as f64
    }

    /// Largest leaf value.
    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(0.0, f64::max)
    }

    /// The decreasing rearrangement on `(0, 1]` as maximal constant segments.
    pub fn decreasing_rearrangement(&self) -> Rearranged {
        let mut sorted = self.values.clone();
        sorted.sort_by(|a, b| b.total_cmp(a));
        let n = sorted.len();
        let mut breakpoints = Vec::new();
        let mut values = Vec::new();
        let mut start = 0usize;
        while start < n {
            let v = sorted[start];
            let mut end = start + 1;
            while end < n && sorted[end] == v {
                end += 1;
            }
            breakpoints.push(end as f64 / n as f64);
            values.push(v);
            start = end;
        }
        Rearranged { breakpoints, values }
    }

    /// Serializes to the canonical JSON form
    /// `{"arity": m, "depth": d, "values": [...]}`.
    pub fn to_json(&self) -> String {
        let doc = StepFunctionJson {
            arity: self.config.arity,
            depth: self.config.depth,
            values: self.values.clone(),
        };
        serde_json::to_string(&doc).expect("step function serializes")
    }

    /// Parses the canonical JSON form, validating shape and values.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: StepFunctionJson =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let config = make_tree(doc.arity, doc.depth)?;
        StepFunction::new(config, doc.values)
    }
}

#[derive(Serialize, Deserialize)]
struct StepFunctionJson {
    arity: u32,
    depth: u32,
    values: Vec<f64>,
}

/// A nonincreasing step profile on `(0, 1]`: segment `k` is
/// `(breakpoints[k-1], breakpoints[k]]` (with an implicit leading `0`) and
/// carries `values[k]`. Breakpoints increase strictly and end at `1`.
#[derive(Debug, Clone, PartialEq)]
pub struct Rearranged {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl Rearranged {
    /// Builds a profile from raw segments, validating monotonicity of both
    /// the breakpoints and the values.
    pub fn from_segments(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if breakpoints.is_empty() || breakpoints.len() != values.len() {
            return Err(Error::Parse(
                "profile needs matching, nonempty breakpoint and value lists".into(),
            ));
        }
        if *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::domain("profile breakpoints must end at 1"));
        }
        let mut prev = 0.0;
        for &b in &breakpoints {
            if !(b.is_finite() && b > prev && b <= 1.0) {
                return Err(Error::domain(
                    "profile breakpoints must increase strictly within (0, 1]",
                ));
            }
            prev = b;
        }
        for pair in values.windows(2) {
            if pair[1] > pair[0] {
                return Err(Error::domain("profile values must be nonincreasing"));
            }
        }
        for &v in &values {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::domain("profile values must be finite and nonnegative"));
            }
        }
        Ok(Rearranged { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of constant segments.
    pub fn segment_count(&self) -> usize {
        self.values.len()
    }

    /// Value at `t` in `(0, 1]`; the profile is left-continuous, so `t`
    /// belongs to the first segment whose right endpoint is `>= t`.
    pub fn value_at(&self, t: f64) -> f64 {
        let k = self.breakpoints.partition_point(|&b| b < t);
        self.values[k.min(self.values.len() - 1)]
    }

    /// `∫_0^1 g`: segment values times segment lengths, summed pairwise.
    pub fn integral(&self) -> f64 {
        let mut prev = 0.0;
        let terms: Vec<f64> = self
            .breakpoints
            .iter()
            .zip(&self.values)
            .map(|(&b, &v)| {
                let len = b - prev;
                prev = b;
                v * len
            })
            .collect();
        numeric::pairwise_sum(&terms)
    }

    /// `∫_0^1 g^r`: exact for step profiles, no quadrature involved.
    pub fn power_integral(&self, r: f64) -> Result<f64> {
        if !(r.is_finite() && r >= 1.0) {
            return Err(Error::domain(format!("exponent must satisfy r >= 1 (got {r})")));
        }
        let mut prev = 0.0;
        let terms: Vec<f64> = self
            .breakpoints
            .iter()
            .zip(&self.values)
            .map(|(&b, &v)| {
                let len = b - prev;
                prev = b;
                if r == 1.0 {
                    v * len
                } else {
                    v.powf(r) * len
                }
            })
            .collect();
        Ok(numeric::pairwise_sum(&terms))
    }

    /// `∫_0^t g` for `t` in `[0, 1]`, exact prefix sums over the segments.
    pub fn integral_up_to(&self, t: f64) -> f64 {
        let mut acc = 0.0;
        let mut prev = 0.0;
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            if t <= b {
                return acc + v * (t - prev);
            }
            acc += v * (b - prev);
            prev = b;
        }
        acc
    }

    /// `|{g > λ}|`. The level set of a nonincreasing profile is `(0, b]` for
    /// one of the stored breakpoints (or empty), so this returns a stored
    /// breakpoint bit-for-bit.
    pub fn measure_above(&self, lambda: f64) -> f64 {
        let mut measure = 0.0;
        for (&b, &v) in self.breakpoints.iter().zip(&self.values) {
            if v > lambda {
                measure = b;
            } else {
                break;
            }
        }
        measure
    }
}
