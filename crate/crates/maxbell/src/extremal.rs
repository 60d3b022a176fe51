//! Near-extremal constructions: spine rearrangements that transport a
//! nonincreasing profile onto a tree, refinement ladders that chase the
//! sharp constants, and the stability / q-integral diagnostics that measure
//! how close a step function sits to the extremal family.
//!
//! The spine construction concentrates a profile along the leftmost chain
//! of cells `K_j = (0, arity^{−j}]`: the annulus `K_j ∖ K_{j+1}` receives
//! exactly the profile's values from the matching time range
//! `(arity^{−(j−1+2)}, arity^{−j}]`, cell-averaged at leaf resolution and
//! placed nonincreasingly with the larger values adjacent to `K_{j+1}`. The
//! leaf values are therefore an exact rearrangement of the cell-averaged
//! profile, while every chain cell sees the same average the continuous
//! Hardy operator sees — which is what drives the maximal integral up
//! toward its continuous ceiling.

use crate::bellman::{omega_p, solve_beta};
use crate::hardy::{PowerLaw, Profile};
use crate::maximal::maximal_function;
use crate::tree::{make_tree_with_budget, StepFunction, DEFAULT_LEAF_BUDGET};
use crate::verify::{equivalent_form_report, sharp_bound_report};
use crate::{numeric, Error, Result};

/// A spine construction request: transport `profile` onto the leftmost
/// chain of an `arity`-adic tree of the given depth (`arity ≥ 2`,
/// `depth ≥ 1`).
#[derive(Debug, Clone)]
pub struct SpineSpec {
    pub profile: Profile,
    pub arity: u32,
    pub depth: u32,
}

/// Cell averages of a profile on `cells` equal cells of `(0, 1]`. A cell
/// contained in a single constant segment takes that segment's value with
/// no arithmetic at all, so aligned step profiles reproduce exactly; only
/// straddling cells average, and power laws use the closed-form prefix
/// integral.
pub fn cell_average_profile(profile: &Profile, cells: u64) -> Result<Vec<f64>> {
    if cells == 0 {
        return Err(Error::domain("cell averaging needs at least one cell"));
    }
    let n = cells as usize;
    let mut out = Vec::with_capacity(n);
    match profile {
        Profile::Power(g) => {
            if g.alpha() == 0.0 {
                out.resize(n, g.scale());
            } else {
                for i in 0..cells {
                    let lo = i as f64 / cells as f64;
                    let hi = (i + 1) as f64 / cells as f64;
                    let mass = g.integral_up_to(hi) - g.integral_up_to(lo);
                    out.push(mass / (hi - lo));
                }
            }
        }
        Profile::Step(r) => {
            let breaks = r.breakpoints();
            let values = r.values();
            let mut seg = 0usize;
            for i in 0..cells {
                let lo = i as f64 / cells as f64;
                let hi = (i + 1) as f64 / cells as f64;
                while breaks[seg] <= lo {
                    seg += 1;
                }
                if breaks[seg] >= hi {
                    out.push(values[seg]);
                } else {
                    let mut mass = 0.0;
                    let mut start = lo;
                    let mut j = seg;
                    loop {
                        let end = breaks[j].min(hi);
                        mass += values[j] * (end - start);
                        if breaks[j] >= hi {
                            break;
                        }
                        start = breaks[j];
                        j += 1;
                    }
                    out.push(mass / (hi - lo));
                }
            }
        }
    }
    Ok(out)
}

/// Builds the spine step function for `spec`. The leaf values are exactly
/// the cell averages of the profile, reordered so that each annulus
/// `K_j ∖ K_{j+1}` holds its own values in nonincreasing order from the
/// inner edge outward.
pub fn spine_construct(spec: &SpineSpec) -> Result<StepFunction> {
    spine_construct_with_budget(spec, DEFAULT_LEAF_BUDGET)
}

/// [`spine_construct`] with an explicit leaf budget.
pub fn spine_construct_with_budget(spec: &SpineSpec, budget: u64) -> Result<StepFunction> {
    if spec.depth == 0 {
        return Err(Error::domain("spine depth must be at least 1"));
    }
    let config = make_tree_with_budget(spec.arity, spec.depth, budget)?;
    let n = config.leaf_count();
    let mut values = cell_average_profile(&spec.profile, n)?;
    // Annulus K_j ∖ K_{j+1} is the leaf-index range [m^{d−j−1}, m^{d−j});
    // sweeping ranges [m^k, m^{k+1}) covers them all, and leaf 0 is the
    // innermost cell K_d. Cell averages of a nonincreasing profile are
    // already nonincreasing up to rounding; the sort pins the ordering
    // exactly without changing the multiset.
    let m = spec.arity as u64;
    let mut lo = 1u64;
    while lo < n {
        let hi = (lo * m).min(n);
        values[lo as usize..hi as usize].sort_unstable_by(|a, b| b.total_cmp(a));
        lo = hi;
    }
    StepFunction::new(config, values)
}

/// The matched near-extremal family for mass `f` and energy `F = ∫φ^p`:
/// solves `β` from `(f, F, p)`, takes the power-law profile with that `β`
/// and mean `f` (so `∫g = f` and `∫g^p = F`), and runs the spine
/// construction once per `(arity, depth)` refinement.
pub fn extremal_sequence(
    f: f64,
    big_f: f64,
    p: f64,
    refinements: &[(u32, u32)],
) -> Result<Vec<StepFunction>> {
    extremal_sequence_with_budget(f, big_f, p, refinements, DEFAULT_LEAF_BUDGET)
}

/// [`extremal_sequence`] with an explicit leaf budget.
pub fn extremal_sequence_with_budget(
    f: f64,
    big_f: f64,
    p: f64,
    refinements: &[(u32, u32)],
    budget: u64,
) -> Result<Vec<StepFunction>> {
    if refinements.is_empty() {
        return Err(Error::domain("refinement list must not be empty"));
    }
    let beta = solve_beta(f, big_f, p)?;
    let g = PowerLaw::from_mean_and_beta(f, beta)?;
    refinements
        .iter()
        .map(|&(arity, depth)| {
            spine_construct_with_budget(
                &SpineSpec {
                    profile: Profile::Power(g),
                    arity,
                    depth,
                },
                budget,
            )
        })
        .collect()
}

/// How far `φ` sits from the extremal eigenrelation `𝓜φ = (β+1)φ`:
/// the exact leaf sum `∫ |𝓜φ − (β+1)φ|^p`. Zero exactly for constants at
/// `β = 0`, and `β^p f^p` for constants at general `β`.
pub fn stability_metric(phi: &StepFunction, beta: f64, p: f64) -> Result<f64> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::domain(format!("exponent must satisfy p >= 1 (got {p})")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain(format!("beta must be >= 0 (got {beta})")));
    }
    let maximal = maximal_function(phi);
    let phi_values = phi.values();
    let max_values = maximal.values();
    let n = phi_values.len();
    let total = numeric::pairwise_sum_by(n, &mut |i| {
        (max_values[i] - (beta + 1.0) * phi_values[i]).abs().powf(p)
    });
    Ok(total / n as f64)
}

/// One refinement step of the q-integral tracker.
#[derive(Debug, Clone, Copy)]
pub struct QTrackRow {
    /// `∫ φ^q`.
    pub mass_q: f64,
    /// `∫ (𝓜φ)^q`, measured on the tree.
    pub measured: f64,
    /// The Bellman prediction `ω_q(f^q/∫φ^q)^q · ∫φ^q`.
    pub predicted: f64,
    /// The factor `ω_q(f^q/∫φ^q)` itself; along a matched refinement
    /// ladder it approaches `β + 1`.
    pub omega: f64,
    /// The target `β + 1` the factor is chasing.
    pub omega_target: f64,
}

/// Tracks the `q`-integrals of a refinement sequence against the Bellman
/// prediction at exponent `q ∈ (1, p)`, with `β` the matched parameter the
/// sequence was built for.
pub fn q_integral_track(phis: &[StepFunction], q: f64, beta: f64) -> Result<Vec<QTrackRow>> {
    if !(q.is_finite() && q > 1.0) {
        return Err(Error::domain(format!("tracking exponent must exceed 1 (got {q})")));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(Error::domain(format!("beta must be >= 0 (got {beta})")));
    }
    phis.iter()
        .map(|phi| {
            let f = phi.integrate();
            let mass_q = phi.power_integral(q)?;
            let measured = maximal_function(phi).power_integral(q)?;
            // f^q ≤ ∫φ^q by convexity; the clamp only absorbs the final
            // ulp when the two sides are computed from identical bits.
            let z = if mass_q == 0.0 {
                1.0
            } else {
                (f.powf(q) / mass_q).min(1.0)
            };
            let omega = omega_p(z, q)?;
            Ok(QTrackRow {
                mass_q,
                measured,
                predicted: omega.powf(q) * mass_q,
                omega,
                omega_target: beta + 1.0,
            })
        })
        .collect()
}

/// One row of a refinement-ladder trajectory.
#[derive(Debug, Clone, Copy)]
pub struct LadderRow {
    pub step: usize,
    pub arity: u32,
    pub depth: u32,
    /// Measured mass `∫φ`.
    pub f: f64,
    /// Measured energy `∫φ^p`.
    pub big_f_measured: f64,
    /// `∫(𝓜φ)^p`.
    pub maximal_p_integral: f64,
    /// The sharp ceiling `B(f, ∫φ^p)` for this row's measured pair.
    pub bellman_target: f64,
    /// Gap of the sharp two-parameter bound at the matched `β`.
    pub gap18: f64,
    /// Gap of the equivalent lower-bound arrangement.
    pub gap41: f64,
    /// [`stability_metric`] at the matched `β`.
    pub stability: f64,
    /// `∫φ^q`.
    pub mass_q: f64,
    /// `∫(𝓜φ)^q`.
    pub q_measured: f64,
    /// The Bellman prediction for `∫(𝓜φ)^q`.
    pub q_predicted: f64,
}

/// Runs the matched extremal sequence for `(f, F, p)` across the given
/// refinements and reports, per step, the measured integrals, both
/// inequality gaps at the matched `β`, the stability metric, and the
/// `q`-integral track at `q ∈ (1, p)`.
pub fn refinement_ladder(
    f: f64,
    big_f: f64,
    p: f64,
    q: f64,
    refinements: &[(u32, u32)],
) -> Result<Vec<LadderRow>> {
    refinement_ladder_with_budget(f, big_f, p, q, refinements, DEFAULT_LEAF_BUDGET)
}

/// [`refinement_ladder`] with an explicit leaf budget.
pub fn refinement_ladder_with_budget(
    f: f64,
    big_f: f64,
    p: f64,
    q: f64,
    refinements: &[(u32, u32)],
    budget: u64,
) -> Result<Vec<LadderRow>> {
    if !(q.is_finite() && q > 1.0 && q < p) {
        return Err(Error::domain(format!(
            "ladder tracking exponent must lie in (1, p) (got q = {q}, p = {p})"
        )));
    }
    let beta = solve_beta(f, big_f, p)?;
    let phis = extremal_sequence_with_budget(f, big_f, p, refinements, budget)?;
    let track = q_integral_track(&phis, q, beta)?;
    phis.iter()
        .zip(track)
        .zip(refinements)
        .enumerate()
        .map(|(step, ((phi, q_row), &(arity, depth)))| {
            let mass = phi.integrate();
            let energy = phi.power_integral(p)?;
            let maximal_p_integral = maximal_function(phi).power_integral(p)?;
            // Convexity gives mass^p ≤ energy; the clamp absorbs the last
            // ulp for constant families where both sides share their bits.
            let z = if energy == 0.0 {
                1.0
            } else {
                (mass.powf(p) / energy).min(1.0)
            };
            let bellman_target = omega_p(z, p)?.powf(p) * energy;
            let gap18 = sharp_bound_report(phi, p, q, beta)?.gap;
            let gap41 = equivalent_form_report(phi, p, q, beta)?.gap;
            let stability = stability_metric(phi, beta, p)?;
            Ok(LadderRow {
                step,
                arity,
                depth,
                f: mass,
                big_f_measured: energy,
                maximal_p_integral,
                bellman_target,
                gap18,
                gap41,
                stability,
                mass_q: q_row.mass_q,
                q_measured: q_row.measured,
                q_predicted: q_row.predicted,
            })
        })
        .collect()
}

/// Renders ladder rows as CSV with the fixed header
/// `step,arity,depth,f,F_measured,maximal_p_integral,bellman_target,gap18,gap41,stability,A_q,q_measured,q_predicted`.
pub fn ladder_csv(rows: &[LadderRow]) -> String {
    let mut out = String::from(
        "step,arity,depth,f,F_measured,maximal_p_integral,bellman_target,\
         gap18,gap41,stability,A_q,q_measured,q_predicted\n",
    );
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
            row.step,
            row.arity,
            row.depth,
            row.f,
            row.big_f_measured,
            row.maximal_p_integral,
            row.bellman_target,
            row.gap18,
            row.gap41,
            row.stability,
            row.mass_q,
            row.q_measured,
            row.q_predicted
        ));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{make_tree, Rearranged};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rearranged(rng: &mut ChaCha8Rng) -> Rearranged {
        let arity = rng.gen_range(2..=4);
        let depth = rng.gen_range(1..=4);
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
    fn constant_profile_spine_is_constant() {
        let profile = Profile::Step(Rearranged::from_segments(vec![1.0], vec![1.5]).unwrap());
        let spine = spine_construct(&SpineSpec {
            profile,
            arity: 3,
            depth: 2,
        })
        .unwrap();
        assert!(spine.values().iter().all(|&v| v == 1.5));
    }

    #[test]
    fn aligned_two_step_profile_is_reproduced_exactly() {
        let third = 2.0 / 3.0;
        let profile = Profile::Step(
            Rearranged::from_segments(vec![0.25, 1.0], vec![2.0, third]).unwrap(),
        );
        let spine = spine_construct(&SpineSpec {
            profile,
            arity: 4,
            depth: 2,
        })
        .unwrap();
        let mut expected = vec![2.0; 4];
        expected.extend(std::iter::repeat_n(third, 12));
        assert_eq!(spine.values(), expected.as_slice());
    }

    #[test]
    fn spine_is_an_exact_rearrangement_of_cell_averages() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe7a1_0001);
        for _ in 0..40 {
            let profile = Profile::Step(random_rearranged(&mut rng));
            let arity = rng.gen_range(2..=3);
            let depth = rng.gen_range(1..=5);
            let spine = spine_construct(&SpineSpec {
                profile: profile.clone(),
                arity,
                depth,
            })
            .unwrap();
            let n = spine.config().leaf_count();
            let mut averages = cell_average_profile(&profile, n).unwrap();
            let mut placed = spine.values().to_vec();
            averages.sort_unstable_by(|a, b| b.total_cmp(a));
            placed.sort_unstable_by(|a, b| b.total_cmp(a));
            assert_eq!(averages.len(), placed.len());
            for (a, b) in averages.iter().zip(&placed) {
                assert_eq!(a.to_bits(), b.to_bits());
            }
        }
    }

    #[test]
    fn annulus_averages_bound_the_maximal_function() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe7a1_0002);
        for case in 0..20 {
            let profile = if case % 2 == 0 {
                Profile::Step(random_rearranged(&mut rng))
            } else {
                Profile::Power(
                    PowerLaw::from_mean_and_beta(
                        rng.gen_range(0.5..2.0),
                        rng.gen_range(0.0..1.5),
                    )
                    .unwrap(),
                )
            };
            let arity = rng.gen_range(2..=3u32);
            let depth = rng.gen_range(2..=5u32);
            let spine = spine_construct(&SpineSpec {
                profile: profile.clone(),
                arity,
                depth,
            })
            .unwrap();
            let maximal = maximal_function(&spine);
            let m = arity as u64;
            for j in 0..=depth {
                let span = m.pow(depth - j);
                let t = span as f64 / m.pow(depth) as f64;
                let chain_average = profile.integral_up_to(t).unwrap() / t;
                let inner = if j == depth { 0 } else { span / m };
                for leaf in inner..span {
                    let got = maximal.values()[leaf as usize];
                    assert!(
                        got >= chain_average - 1e-12 * chain_average.abs().max(1.0),
                        "level {j}, leaf {leaf}: {got} < {chain_average}"
                    );
                }
            }
        }
    }

    #[test]
    fn symmetrization_upper_bounds_hold() {
        let mut rng = ChaCha8Rng::seed_from_u64(0xe7a1_0003);
        for case in 0..24 {
            let p = 2.0 + 0.5 * (case % 3) as f64;
            let q = 1.5;
            let profile = if case % 2 == 0 {
                Profile::Step(random_rearranged(&mut rng))
            } else {
                // Keep β below 1/(p−1) so the averaged profile stays in L^p.
                Profile::Power(
                    PowerLaw::from_mean_and_beta(
                        rng.gen_range(0.5..1.5),
                        rng.gen_range(0.0..0.9 / (p - 1.0)),
                    )
                    .unwrap(),
                )
            };
            let spine = spine_construct(&SpineSpec {
                profile: profile.clone(),
                arity: rng.gen_range(2..=4),
                depth: rng.gen_range(2..=5),
            })
            .unwrap();
            let maximal = maximal_function(&spine);
            let tree_p = maximal.power_integral(p).unwrap();
            let ceiling_p = profile.hardy_power_integral(p).unwrap();
            assert!(
                tree_p <= ceiling_p + 1e-9,
                "p-integral {tree_p} exceeds continuous ceiling {ceiling_p}"
            );
            let n = spine.values().len();
            let tree_cross = numeric::pairwise_sum_by(n, &mut |i| {
                spine.values()[i].powf(q) * maximal.values()[i].powf(p - q)
            }) / n as f64;
            let ceiling_cross = profile.cross_integral(p, q).unwrap();
            assert!(
                tree_cross <= ceiling_cross + 1e-9,
                "cross integral {tree_cross} exceeds continuous ceiling {ceiling_cross}"
            );
        }
    }

    #[test]
    fn maximal_integrals_are_nondecreasing_in_depth() {
        let g = PowerLaw::from_mean_and_beta(1.0, 0.5).unwrap();
        let (p, q) = (2.0, 1.5);
        let mut previous_p = 0.0;
        let mut previous_cross = 0.0;
        for depth in 1..=8 {
            let spine = spine_construct(&SpineSpec {
                profile: Profile::Power(g),
                arity: 2,
                depth,
            })
            .unwrap();
            let maximal = maximal_function(&spine);
            let tree_p = maximal.power_integral(p).unwrap();
            let n = spine.values().len();
            let tree_cross = numeric::pairwise_sum_by(n, &mut |i| {
                spine.values()[i].powf(q) * maximal.values()[i].powf(p - q)
            }) / n as f64;
            assert!(tree_p >= previous_p - 1e-12, "depth {depth}");
            assert!(tree_cross >= previous_cross - 1e-12, "depth {depth}");
            previous_p = tree_p;
            previous_cross = tree_cross;
        }
    }

    #[test]
    fn constant_family_attains_its_energy_exactly() {
        let f = 1.3f64;
        let big_f = f.powf(2.0);
        let phis = extremal_sequence(f, big_f, 2.0, &[(2, 3), (4, 2)]).unwrap();
        for phi in &phis {
            assert!(phi.values().iter().all(|&v| v == f));
            let measured = maximal_function(phi).power_integral(2.0).unwrap();
            assert_eq!(measured.to_bits(), big_f.to_bits());
        }
    }

    #[test]
    fn stability_metric_fixed_values() {
        let config = make_tree(2, 3).unwrap();
        let constant = StepFunction::constant(config, 1.25).unwrap();
        assert_eq!(stability_metric(&constant, 0.0, 2.0).unwrap(), 0.0);

        let unit = StepFunction::constant(make_tree(2, 3).unwrap(), 1.0).unwrap();
        assert_eq!(stability_metric(&unit, 1.0, 2.0).unwrap(), 1.0);
        assert_eq!(stability_metric(&unit, 0.5, 2.0).unwrap(), 0.25);
        assert!(stability_metric(&unit, -0.1, 2.0).is_err());
        assert!(stability_metric(&unit, 0.5, 0.5).is_err());
    }

    #[test]
    fn q_track_constant_family_is_a_fixed_point() {
        let phi = StepFunction::constant(make_tree(2, 4).unwrap(), 1.7).unwrap();
        let rows = q_integral_track(&[phi], 1.5, 0.0).unwrap();
        assert_eq!(rows.len(), 1);
        let row = rows[0];
        assert_eq!(row.omega, 1.0);
        assert_eq!(row.predicted.to_bits(), row.mass_q.to_bits());
        assert_eq!(row.measured.to_bits(), row.mass_q.to_bits());
        assert_eq!(row.omega_target, 1.0);
    }

    #[test]
    fn q_track_omega_chases_the_matched_target() {
        let phis = extremal_sequence(1.0, 4.0 / 3.0, 2.0, &[(2, 4), (2, 8), (2, 12)]).unwrap();
        let rows = q_integral_track(&phis, 1.5, 0.5).unwrap();
        let errors: Vec<f64> = rows.iter().map(|r| (r.omega - r.omega_target).abs()).collect();
        assert!(errors[1] < errors[0]);
        assert!(errors[2] < errors[1]);
        assert!((rows[0].omega_target - 1.5).abs() < 1e-15);
    }

    #[test]
    fn ladder_rows_and_csv_layout() {
        let rows = refinement_ladder(1.0, 4.0 / 3.0, 2.0, 1.5, &[(4, 2), (2, 6)]).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!((rows[0].step, rows[0].arity, rows[0].depth), (0, 4, 2));
        assert_eq!((rows[1].step, rows[1].arity, rows[1].depth), (1, 2, 6));
        for row in &rows {
            assert!((row.f - 1.0).abs() <= 1e-9, "mass drifted: {}", row.f);
            assert!(row.gap18 >= -1e-11);
            assert!(row.gap41 >= -1e-11);
            assert!(row.stability >= 0.0);
            assert!(row.maximal_p_integral <= row.bellman_target + 1e-9);
            assert!(row.q_measured <= row.q_predicted + 1e-9);
        }
        let csv = ladder_csv(&rows);
        assert!(csv.starts_with(
            "step,arity,depth,f,F_measured,maximal_p_integral,bellman_target,\
             gap18,gap41,stability,A_q,q_measured,q_predicted\n"
        ));
        assert_eq!(csv.lines().count(), 3);
        assert!(csv.lines().nth(1).unwrap().starts_with("0,4,2,"));
    }

    #[test]
    fn parameter_validation() {
        assert!(extremal_sequence(2.0, 1.0, 2.0, &[(2, 2)]).is_err());
        assert!(extremal_sequence(1.0, 2.0, 2.0, &[]).is_err());
        assert!(refinement_ladder(1.0, 4.0 / 3.0, 2.0, 1.0, &[(2, 2)]).is_err());
        assert!(refinement_ladder(1.0, 4.0 / 3.0, 2.0, 2.0, &[(2, 2)]).is_err());
        let constant = Profile::Step(Rearranged::from_segments(vec![1.0], vec![1.0]).unwrap());
        assert!(spine_construct(&SpineSpec {
            profile: constant,
            arity: 2,
            depth: 0,
        })
        .is_err());
    }
}
