//! Reproduces every number in the README "Calibration" section:
//! the depth-ratio table for the p = 2, β = 0.5 family, the arity
//! comparison at the leaf budget, the refinement-ladder trajectory, the
//! mismatched-β control floor, and the ω tracking errors.
//!
//! Run with `cargo run --release --example calibrate`.

use maxbell::extremal::{
    extremal_sequence, q_integral_track, refinement_ladder, spine_construct, stability_metric,
    SpineSpec,
};
use maxbell::hardy::{PowerLaw, Profile};
use maxbell::maximal::maximal_function;

fn main() {
    let p = 2.0;
    let beta = 0.5;
    let g = PowerLaw::from_mean_and_beta(1.0, beta).unwrap();
    let profile = Profile::Power(g);
    let ceiling = profile.hardy_power_integral(p).unwrap();
    println!("continuous ceiling ∫(Hg)^p = {ceiling}");
    println!("depth,tree_p,ratio");
    for depth in [2, 4, 6, 8, 10, 12, 14, 16, 18, 20, 22] {
        let spine = spine_construct(&SpineSpec {
            profile: profile.clone(),
            arity: 2,
            depth,
        })
        .unwrap();
        let tree_p = maximal_function(&spine).power_integral(p).unwrap();
        println!("{depth},{tree_p},{}", tree_p / ceiling);
    }

    println!("\narity comparison at ~1M leaves (p=2, beta=0.5):");
    for (arity, depth) in [(2u32, 20u32), (3, 12), (4, 10), (8, 6), (16, 5)] {
        let spine = spine_construct(&SpineSpec {
            profile: profile.clone(),
            arity,
            depth,
        })
        .unwrap();
        let tree_p = maximal_function(&spine).power_integral(p).unwrap();
        println!("arity {arity} depth {depth}: ratio {}", tree_p / ceiling);
    }

    let rungs = [(8u32, 4u32), (4, 7), (2, 16)];
    println!("\nladder f=1 F=4/3 p=2 q=1.5, refinements {rungs:?}");
    let rows = refinement_ladder(1.0, 4.0 / 3.0, p, 1.5, &rungs).unwrap();
    for row in &rows {
        println!(
            "step {}: arity {} depth {} gap18 {} gap41 {} stability {} |q_meas-q_pred| {}",
            row.step,
            row.arity,
            row.depth,
            row.gap18,
            row.gap41,
            row.stability,
            (row.q_measured - row.q_predicted).abs()
        );
    }

    println!("\nmismatched-beta control along the ladder (matched beta = 0.5):");
    let phis = extremal_sequence(1.0, 4.0 / 3.0, p, &rungs).unwrap();
    for (rung, phi) in rungs.iter().zip(&phis) {
        for wrong in [0.0, 0.25, 1.0, 1.5] {
            let s = stability_metric(phi, wrong, p).unwrap();
            println!("rung {rung:?} beta={wrong}: stability {s}");
        }
    }

    println!("\nomega track along the ladder (target 1.5):");
    for row in q_integral_track(&phis, 1.5, beta).unwrap() {
        println!(
            "omega {} (err {}), q_pred err {}",
            row.omega,
            (row.omega - row.omega_target).abs(),
            (row.measured - row.predicted).abs()
        );
    }
}
