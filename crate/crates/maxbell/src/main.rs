//! Command-line front end: Bellman constants, inequality verification on
//! given or random step functions, sharpness sweeps, extremal refinement
//! ladders, stability trajectories, and a self-test over every invariant
//! suite.
//!
//! Exit codes: `0` on success, `1` when a verified invariant is violated,
//! `2` on invalid configuration (bad flags, out-of-domain parameters,
//! malformed input files). All output is deterministic: a fixed seed and
//! configuration reproduce every artifact byte for byte.

use clap::{Parser, Subcommand, ValueEnum};
use maxbell::bellman::{bellman_value, omega_p, solve_beta};
use maxbell::extremal::{
    refinement_ladder_with_budget, ladder_csv, stability_metric, LadderRow,
};
use maxbell::hardy::{geometric_alpha_grid, sharpness_sweep, sweep_csv, SweepPoint};
use maxbell::maximal::linearize;
use maxbell::tree::{make_tree_with_budget, StepFunction, DEFAULT_LEAF_BUDGET};
use maxbell::verify::{
    classic_bound_report, elementary_oracles, equivalent_form_report, report_json,
    sharp_bound_report,
};
use maxbell::{Error, GapReport, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "maxbell",
    version,
    about = "Sharp maximal-operator inequalities on homogeneous trees: \
             verification, sweeps, and extremal experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Print beta, omega_p, and the Bellman value B(f, F) for a mass/energy pair.
    Bellman {
        /// Mass f = ∫φ.
        f: f64,
        /// Energy F = ∫φ^p (requires f^p <= F).
        #[arg(value_name = "F")]
        big_f: f64,
        /// Exponent p > 1.
        p: f64,
        /// Output as text lines (default) or JSON.
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Verify the sharp bound, its equivalent form, and the classic bound
    /// on a given step function (--in) or on seeded random ones.
    Verify {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.5)]
        q: f64,
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        /// Tree arity for random draws.
        #[arg(long, default_value_t = 2)]
        arity: u32,
        /// Tree depth for random draws.
        #[arg(long, default_value_t = 6)]
        depth: u32,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Number of random step functions when no input file is given.
        #[arg(long, default_value_t = 1)]
        samples: u64,
        /// Step-function JSON file to verify instead of random draws.
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Emit the sharpness sweep G(alpha) -> q/(p-1) as CSV (or JSON).
    Sweep {
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 2.0)]
        q: f64,
        /// Number of grid points approaching alpha = 1/p geometrically.
        #[arg(long, default_value_t = 24)]
        samples: u64,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Run the matched refinement ladder at fixed arity, depths 1..=depth.
    Extremal {
        #[arg(long, default_value_t = 1.0)]
        f: f64,
        /// Energy F = ∫φ^p (defaults to 4/3, the matched value for
        /// f = 1, p = 2, beta = 1/2).
        #[arg(long = "F", default_value_t = 4.0 / 3.0)]
        big_f: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.5)]
        q: f64,
        #[arg(long, default_value_t = 2)]
        arity: u32,
        /// Deepest rung of the ladder.
        #[arg(long, default_value_t = 10)]
        depth: u32,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Emit a stability trajectory: the matched ladder without --in, or a
    /// single stability report with the linearization export for a given
    /// step function.
    Stability {
        #[arg(long, default_value_t = 1.0)]
        f: f64,
        #[arg(long = "F", default_value_t = 4.0 / 3.0)]
        big_f: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 1.5)]
        q: f64,
        /// Override the eigenrelation parameter; defaults to the beta
        /// matched to (f, F, p) — or to the input function's own pair.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long, default_value_t = 2)]
        arity: u32,
        #[arg(long, default_value_t = 10)]
        depth: u32,
        /// Step-function JSON file for a single-shot report.
        #[arg(long = "in", value_name = "FILE")]
        input: Option<PathBuf>,
        #[arg(long, value_name = "FILE")]
        out: Option<PathBuf>,
        #[arg(long, value_enum)]
        format: Option<Format>,
    },
    /// Run every invariant suite; exits nonzero on any violation.
    Selftest {
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: u64,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(2)
        }
    }
}

/// Leaf budget for every tree the CLI builds: `MAXBELL_MAX_LEAVES` when
/// set, otherwise the library default of `2^24`.
fn leaf_budget() -> Result<u64> {
    match std::env::var("MAXBELL_MAX_LEAVES") {
        Ok(text) => text.parse::<u64>().map_err(|_| {
            Error::domain(format!(
                "MAXBELL_MAX_LEAVES must be a positive integer (got {text:?})"
            ))
        }),
        Err(_) => Ok(DEFAULT_LEAF_BUDGET),
    }
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|err| Error::domain(format!("cannot write {}: {err}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn json_number(x: f64) -> String {
    serde_json::to_string(&x).unwrap_or_else(|_| "null".into())
}

fn read_step_function(path: &PathBuf) -> Result<StepFunction> {
    let text = std::fs::read_to_string(path)
        .map_err(|err| Error::domain(format!("cannot read {}: {err}", path.display())))?;
    StepFunction::from_json(&text)
}

fn random_step_function(rng: &mut ChaCha8Rng, arity: u32, depth: u32, budget: u64) -> Result<StepFunction> {
    let config = make_tree_with_budget(arity, depth, budget)?;
    let values = (0..config.leaf_count())
        .map(|_| {
            if rng.gen_bool(0.15) {
                0.0
            } else {
                rng.gen_range(0.0..4.0)
            }
        })
        .collect();
    StepFunction::new(config, values)
}

fn run(command: Command) -> Result<ExitCode> {
    match command {
        Command::Bellman { f, big_f, p, format } => run_bellman(f, big_f, p, format),
        Command::Verify {
            p,
            q,
            beta,
            arity,
            depth,
            seed,
            samples,
            input,
            out,
            format,
        } => run_verify(p, q, beta, arity, depth, seed, samples, input, out, format),
        Command::Sweep {
            p,
            q,
            samples,
            out,
            format,
        } => run_sweep(p, q, samples, out, format),
        Command::Extremal {
            f,
            big_f,
            p,
            q,
            arity,
            depth,
            out,
            format,
        } => run_extremal(f, big_f, p, q, arity, depth, out, format),
        Command::Stability {
            f,
            big_f,
            p,
            q,
            beta,
            arity,
            depth,
            input,
            out,
            format,
        } => run_stability(f, big_f, p, q, beta, arity, depth, input, out, format),
        Command::Selftest { seed, samples } => run_selftest(seed, samples),
    }
}

fn run_bellman(f: f64, big_f: f64, p: f64, format: Option<Format>) -> Result<ExitCode> {
    let beta = solve_beta(f, big_f, p)?;
    let omega = omega_p((f.powf(p) / big_f).min(1.0), p)?;
    let value = bellman_value(f, big_f, p)?;
    match format {
        Some(Format::Json) => {
            println!(
                "{{\"beta\":{},\"omega\":{},\"B\":{}}}",
                json_number(beta),
                json_number(omega),
                json_number(value)
            );
        }
        Some(Format::Csv) => {
            println!("beta,omega,B");
            println!("{beta},{omega},{value}");
        }
        None => {
            println!("beta = {beta}");
            println!("omega_p = {omega}");
            println!("B = {value}");
        }
    }
    Ok(ExitCode::SUCCESS)
}

/// Gap tolerance for report-level verification: rounding-scale slack,
/// relative to the magnitude of the right side.
fn report_ok(report: &GapReport) -> bool {
    report.holds(1e-11 * report.rhs.abs().max(1.0))
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    p: f64,
    q: f64,
    beta: f64,
    arity: u32,
    depth: u32,
    seed: u64,
    samples: u64,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Format,
) -> Result<ExitCode> {
    let budget = leaf_budget()?;
    let phis: Vec<StepFunction> = match &input {
        Some(path) => vec![read_step_function(path)?],
        None => {
            if samples == 0 {
                return Err(Error::domain("samples must be at least 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..samples)
                .map(|_| random_step_function(&mut rng, arity, depth, budget))
                .collect::<Result<_>>()?
        }
    };

    let mut params = BTreeMap::new();
    params.insert("beta".to_string(), beta);
    params.insert("p".to_string(), p);
    params.insert("q".to_string(), q);

    let mut all_ok = true;
    let mut json_rows = Vec::new();
    let mut csv = String::from("sample,report,lhs,rhs,gap\n");
    for (index, phi) in phis.iter().enumerate() {
        let sharp = sharp_bound_report(phi, p, q, beta)?;
        let equivalent = equivalent_form_report(phi, p, q, beta)?;
        let classic = classic_bound_report(phi, p)?;
        for (name, report) in [
            ("sharpBound", &sharp),
            ("equivalentForm", &equivalent),
            ("classicBound", &classic),
        ] {
            all_ok &= report_ok(report);
            csv.push_str(&format!(
                "{index},{name},{},{},{}\n",
                report.lhs, report.rhs, report.gap
            ));
        }
        json_rows.push(format!(
            "{{\"sample\":{index},\"sharpBound\":{},\"equivalentForm\":{},\"classicBound\":{}}}",
            report_json(&sharp, &params),
            report_json(&equivalent, &params),
            report_json(&classic, &params)
        ));
    }

    let text = match format {
        Format::Json => format!("[{}]\n", json_rows.join(",")),
        Format::Csv => csv,
    };
    emit(&out, &text)?;
    if all_ok {
        Ok(ExitCode::SUCCESS)
    } else {
        eprintln!("verification failed: at least one gap fell below tolerance");
        Ok(ExitCode::from(1))
    }
}

fn sweep_points_json(points: &[SweepPoint], param_name: &str) -> String {
    let rows: Vec<String> = points
        .iter()
        .map(|point| {
            format!(
                "{{\"{param_name}\":{},\"G\":{},\"limit\":{},\"abs_err\":{}}}",
                json_number(point.param),
                json_number(point.ratio),
                json_number(point.limit),
                json_number(point.abs_err)
            )
        })
        .collect();
    format!("[{}]\n", rows.join(","))
}

fn run_sweep(p: f64, q: f64, samples: u64, out: Option<PathBuf>, format: Format) -> Result<ExitCode> {
    if samples < 2 {
        return Err(Error::domain("sweep needs at least 2 samples"));
    }
    let grid = geometric_alpha_grid(p, 0.25 / p, 1e-6, samples as usize)?;
    let points = sharpness_sweep(p, q, &grid)?;
    let text = match format {
        Format::Csv => sweep_csv(&points, "alpha"),
        Format::Json => sweep_points_json(&points, "alpha"),
    };
    emit(&out, &text)
        .map(|_| ExitCode::SUCCESS)
}

fn ladder_rows_json(rows: &[LadderRow]) -> String {
    let body: Vec<String> = rows
        .iter()
        .map(|row| {
            format!(
                "{{\"step\":{},\"arity\":{},\"depth\":{},\"f\":{},\"F_measured\":{},\
                 \"maximal_p_integral\":{},\"bellman_target\":{},\"gap18\":{},\"gap41\":{},\
                 \"stability\":{},\"A_q\":{},\"q_measured\":{},\"q_predicted\":{}}}",
                row.step,
                row.arity,
                row.depth,
                json_number(row.f),
                json_number(row.big_f_measured),
                json_number(row.maximal_p_integral),
                json_number(row.bellman_target),
                json_number(row.gap18),
                json_number(row.gap41),
                json_number(row.stability),
                json_number(row.mass_q),
                json_number(row.q_measured),
                json_number(row.q_predicted)
            )
        })
        .collect();
    format!("[{}]\n", body.join(","))
}

fn fixed_arity_ladder(arity: u32, depth: u32) -> Result<Vec<(u32, u32)>> {
    if depth == 0 {
        return Err(Error::domain("depth must be at least 1"));
    }
    Ok((1..=depth).map(|d| (arity, d)).collect())
}

#[allow(clippy::too_many_arguments)]
fn run_extremal(
    f: f64,
    big_f: f64,
    p: f64,
    q: f64,
    arity: u32,
    depth: u32,
    out: Option<PathBuf>,
    format: Format,
) -> Result<ExitCode> {
    let budget = leaf_budget()?;
    let refinements = fixed_arity_ladder(arity, depth)?;
    let rows = refinement_ladder_with_budget(f, big_f, p, q, &refinements, budget)?;
    let text = match format {
        Format::Csv => ladder_csv(&rows),
        Format::Json => ladder_rows_json(&rows),
    };
    emit(&out, &text).map(|_| ExitCode::SUCCESS)
}

#[allow(clippy::too_many_arguments)]
fn run_stability(
    f: f64,
    big_f: f64,
    p: f64,
    q: f64,
    beta: Option<f64>,
    arity: u32,
    depth: u32,
    input: Option<PathBuf>,
    out: Option<PathBuf>,
    format: Option<Format>,
) -> Result<ExitCode> {
    let budget = leaf_budget()?;
    match input {
        Some(path) => {
            // Single-shot: stability of the given function against its own
            // matched beta (or the override), plus the linearization export.
            let phi = read_step_function(&path)?;
            let mass = phi.integrate();
            let energy = phi.power_integral(p)?;
            let beta = match beta {
                Some(b) => b,
                None => solve_beta(mass, energy.max(mass.powf(p)), p)?,
            };
            let stability = stability_metric(&phi, beta, p)?;
            let linearization = linearize(&phi)?;
            let text = format!(
                "{{\"p\":{},\"beta\":{},\"f\":{},\"energy\":{},\"stability\":{},\
                 \"linearization\":{}}}\n",
                json_number(p),
                json_number(beta),
                json_number(mass),
                json_number(energy),
                json_number(stability),
                linearization.to_json()
            );
            emit(&out, &text).map(|_| ExitCode::SUCCESS)
        }
        None => {
            // Trajectory: the matched ladder at fixed arity. A beta
            // override is rejected because the ladder is defined by the
            // matched parameter.
            if beta.is_some() {
                return Err(Error::domain(
                    "--beta applies only with --in; the trajectory always uses the matched beta",
                ));
            }
            let refinements = fixed_arity_ladder(arity, depth)?;
            let rows = refinement_ladder_with_budget(f, big_f, p, q, &refinements, budget)?;
            let text = match format.unwrap_or(Format::Csv) {
                Format::Csv => ladder_csv(&rows),
                Format::Json => ladder_rows_json(&rows),
            };
            emit(&out, &text).map(|_| ExitCode::SUCCESS)
        }
    }
}

struct SuiteOutcome {
    failures: u64,
}

impl SuiteOutcome {
    fn check(&mut self, name: &str, ok: bool, detail: impl FnOnce() -> String) {
        if ok {
            println!("ok {name}");
        } else {
            println!("FAIL {name}: {}", detail());
            self.failures += 1;
        }
    }
}

fn run_selftest(seed: u64, samples: u64) -> Result<ExitCode> {
    use maxbell::numeric::scaled_gap;

    if samples == 0 {
        return Err(Error::domain("samples must be at least 1"));
    }
    let budget = leaf_budget()?;
    let mut outcome = SuiteOutcome { failures: 0 };

    // Elementary scalar inequalities.
    let worst = elementary_oracles(samples, seed);
    outcome.check(
        "elementary-inequalities",
        worst.superadditivity >= -1e-12 && worst.young >= -1e-12 && worst.tau_convexity >= -1e-12,
        || {
            format!(
                "worst slacks {} / {} / {}",
                worst.superadditivity, worst.young, worst.tau_convexity
            )
        },
    );

    // Bellman inversion on a fixed grid.
    let mut worst_inversion = 0.0f64;
    for p in [1.2, 1.5, 2.0, 3.0, 5.0] {
        for k in 1..=1000 {
            let z = k as f64 / 1000.0;
            let w = omega_p(z, p)?;
            worst_inversion = worst_inversion.max((maxbell::bellman::h_p(w, p)? - z).abs());
        }
    }
    outcome.check("bellman-inversion", worst_inversion <= 1e-10, || {
        format!("worst |H_p(omega_p(z)) - z| = {worst_inversion}")
    });

    // Randomized tree corpus: linearization structure and all gap reports.
    let corpus = (samples / 20).clamp(25, 400);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut corpus_ok = true;
    let mut gap_ok = true;
    let mut identity_ok = true;
    let mut weak_lp_ok = true;
    let mut detail = String::new();
    for draw in 0..corpus {
        let arity = rng.gen_range(2..=4);
        let depth = rng.gen_range(1..=5);
        let phi = random_step_function(&mut rng, arity, depth, budget)?;
        let linearization = linearize(&phi)?;
        if linearization.reconstruct().values() != maxbell::maximal::maximal_function(&phi).values()
        {
            corpus_ok = false;
            detail = format!("reconstruction mismatch on draw {draw}");
        }
        let counted: u64 = linearization
            .support()
            .iter()
            .map(|node| linearization.a_count(node))
            .sum();
        if counted != phi.config().leaf_count() {
            corpus_ok = false;
            detail = format!("ownership counts disagree on draw {draw}");
        }

        let p = rng.gen_range(1.3..3.5);
        let q = 1.0 + (p - 1.0) * rng.gen_range(0.0..1.0);
        let beta = rng.gen_range(0.05..2.0);
        let sharp = sharp_bound_report(&phi, p, q, beta)?;
        let equivalent = equivalent_form_report(&phi, p, q, beta)?;
        if !report_ok(&sharp) || !report_ok(&equivalent) {
            gap_ok = false;
            detail = format!("gap violation on draw {draw}");
        }
        let c2 = sharp.components["c2"];
        if scaled_gap(equivalent.gap * c2, sharp.gap) > 1e-10 {
            identity_ok = false;
            detail = format!("gap identity violated on draw {draw}");
        }

        let lambda = rng.gen_range(0.2..3.0);
        let weak = maxbell::maximal::weak_type_gap(&phi, lambda)?;
        let lp = maxbell::maximal::lp_bound_gap(&phi, p)?;
        if !weak.holds(1e-12) || !lp.holds(1e-12) {
            weak_lp_ok = false;
            detail = format!("weak-type or L^p gap violation on draw {draw}");
        }
    }
    outcome.check("linearization-structure", corpus_ok, || detail.clone());
    outcome.check("sharp-bound-gaps", gap_ok, || detail.clone());
    outcome.check("gap-arrangement-identity", identity_ok, || detail.clone());
    outcome.check("weak-type-and-lp-gaps", weak_lp_ok, || detail.clone());

    // Hardy side: classical-point exactness on random rearrangements.
    let mut hardy_ok = true;
    for _ in 0..corpus.min(60) {
        let phi = random_step_function(&mut rng, 3, 4, budget)?;
        let profile = maxbell::Profile::Step(phi.decreasing_rearrangement());
        for p in [1.5, 2.0, 3.0] {
            let report =
                maxbell::hardy::hardy_bound_report(&profile, p, 1.0, 1.0 / (p - 1.0))?;
            if report.gap.abs() > 1e-9 * report.rhs.abs().max(1.0) {
                hardy_ok = false;
            }
        }
    }
    outcome.check("hardy-classical-exactness", hardy_ok, String::new);

    // Spine sandwich on the matched family.
    let mut spine_ok = true;
    let g = maxbell::PowerLaw::from_mean_and_beta(1.0, 0.5)?;
    let profile = maxbell::Profile::Power(g);
    let ceiling = profile.hardy_power_integral(2.0)?;
    let mut previous = 0.0;
    for depth in 1..=8 {
        let spine = maxbell::extremal::spine_construct_with_budget(
            &maxbell::extremal::SpineSpec {
                profile: profile.clone(),
                arity: 2,
                depth,
            },
            budget,
        )?;
        let tree_p =
            maxbell::maximal::maximal_function(&spine).power_integral(2.0)?;
        if tree_p > ceiling + 1e-9 || tree_p < previous - 1e-12 {
            spine_ok = false;
        }
        previous = tree_p;
    }
    outcome.check("spine-symmetrization", spine_ok, String::new);

    println!(
        "selftest: {} suites failed (seed = {seed}, samples = {samples})",
        outcome.failures
    );
    if outcome.failures == 0 {
        Ok(ExitCode::SUCCESS)
    } else {
        Ok(ExitCode::from(1))
    }
}
