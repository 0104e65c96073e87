//! Batch front-end: parse input specs, run evaluators and verifiers, emit
//! deterministic JSON/CSV reports.
//!
//! Exit codes: 0 done, 2 input problem, 3 evaluator error, 4 inequality
//! evidence failure, 5 test-radius relocation exhausted. Identical
//! configurations (including seed and worker count) produce byte-identical
//! reports; floats are serialized with 17 significant digits.

mod inputs;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use expsys_core::convexfun::{build_smoothing, ConvexDecreasingFunction};
use expsys_core::criteria::{
    classify_weight, evaluate_b1, evaluate_b2, evaluate_b3, evaluate_ng, evaluate_t1_i,
    evaluate_t1_ii1, evaluate_t1_ii2, ClassifyProbe, CriteriaError, CriterionReport,
};
use expsys_core::geometry::{
    arc_length_measure, convex_hull, perimeter, support, ConvexBody, PlanePoint,
};
use expsys_core::jsonout::{format_float, Json};
use expsys_core::riesz::{
    mass_inequality_check_with_mode, inequality_suite_cases, growth_deficit, RieszError, SuiteCase,
    TestEntireFunction, VstarMode,
};
use expsys_core::subharmonic::RadialSubharmonic;
use inputs::InputError;

#[derive(Parser)]
#[command(
    name = "expsys",
    about = "Numerical laboratory for integral completeness criteria of exponential systems",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct CommonOpts {
    /// Output directory for report files.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Seed for every randomized generator in this run.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads (0 = library default).
    #[arg(long, default_value_t = 0)]
    jobs: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Convex hull of a point set: vertices, perimeter, support samples,
    /// arc-length atoms.
    Hull {
        /// Points file (JSON {"points": [[x, y], ...]} or CSV re,im).
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Evaluate completeness criteria for a distribution against a body.
    Criteria {
        /// Distribution file (JSON points/generator or CSV re,im,mult).
        #[arg(long)]
        input: PathBuf,
        /// Target body file (JSON).
        #[arg(long)]
        body: PathBuf,
        /// Weight spec file (JSON); defaults to the constant weight 1.
        #[arg(long)]
        f: Option<PathBuf>,
        /// Sweep grid file (JSON); defaults to a grid sized by truncation.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Comma-separated criteria (default: all seven).
        #[arg(long, value_delimiter = ',')]
        criteria: Option<Vec<String>>,
        /// Parameter p for the averaged conditions.
        #[arg(long, default_value_t = 0.5)]
        p_low: f64,
        /// Parameter p for the tail-averaged condition.
        #[arg(long, default_value_t = 2.0)]
        p_high: f64,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Classify a weight for the two ratio conditions.
    ClassifyF {
        #[arg(long)]
        f: PathBuf,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Verify the annulus Riesz-mass inequality and the growth deficit.
    VerifyRiesz {
        /// Optional distribution of zeros; absent = built-in seeded suite.
        #[arg(long)]
        input: Option<PathBuf>,
        /// Growth body (required with --input).
        #[arg(long)]
        body: Option<PathBuf>,
        #[arg(long)]
        f: Option<PathBuf>,
        /// Grid file providing r (inner radii) and R (outer radii) lists.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Circle sample count for the boundary quadrature.
        #[arg(long, default_value_t = 4096)]
        samples: usize,
        /// Self-test failure harness: negate the inversion profile.
        #[arg(long, hide = true)]
        inject_negated_vstar: bool,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Build C^2 convex smoothing stages of a weight.
    ConstructSmoothing {
        #[arg(long)]
        f: PathBuf,
        #[arg(long, default_value_t = 4)]
        n_max: u32,
        #[command(flatten)]
        common: CommonOpts,
    },
    /// Dump radial profiles (rho, F_R, V*, Laplacian) to CSV.
    ProfileSubharmonic {
        #[arg(long)]
        f: Option<PathBuf>,
        /// Inner radius of the annulus.
        #[arg(long, default_value_t = 2.0)]
        r: f64,
        /// Outer radius of the annulus.
        #[arg(long = "big-r", default_value_t = 16.0)]
        big_r: f64,
        /// Number of radial sample rows.
        #[arg(long, default_value_t = 400)]
        samples: usize,
        #[command(flatten)]
        common: CommonOpts,
    },
}

/// Failure carrying its process exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn input(msg: impl Into<String>) -> Self {
        Failure {
            code: 2,
            message: msg.into(),
        }
    }
    fn evaluator(msg: impl Into<String>) -> Self {
        Failure {
            code: 3,
            message: msg.into(),
        }
    }
    fn inequality(msg: impl Into<String>) -> Self {
        Failure {
            code: 4,
            message: msg.into(),
        }
    }
    fn relocation(msg: impl Into<String>) -> Self {
        Failure {
            code: 5,
            message: msg.into(),
        }
    }
}

impl From<InputError> for Failure {
    fn from(e: InputError) -> Self {
        Failure::input(e.to_string())
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("EXPSYS_LOG", "warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Hull { input, common } => with_pool(&common, || cmd_hull(&input, &common)),
        Command::Criteria {
            input,
            body,
            f,
            grid,
            criteria,
            p_low,
            p_high,
            common,
        } => with_pool(&common, || {
            cmd_criteria(&input, &body, f.as_deref(), grid.as_deref(), criteria, p_low, p_high, &common)
        }),
        Command::ClassifyF { f, common } => with_pool(&common, || cmd_classify(&f, &common)),
        Command::VerifyRiesz {
            input,
            body,
            f,
            grid,
            samples,
            inject_negated_vstar,
            common,
        } => with_pool(&common, || {
            cmd_verify_riesz(
                input.as_deref(),
                body.as_deref(),
                f.as_deref(),
                grid.as_deref(),
                samples,
                inject_negated_vstar,
                &common,
            )
        }),
        Command::ConstructSmoothing { f, n_max, common } => {
            with_pool(&common, || cmd_construct_smoothing(&f, n_max, &common))
        }
        Command::ProfileSubharmonic {
            f,
            r,
            big_r,
            samples,
            common,
        } => with_pool(&common, || {
            cmd_profile(f.as_deref(), r, big_r, samples, &common)
        }),
    }
}

/// Run a closure inside a worker pool of the configured size. Results are
/// deterministic regardless of the pool size; the flag only bounds
/// parallelism.
fn with_pool<T>(common: &CommonOpts, body: impl FnOnce() -> Result<T, Failure> + Send) -> Result<T, Failure>
where
    T: Send,
{
    if common.jobs == 0 {
        return body();
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| Failure::evaluator(format!("cannot build worker pool: {e}")))?;
    pool.install(body)
}

fn write_report(dir: &Path, name: &str, json: &Json) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, json.render())
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<PathBuf, Failure> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Failure::input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, text)
        .map_err(|e| Failure::input(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

fn config_json(command: &str, common: &CommonOpts, samples: Option<usize>) -> Json {
    let mut fields = vec![
        ("command", Json::str(command)),
        ("seed", Json::UInt(common.seed)),
        ("jobs", Json::UInt(common.jobs as u64)),
    ];
    if let Some(s) = samples {
        fields.push(("samples", Json::UInt(s as u64)));
    }
    Json::object(fields)
}

fn body_json(body: &ConvexBody) -> Json {
    let pt = |p: &PlanePoint| Json::array([Json::Float(p.re), Json::Float(p.im)]);
    match body {
        ConvexBody::Polygon(v) => Json::object(vec![
            ("type", Json::str("polygon")),
            ("vertices", Json::array(v.iter().map(pt))),
        ]),
        ConvexBody::Disk { center, radius } => Json::object(vec![
            ("type", Json::str("disk")),
            ("center", pt(center)),
            ("radius", Json::Float(*radius)),
        ]),
        ConvexBody::Segment { a, b } => Json::object(vec![
            ("type", Json::str("segment")),
            ("a", pt(a)),
            ("b", pt(b)),
        ]),
        ConvexBody::Point(p) => {
            Json::object(vec![("type", Json::str("point")), ("p", pt(p))])
        }
    }
}

// ---------------------------------------------------------------------------
// hull
// ---------------------------------------------------------------------------

fn cmd_hull(input: &Path, common: &CommonOpts) -> Result<(), Failure> {
    let points = inputs::load_points(input)?;
    let hull = convex_hull(&points).map_err(|e| Failure::input(e.to_string()))?;
    let prm = perimeter(&hull);

    let support_samples: Vec<Json> = (0..16)
        .map(|k| {
            let theta = std::f64::consts::TAU * k as f64 / 16.0;
            let z = PlanePoint::from_polar(1.0, theta);
            Json::object(vec![
                ("theta", Json::Float(theta)),
                ("value", Json::Float(support(&hull, z))),
            ])
        })
        .collect();

    let arc = match arc_length_measure(&hull) {
        Ok(m) => Json::object(vec![
            (
                "atoms",
                Json::array(m.atoms.iter().map(|a| {
                    Json::object(vec![
                        ("theta", Json::Float(a.theta)),
                        ("weight", Json::Float(a.weight)),
                    ])
                })),
            ),
            (
                "density",
                m.density.map(Json::Float).unwrap_or(Json::Null),
            ),
            ("total_mass", Json::Float(m.total_mass())),
        ]),
        Err(_) => Json::Null,
    };

    let report = Json::object(vec![
        ("config", config_json("hull", common, None)),
        ("input", Json::str(input.display().to_string())),
        ("hull", body_json(&hull)),
        ("perimeter", Json::Float(prm)),
        ("support_samples", Json::Array(support_samples)),
        ("arc_length", arc),
    ]);
    let path = write_report(&common.out, "hull.json", &report)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// criteria
// ---------------------------------------------------------------------------

const ALL_CRITERIA: [&str; 7] = ["ng", "b1", "b2", "b3", "t1_i", "t1_ii1", "t1_ii2"];

#[allow(clippy::too_many_arguments)]
fn cmd_criteria(
    input: &Path,
    body_path: &Path,
    f_path: Option<&Path>,
    grid_path: Option<&Path>,
    criteria: Option<Vec<String>>,
    p_low: f64,
    p_high: f64,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let z = inputs::load_distribution(input, common.seed)?;
    let body = inputs::load_body(body_path)?;
    let weight = match f_path {
        Some(p) => inputs::load_weight(p)?,
        None => ConvexDecreasingFunction::constant(1.0).expect("unit weight"),
    };
    let grid = match grid_path {
        Some(p) => inputs::load_grid(p)?,
        None => inputs::default_grid(&z),
    };
    let requested = criteria.unwrap_or_else(|| ALL_CRITERIA.iter().map(|s| s.to_string()).collect());
    for name in &requested {
        if !ALL_CRITERIA.contains(&name.as_str()) {
            return Err(Failure::input(format!(
                "unknown criterion '{name}' (known: {})",
                ALL_CRITERIA.join(", ")
            )));
        }
    }
    let p_bound = perimeter(&body);
    if p_bound <= 0.0 {
        return Err(Failure::input(
            "criteria need a body with positive perimeter".to_string(),
        ));
    }

    let mut evaluator_errors = Vec::new();
    for name in &requested {
        let result: Result<CriterionReport, CriteriaError> = match name.as_str() {
            "ng" => evaluate_ng(&z, &body, &grid),
            "b1" => evaluate_b1(&z, &body, p_low, &grid),
            "b2" => evaluate_b2(&z, &body, &grid),
            "b3" => evaluate_b3(&z, &body, p_high, &grid),
            "t1_i" => evaluate_t1_i(&z, &weight, p_bound, &grid),
            "t1_ii1" => evaluate_t1_ii1(&z, &weight, p_bound, &grid),
            "t1_ii2" => evaluate_t1_ii2(&z, &weight, p_bound, &grid),
            _ => unreachable!(),
        };
        let report_json = match result {
            Ok(report) => {
                let mut csv = String::from("r,a,R,value\n");
                for cell in &report.values {
                    let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        format_float(cell.r),
                        opt(cell.a),
                        opt(cell.outer_r),
                        format_float(cell.value)
                    ));
                }
                write_text(&common.out, &format!("criterion_{name}.csv"), &csv)?;
                Json::object(vec![
                    ("config", config_json("criteria", common, None)),
                    ("distribution", Json::str(z.label())),
                    ("body", body_json(&body)),
                    ("status", Json::str("ok")),
                    ("report", report.to_json()),
                ])
            }
            Err(e @ (CriteriaError::InapplicableII1 | CriteriaError::InapplicableII2)) => {
                Json::object(vec![
                    ("config", config_json("criteria", common, None)),
                    ("distribution", Json::str(z.label())),
                    ("body", body_json(&body)),
                    ("status", Json::str("inapplicable")),
                    (
                        "report",
                        Json::object(vec![
                            ("criterion", Json::str(name.as_str())),
                            ("weight", Json::str(weight.describe())),
                            ("reason", Json::str(e.to_string())),
                        ]),
                    ),
                ])
            }
            Err(e) => {
                evaluator_errors.push(format!("{name}: {e}"));
                Json::object(vec![
                    ("config", config_json("criteria", common, None)),
                    ("distribution", Json::str(z.label())),
                    ("body", body_json(&body)),
                    ("status", Json::str("error")),
                    (
                        "report",
                        Json::object(vec![
                            ("criterion", Json::str(name.as_str())),
                            ("reason", Json::str(e.to_string())),
                        ]),
                    ),
                ])
            }
        };
        let path = write_report(&common.out, &format!("criterion_{name}.json"), &report_json)?;
        println!("wrote {}", path.display());
    }
    if !evaluator_errors.is_empty() {
        return Err(Failure::evaluator(evaluator_errors.join("; ")));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// classify-f
// ---------------------------------------------------------------------------

fn cmd_classify(f_path: &Path, common: &CommonOpts) -> Result<(), Failure> {
    let weight = inputs::load_weight(f_path)?;
    let class = classify_weight(&weight, &ClassifyProbe::default_for(&weight));
    let report = Json::object(vec![
        ("config", config_json("classify-f", common, None)),
        ("weight", Json::str(weight.describe())),
        ("report", class.to_json()),
    ]);
    let path = write_report(&common.out, "classify_f.json", &report)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// verify-riesz
// ---------------------------------------------------------------------------

/// Relative radius bump applied when the test circle hits a zero.
const RELOCATION_FACTOR: f64 = 1.0037;
const RELOCATION_ATTEMPTS: usize = 5;

#[allow(clippy::too_many_arguments)]
fn cmd_verify_riesz(
    input: Option<&Path>,
    body_path: Option<&Path>,
    f_path: Option<&Path>,
    grid_path: Option<&Path>,
    samples: usize,
    inject_negated_vstar: bool,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let mode = if inject_negated_vstar {
        VstarMode::NegatedSelfTest
    } else {
        VstarMode::Normal
    };

    let cases: Vec<SuiteCase> = match input {
        None => inequality_suite_cases(common.seed ^ 0x1CABB0, 20),
        Some(path) => {
            let body_path = body_path.ok_or_else(|| {
                Failure::input("verify-riesz with --input needs --body".to_string())
            })?;
            let z = inputs::load_distribution(path, common.seed)?;
            let body = inputs::load_body(body_path)?;
            let weight = match f_path {
                Some(p) => inputs::load_weight(p)?,
                None => ConvexDecreasingFunction::constant(1.0).expect("unit weight"),
            };
            let (inner_list, outer_list) = match grid_path {
                Some(p) => {
                    let grid = inputs::load_grid(p)?;
                    let outer = match &grid.outer_rule {
                        expsys_core::criteria::OuterRadiusRule::List(list) => list.clone(),
                        expsys_core::criteria::OuterRadiusRule::FactorTimesR => grid
                            .a_values
                            .iter()
                            .map(|a| a * grid.r_values[grid.r_values.len() - 1])
                            .collect(),
                    };
                    (grid.r_values.clone(), outer)
                }
                None => (vec![2.5], vec![40.0]),
            };
            let top = outer_list.iter().cloned().fold(0.0, f64::max);
            let g = TestEntireFunction::polynomial(z, body.clone(), top * 1.05);
            let mut list = Vec::new();
            for &inner in &inner_list {
                for &outer in &outer_list {
                    if inner < outer {
                        list.push(SuiteCase {
                            label: format!("{} window ({inner}, {outer})", g.label()),
                            g: g.clone(),
                            body: body.clone(),
                            f: weight.clone(),
                            inner_r: inner,
                            outer_r: outer,
                        });
                    }
                }
            }
            if list.is_empty() {
                return Err(Failure::input("no (r, R) windows with r < R".to_string()));
            }
            list
        }
    };

    // Inequality checks with radius relocation on circle-through-zero.
    let mut case_rows = Vec::new();
    let mut worst_violation: Option<String> = None;
    for case in &cases {
        let mut inner_r = case.inner_r;
        let mut attempt = 0usize;
        let report = loop {
            let h = RadialSubharmonic::from_weight(&case.f, inner_r, case.outer_r)
                .map_err(|e| Failure::evaluator(format!("{}: {e}", case.label)))?;
            match mass_inequality_check_with_mode(&case.g, &case.body, &h, samples, mode) {
                Ok(report) => break report,
                Err(RieszError::RelocateTestRadius(_)) => {
                    attempt += 1;
                    if attempt > RELOCATION_ATTEMPTS {
                        return Err(Failure::relocation(format!(
                            "{}: test radius relocation exhausted after {RELOCATION_ATTEMPTS} attempts",
                            case.label
                        )));
                    }
                    inner_r *= RELOCATION_FACTOR;
                    log::info!("{}: relocating test radius to {inner_r}", case.label);
                }
                Err(e) => return Err(Failure::evaluator(format!("{}: {e}", case.label))),
            }
        };
        let violated = report.slack < -report.quadrature_error_estimate;
        if violated && worst_violation.is_none() {
            worst_violation = Some(format!(
                "{}: slack {} below -{}",
                case.label, report.slack, report.quadrature_error_estimate
            ));
        }
        case_rows.push(Json::object(vec![
            ("case", Json::str(&case.label)),
            ("weight", Json::str(case.f.describe())),
            ("inner_r", Json::Float(inner_r)),
            ("outer_r", Json::Float(case.outer_r)),
            ("lhs", Json::Float(report.lhs)),
            ("rhs", Json::Float(report.rhs)),
            ("slack", Json::Float(report.slack)),
            ("error_estimate", Json::Float(report.quadrature_error_estimate)),
            (
                "verdict",
                Json::str(if violated { "violated" } else { "holds" }),
            ),
        ]));
    }

    let report = Json::object(vec![
        ("config", config_json("verify-riesz", common, Some(samples))),
        (
            "mode",
            Json::str(if inject_negated_vstar {
                "negated-self-test"
            } else {
                "normal"
            }),
        ),
        ("cases", Json::Array(case_rows)),
    ]);
    let path = write_report(&common.out, "riesz_inequality.json", &report)?;
    println!("wrote {}", path.display());

    // Growth-deficit sweep CSV on the first sine-type case (or first case).
    let sweep_case = cases
        .iter()
        .find(|c| c.label.contains("sin"))
        .unwrap_or(&cases[0]);
    let mut csv = String::from("r,R,deficit\n");
    let outer_grid = expsys_core::criteria::geometric_points(10.0, 1e4, 40);
    for &r in &[2.0, 4.0, 8.0] {
        for &big_r in &outer_grid {
            if big_r <= r {
                continue;
            }
            match growth_deficit(&sweep_case.g, &sweep_case.body, &sweep_case.f, r, big_r) {
                Ok(d) => {
                    csv.push_str(&format!(
                        "{},{},{}\n",
                        format_float(r),
                        format_float(big_r),
                        format_float(d)
                    ));
                }
                Err(_) => continue,
            }
        }
    }
    let csv_path = write_text(&common.out, "riesz_deficit.csv", &csv)?;
    println!("wrote {}", csv_path.display());

    if let Some(msg) = worst_violation {
        return Err(Failure::inequality(msg));
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// construct-smoothing
// ---------------------------------------------------------------------------

fn cmd_construct_smoothing(f_path: &Path, n_max: u32, common: &CommonOpts) -> Result<(), Failure> {
    let weight = inputs::load_weight(f_path)?;
    let seq =
        build_smoothing(&weight, n_max).map_err(|e| Failure::evaluator(e.to_string()))?;
    let stage_rows: Vec<Json> = seq
        .stages
        .iter()
        .map(|stage| {
            let (lo, hi) = stage.range();
            // Sampled sup of the stage above the base weight.
            let mut sup_gap: f64 = 0.0;
            for k in 0..2000 {
                let x = lo + (hi - lo) * k as f64 / 1999.0;
                sup_gap = sup_gap.max(stage.eval(x).unwrap_or(f64::NAN) - weight.eval(x));
            }
            Json::object(vec![
                ("n", Json::UInt(stage.n as u64)),
                ("knots", Json::UInt(stage.knot_count() as u64)),
                ("range", Json::array([Json::Float(lo), Json::Float(hi)])),
                ("sup_gap", Json::Float(sup_gap)),
                ("gap_budget", Json::Float(1.0 / stage.n as f64)),
            ])
        })
        .collect();
    let report = Json::object(vec![
        ("config", config_json("construct-smoothing", common, None)),
        ("weight", Json::str(weight.describe())),
        ("n_max", Json::UInt(n_max as u64)),
        ("stages", Json::Array(stage_rows)),
    ]);
    let path = write_report(&common.out, "smoothing.json", &report)?;
    println!("wrote {}", path.display());
    Ok(())
}

// ---------------------------------------------------------------------------
// profile-subharmonic
// ---------------------------------------------------------------------------

fn cmd_profile(
    f_path: Option<&Path>,
    r: f64,
    big_r: f64,
    samples: usize,
    common: &CommonOpts,
) -> Result<(), Failure> {
    let weight = match f_path {
        Some(p) => inputs::load_weight(p)?,
        None => ConvexDecreasingFunction::constant(1.0).expect("unit weight"),
    };
    let h = RadialSubharmonic::from_weight(&weight, r, big_r)
        .map_err(|e| Failure::input(e.to_string()))?;
    let mut csv = String::from("rho,f_r,v_star,laplacian\n");
    let lo = r * r / big_r * 0.5;
    let hi = big_r * 1.1;
    for k in 0..samples {
        let rho = lo + (hi - lo) * k as f64 / (samples.max(2) - 1) as f64;
        let f_r = h.f_r_eval(rho).map_err(|e| Failure::evaluator(e.to_string()))?;
        let v_star = h
            .v_star_radial(rho)
            .map_err(|e| Failure::evaluator(e.to_string()))?;
        let laplacian = h
            .laplacian_closed_form(rho)
            .map(format_float)
            .unwrap_or_else(|_| String::new());
        csv.push_str(&format!(
            "{},{},{},{}\n",
            format_float(rho),
            format_float(f_r),
            format_float(v_star),
            laplacian
        ));
    }
    let path = write_text(&common.out, "profile.csv", &csv)?;
    println!("wrote {}", path.display());
    Ok(())
}
