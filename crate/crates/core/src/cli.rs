//! Command-line front end.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::analytic::{
    a_optimal_orthant, a_optimal_two_factor, classify_three_factor, cube_vertex, d_optimal_interaction,
    d_optimal_orthant, d_optimal_two_factor, interaction_vertices, is_simplex_design_d_optimal, simplex_design,
    Beta1Sign, Classification, RegionLabel, ThreeFactorScenario,
};
use crate::efficiency::{
    efficiency_sweep, example1_designs, example1_family, example1_grid, example2_designs, example2_family,
    example2_grid, grid, EfficiencySeries, NamedDesign, SweepFamily,
};
use crate::equivalence::{region_vertices, unit_vectors, verify_optimality, Criterion, DEFAULT_TOL};
use crate::error::{DesignError, Result};
use crate::model::{validate_positivity, Design, ExperimentalRegion, GammaModel, ParameterPoint};
use crate::solver::{multiplicative, SolverParams};

/// Significant digits kept for floats in JSON output.
pub const JSON_SIGNIFICANT_DIGITS: usize = 10;
/// Decimals in reproduction CSVs.
pub const CSV_DECIMALS: usize = 4;

/// Table of γ values reproduced by `reproduce table2`.
pub const TABLE2_GAMMAS: [f64; 5] = [-2.9, -2.5, -2.0, -1.5, -1.23];

#[derive(Parser, Debug)]
#[command(name = "gammadesign", version, about = "Locally optimal designs for gamma regression without intercept")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Construct a locally optimal design.
    Design(DesignArgs),
    /// Classify β = (β1, γβ1, γβ1) on [1,2]^3, or an interaction β on [a,b]^2.
    Classify(ClassifyArgs),
    /// Check a design against the equivalence theorem.
    Verify(VerifyArgs),
    /// Run the multiplicative algorithm on a candidate set.
    Solve(SolveArgs),
    /// Write a D-efficiency sweep as CSV.
    Efficiency(EfficiencyArgs),
    /// Regenerate the reference tables and sweeps into a directory.
    Reproduce(ReproduceArgs),
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum ModelArg {
    FirstOrder,
    Interaction,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum RegionArg {
    Orthant,
    Hypercube,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum CriterionArg {
    D,
    A,
}

impl From<CriterionArg> for Criterion {
    fn from(c: CriterionArg) -> Self {
        match c {
            CriterionArg::D => Criterion::D,
            CriterionArg::A => Criterion::A,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum SignArg {
    Positive,
    Negative,
    Zero,
}

impl From<SignArg> for Beta1Sign {
    fn from(s: SignArg) -> Self {
        match s {
            SignArg::Positive => Beta1Sign::Positive,
            SignArg::Negative => Beta1Sign::Negative,
            SignArg::Zero => Beta1Sign::Zero,
        }
    }
}

#[derive(Args, Debug, Clone)]
struct ProblemArgs {
    #[arg(long, value_enum, default_value = "first-order")]
    model: ModelArg,
    /// Number of factors (inferred from --beta when omitted).
    #[arg(long)]
    nu: Option<usize>,
    #[arg(long, value_enum, default_value = "hypercube")]
    region: RegionArg,
    /// Lower bound of the hypercube.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    /// Upper bound of the hypercube.
    #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
    b: f64,
    /// Comma-separated parameter vector.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
}

struct Problem {
    model: GammaModel,
    region: ExperimentalRegion,
    beta: Option<ParameterPoint>,
}

impl ProblemArgs {
    fn resolve(&self) -> Result<Problem> {
        let model = match self.model {
            ModelArg::Interaction => {
                if let Some(nu) = self.nu.filter(|&n| n != 2) {
                    return Err(DesignError::InvalidModel(format!("interaction model has 2 factors, got --nu {nu}")));
                }
                GammaModel::interaction()
            }
            ModelArg::FirstOrder => {
                let nu = match (self.nu, &self.beta) {
                    (Some(n), _) => n,
                    (None, Some(b)) => b.len(),
                    (None, None) => {
                        return Err(DesignError::InvalidModel("give --nu or --beta to fix the dimension".into()))
                    }
                };
                GammaModel::first_order(nu)?
            }
        };
        let region = match self.region {
            RegionArg::Orthant => ExperimentalRegion::orthant(model.nu())?,
            RegionArg::Hypercube => ExperimentalRegion::hypercube(self.a, self.b, model.nu())?,
        };
        let beta = match &self.beta {
            None => None,
            Some(b) => {
                let beta = ParameterPoint::new(b.clone());
                if beta.len() != model.p() {
                    return Err(DesignError::DimensionMismatch {
                        expected: model.p(),
                        found: beta.len(),
                    });
                }
                if !validate_positivity(&model, &beta, &region) {
                    return Err(DesignError::InvalidParameter(format!(
                        "linear predictor is not positive on the whole region at beta = {b:?}"
                    )));
                }
                Some(beta)
            }
        };
        Ok(Problem { model, region, beta })
    }
}

impl Problem {
    fn beta(&self) -> Result<&ParameterPoint> {
        self.beta
            .as_ref()
            .ok_or_else(|| DesignError::InvalidParameter("--beta is required here".into()))
    }

    fn region_json(&self) -> Value {
        serde_json::to_value(self.region).expect("serializable")
    }

    fn model_json(&self) -> Value {
        serde_json::to_value(self.model).expect("serializable")
    }

    /// Default verification candidates: the vertices of a hypercube, or the
    /// axis points plus the design's support on the orthant.
    fn candidates(&self, design: Option<&Design>) -> Result<Vec<Vec<f64>>> {
        match self.region {
            ExperimentalRegion::Hypercube { .. } => region_vertices(&self.region),
            ExperimentalRegion::PositiveOrthant { nu } => {
                let mut c = unit_vectors(nu);
                if let Some(d) = design {
                    for x in d.points() {
                        if !c.iter().any(|y| y == x) {
                            c.push(x.clone());
                        }
                    }
                }
                Ok(c)
            }
        }
    }
}

#[derive(Args, Debug)]
struct DesignArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "d")]
    criterion: CriterionArg,
}

#[derive(Args, Debug)]
struct ClassifyArgs {
    /// γ = β/β1 for the three-factor family on [1,2]^3.
    #[arg(long, allow_negative_numbers = true)]
    gamma: Option<f64>,
    #[arg(long, value_enum, default_value = "positive")]
    beta1_sign: SignArg,
    /// Interaction parameter (β1,β2,β3); classifies on [a,b]^2 instead.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    beta: Option<Vec<f64>>,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 2.0)]
    b: f64,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Design JSON file with "points" and "weights" (or a `design` command output).
    #[arg(long)]
    design: PathBuf,
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long, value_enum, default_value = "d")]
    criterion: CriterionArg,
    /// JSON file holding a list of candidate points.
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
}

#[derive(Args, Debug)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    #[arg(long)]
    candidates: Option<PathBuf>,
    #[arg(long, default_value_t = SolverParams::default().max_iterations)]
    max_iterations: usize,
    #[arg(long, default_value_t = SolverParams::default().convergence_tol)]
    tol: f64,
    #[arg(long, default_value_t = SolverParams::default().prune_tol)]
    prune_tol: f64,
    /// Include the per-iteration log-determinants.
    #[arg(long)]
    trace: bool,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum FamilyArg {
    ThreeFactor,
    Interaction,
}

#[derive(Args, Debug)]
struct EfficiencyArgs {
    #[arg(long, value_enum, default_value = "three-factor")]
    family: FamilyArg,
    #[arg(long, value_enum, default_value = "positive")]
    beta1_sign: SignArg,
    #[arg(long, default_value_t = 1.0)]
    a: f64,
    #[arg(long, default_value_t = 4.0)]
    b: f64,
    /// JSON list of {"name", "design"}; defaults to the standard competitors.
    #[arg(long)]
    designs: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long, default_value_t = 0.01)]
    step: f64,
    /// Output CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, default_value_t = CSV_DECIMALS)]
    decimals: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Recipe {
    Table2,
    Example1,
    Example2,
}

#[derive(Args, Debug)]
struct ReproduceArgs {
    #[arg(value_enum)]
    recipe: Recipe,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(args, &mut IgnoreBrokenPipe(stdout.lock()), &mut stderr.lock())
}

/// Drops output once the reader has gone away, as with `| head`.
struct IgnoreBrokenPipe<W>(W);

impl<W: Write> Write for IgnoreBrokenPipe<W> {
    fn write(&mut self, buf: &[u8]) -> std::io::Result<usize> {
        match self.0.write(buf) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(buf.len()),
            r => r,
        }
    }

    fn flush(&mut self) -> std::io::Result<()> {
        match self.0.flush() {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            r => r,
        }
    }
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{e}");
                return 0;
            }
            let _ = writeln!(err, "{}", json!({"error": "usage", "message": e.kind().to_string(), "details": e.to_string()}));
            return 2;
        }
    };
    match execute(cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "{}", json!({"error": e.kind(), "message": e.to_string()}));
            if e.is_validation() {
                2
            } else {
                1
            }
        }
    }
}

fn execute(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Design(args) => cmd_design(args, out),
        Command::Classify(args) => cmd_classify(args, out),
        Command::Verify(args) => cmd_verify(args, out),
        Command::Solve(args) => cmd_solve(args, out),
        Command::Efficiency(args) => cmd_efficiency(args, out),
        Command::Reproduce(args) => cmd_reproduce(args, out),
    }
}

fn io_err(what: &Path, e: impl std::fmt::Display) -> DesignError {
    DesignError::InvalidParameter(format!("{}: {e}", what.display()))
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    serde_json::from_str(&text).map_err(|e| io_err(path, e))
}

/// Accepts either a bare design or any object with a `design` field.
fn read_design(path: &Path) -> Result<Design> {
    let value: Value = read_json(path)?;
    let inner = match value.get("design") {
        Some(d) if d.is_object() => d.clone(),
        _ => value,
    };
    serde_json::from_value(inner).map_err(|e| io_err(path, e))
}

/// Rounds `v` to `digits` significant digits.
pub fn round_significant(v: f64, digits: usize) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{:.*e}", digits.saturating_sub(1), v).parse().unwrap_or(v)
}

fn round_value(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_f64() => {
            let r = round_significant(n.as_f64().expect("f64"), JSON_SIGNIFICANT_DIGITS);
            if let Some(num) = serde_json::Number::from_f64(r) {
                *n = num;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_value),
        Value::Object(map) => map.values_mut().for_each(round_value),
        _ => {}
    }
}

/// Serializes `value` with floats rounded to 10 significant digits.
pub fn to_rounded_json<T: Serialize>(value: &T) -> Value {
    let mut v = serde_json::to_value(value).expect("serializable");
    round_value(&mut v);
    v
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(&to_rounded_json(value)).expect("serializable");
    writeln!(out, "{text}").map_err(|e| DesignError::InvalidParameter(format!("writing output: {e}")))
}

/// Closed-form design with its label if one is known to be optimal here,
/// confirmed against the equivalence theorem on the region's candidates.
fn analytic_design(p: &Problem, criterion: Criterion) -> Result<Option<(Design, Option<RegionLabel>)>> {
    let beta = p.beta.as_ref();
    let candidate: Option<(Design, Option<RegionLabel>)> = match (p.model.is_first_order(), p.region, criterion) {
        (true, ExperimentalRegion::PositiveOrthant { nu }, Criterion::D) => Some((d_optimal_orthant(nu, None)?, None)),
        (true, ExperimentalRegion::PositiveOrthant { .. }, Criterion::A) => {
            Some((a_optimal_orthant(p.beta()?, None)?, None))
        }
        (true, ExperimentalRegion::Hypercube { a, b, nu }, crit) => {
            let beta = p.beta()?;
            let bv = beta.as_slice();
            match crit {
                Criterion::D if nu == 3 && a == 1.0 && b == 2.0 && bv[1] == bv[2] => {
                    let c = classify_three_factor(&ThreeFactorScenario::new(bv[0], bv[1])?);
                    c.design.map(|d| (d, Some(c.label)))
                }
                Criterion::D if nu == 2 => Some((d_optimal_two_factor(a, b)?, None)),
                Criterion::D if is_simplex_design_d_optimal(nu, a, b, beta)? => Some((simplex_design(nu, a, b)?, None)),
                Criterion::A if nu == 2 => Some((a_optimal_two_factor(a, b, beta)?, None)),
                _ => None,
            }
        }
        (false, ExperimentalRegion::Hypercube { a, b, .. }, Criterion::D) => {
            let c: Classification = d_optimal_interaction(a, b, p.beta()?)?;
            c.design.map(|d| (d, Some(c.label)))
        }
        (false, _, _) => {
            return Err(DesignError::InvalidModel(
                "the interaction model is supported for the D-criterion on a hypercube only".into(),
            ))
        }
    };
    let Some((design, label)) = candidate else {
        return Ok(None);
    };
    let Some(beta) = beta else {
        return Ok(Some((design, label)));
    };
    let report = verify_optimality(&p.model, beta, &design, criterion, &p.candidates(Some(&design))?, DEFAULT_TOL)?;
    Ok(report.pass.then_some((design, label)))
}

fn cmd_design(args: DesignArgs, out: &mut dyn Write) -> Result<()> {
    let p = args.problem.resolve()?;
    let criterion: Criterion = args.criterion.into();
    let (design, label, provenance) = match analytic_design(&p, criterion)? {
        Some((d, label)) => (d, label, "analytic"),
        None => {
            if criterion == Criterion::A {
                return Err(DesignError::InvalidParameter(
                    "no A-optimal closed form applies here and the solver handles the D-criterion only".into(),
                ));
            }
            let candidates = p.candidates(None)?;
            let (d, _) = multiplicative(&p.model, p.beta()?, &candidates, &SolverParams::default())?;
            (d, None, "numerical")
        }
    };
    emit(
        out,
        &json!({
            "model": p.model_json(),
            "region": p.region_json(),
            "beta": p.beta,
            "criterion": criterion,
            "label": label,
            "provenance": provenance,
            "design": design,
        }),
    )
}

fn cmd_classify(args: ClassifyArgs, out: &mut dyn Write) -> Result<()> {
    let c = match (&args.beta, args.gamma) {
        (Some(beta), _) => d_optimal_interaction(args.a, args.b, &ParameterPoint::new(beta.clone()))?,
        (None, Some(g)) => classify_three_factor(&ThreeFactorScenario::from_gamma(g, args.beta1_sign.into())?),
        (None, None) if args.beta1_sign == SignArg::Zero => {
            classify_three_factor(&ThreeFactorScenario::from_gamma(0.0, Beta1Sign::Zero)?)
        }
        (None, None) => return Err(DesignError::InvalidParameter("give --gamma or --beta".into())),
    };
    emit(out, &c)
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write) -> Result<()> {
    let p = args.problem.resolve()?;
    let design = read_design(&args.design)?;
    let candidates = match &args.candidates {
        Some(path) => read_json(path)?,
        None => p.candidates(Some(&design))?,
    };
    let report = verify_optimality(&p.model, p.beta()?, &design, args.criterion.into(), &candidates, args.tol)?;
    emit(out, &report)
}

fn cmd_solve(args: SolveArgs, out: &mut dyn Write) -> Result<()> {
    let p = args.problem.resolve()?;
    let candidates = match &args.candidates {
        Some(path) => read_json(path)?,
        None => p.candidates(None)?,
    };
    let params = SolverParams {
        max_iterations: args.max_iterations,
        convergence_tol: args.tol,
        prune_tol: args.prune_tol,
    };
    let (design, trace) = multiplicative(&p.model, p.beta()?, &candidates, &params)?;
    let mut value = json!({
        "design": design,
        "iterations": trace.iterations,
        "final_excess": trace.final_excess,
        "converged": trace.converged,
    });
    if args.trace {
        value["log_dets"] = json!(trace.log_dets);
    }
    emit(out, &value)
}

fn write_series(series: &EfficiencySeries, path: Option<&Path>, decimals: usize, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(path) => {
            let file = fs::File::create(path).map_err(|e| io_err(path, e))?;
            series.write_csv(file, decimals)
        }
        None => series.write_csv(out, decimals),
    }
}

fn cmd_efficiency(args: EfficiencyArgs, out: &mut dyn Write) -> Result<()> {
    let (family, designs, default_grid) = match args.family {
        FamilyArg::ThreeFactor => {
            let fam = SweepFamily::ThreeFactor {
                sign: args.beta1_sign.into(),
            };
            (fam, example1_designs(), example1_grid())
        }
        FamilyArg::Interaction => {
            let fam = SweepFamily::InteractionEqualBeta { a: args.a, b: args.b };
            let designs = if (args.a, args.b) == (1.0, 4.0) {
                example2_designs()
            } else {
                Vec::new()
            };
            (fam, designs, example2_grid())
        }
    };
    let designs: Vec<NamedDesign> = match &args.designs {
        Some(path) => read_json(path)?,
        None => designs,
    };
    let gammas = match (args.from, args.to) {
        (None, None) => default_grid,
        (from, to) => {
            if !(args.step.is_finite() && args.step > 0.0) {
                return Err(DesignError::InvalidParameter("--step must be positive".into()));
            }
            let from = from.unwrap_or(default_grid[0]);
            let to = to.unwrap_or(*default_grid.last().expect("non-empty grid"));
            grid(from, to, args.step)
        }
    };
    let series = efficiency_sweep(&family, &designs, &gammas)?;
    write_series(&series, args.out.as_deref(), args.decimals, out)
}

fn table2(dir: &Path) -> Result<Value> {
    let model = GammaModel::first_order(3)?;
    let vertices: Vec<Vec<f64>> = (1..=8).map(cube_vertex).collect();
    let path = dir.join("table2.csv");
    let file = fs::File::create(&path).map_err(|e| io_err(&path, e))?;
    let mut w = csv::Writer::from_writer(file);
    let csv_err = |e: csv::Error| io_err(&path, e);
    let mut header = vec!["gamma".to_string()];
    header.extend((1..=8).map(|k| format!("v{k}")));
    w.write_record(&header).map_err(csv_err)?;
    let mut rows = Vec::new();
    for gamma in TABLE2_GAMMAS {
        let beta = ThreeFactorScenario::from_gamma(gamma, Beta1Sign::Negative)?.parameter();
        let (design, trace) = multiplicative(&model, &beta, &vertices, &SolverParams::default())?;
        let weights: Vec<f64> = vertices.iter().map(|v| design.weight_at(v)).collect();
        let mut record = vec![format!("{gamma}")];
        record.extend(weights.iter().map(|w| format!("{w:.CSV_DECIMALS$}")));
        w.write_record(&record).map_err(csv_err)?;
        rows.push(json!({"gamma": gamma, "weights": weights, "converged": trace.converged}));
    }
    w.flush().map_err(|e| io_err(&path, e))?;
    Ok(json!({"file": path, "rows": rows}))
}

/// Where the verification verdict for `design` flips along `grid`.
fn verification_flips(family: &SweepFamily, design: &Design, candidates: &[Vec<f64>], gammas: &[f64]) -> Result<Vec<f64>> {
    let model = family.model();
    let mut flips = Vec::new();
    let mut last: Option<bool> = None;
    for &g in gammas {
        let Ok(beta) = family.parameter(g) else { continue };
        let pass = verify_optimality(&model, &beta, design, Criterion::D, candidates, DEFAULT_TOL)?.pass;
        if last.is_some_and(|l| l != pass) {
            flips.push(g);
        }
        last = Some(pass);
    }
    Ok(flips)
}

fn sweep_recipe(dir: &Path, name: &str, family: SweepFamily, designs: Vec<NamedDesign>, gammas: Vec<f64>) -> Result<Value> {
    let series = efficiency_sweep(&family, &designs, &gammas)?;
    let csv_path = dir.join(format!("{name}.csv"));
    write_series(&series, Some(&csv_path), CSV_DECIMALS, &mut std::io::sink())?;
    let json_path = dir.join(format!("{name}.json"));
    let text = serde_json::to_string_pretty(&to_rounded_json(&series)).expect("serializable");
    fs::write(&json_path, text).map_err(|e| io_err(&json_path, e))?;
    let ranges: serde_json::Map<String, Value> = series
        .designs
        .iter()
        .map(|d| {
            let (lo, hi) = series.range(d).expect("known design");
            (d.clone(), json!({"min": lo, "max": hi}))
        })
        .collect();
    Ok(json!({"csv": csv_path, "json": json_path, "ranges": ranges}))
}

fn cmd_reproduce(args: ReproduceArgs, out: &mut dyn Write) -> Result<()> {
    let dir = args.out_dir;
    fs::create_dir_all(&dir).map_err(|e| io_err(&dir, e))?;
    let summary = match args.recipe {
        Recipe::Table2 => table2(&dir)?,
        Recipe::Example1 => sweep_recipe(&dir, "example1", example1_family(), example1_designs(), example1_grid())?,
        Recipe::Example2 => {
            let mut s = sweep_recipe(&dir, "example2", example2_family(), example2_designs(), example2_grid())?;
            let designs = example2_designs();
            let vertices = interaction_vertices(1.0, 4.0).to_vec();
            let fine: Vec<f64> = (0..=5490).map(|k| -0.49 + k as f64 * 1e-3).collect();
            let mut flips = serde_json::Map::new();
            for d in designs.iter().filter(|d| d.name == "xi1" || d.name == "xi2") {
                flips.insert(
                    d.name.clone(),
                    json!(verification_flips(&example2_family(), &d.design, &vertices, &fine)?),
                );
            }
            s["verification_flips"] = Value::Object(flips);
            s
        }
    };
    emit(out, &summary)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_capture(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let mut full = vec!["gammadesign"];
        full.extend_from_slice(args);
        let code = run_with(full, &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn significant_digit_rounding() {
        assert_eq!(round_significant(1.0 / 3.0, 10), 0.3333333333);
        assert_eq!(round_significant(123456.789012345, 10), 123456.789);
        assert_eq!(round_significant(0.0, 10), 0.0);
        assert_eq!(round_significant(-2.5e-12, 3), -2.5e-12);
    }

    #[test]
    fn orthant_design_command() {
        let (code, out, _) = run_capture(&["design", "--model", "first-order", "--region", "orthant", "--nu", "3"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["provenance"], "analytic");
        assert_eq!(v["design"]["weights"], json!([0.3333333333, 0.3333333333, 0.3333333333]));
    }

    #[test]
    fn classify_command() {
        let (code, out, _) = run_capture(&["classify", "--gamma", "-2", "--beta1-sign", "negative"]);
        assert_eq!(code, 0);
        let v: Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["label"], "Xi5Numerical");
        assert_eq!(v["numerical"], true);
    }

    #[test]
    fn validation_errors_exit_two() {
        let (code, _, err) = run_capture(&["design", "--beta", "-3,1,1"]);
        assert_eq!(code, 2);
        let v: Value = serde_json::from_str(err.trim()).unwrap();
        assert_eq!(v["error"], "invalid_parameter");
        let (code, _, err) = run_capture(&["frobnicate"]);
        assert_eq!(code, 2);
        assert!(err.contains("\"error\":\"usage\""));
    }

    #[test]
    fn help_exits_zero() {
        let (code, out, _) = run_capture(&["--help"]);
        assert_eq!(code, 0);
        assert!(out.contains("reproduce"));
    }
}
