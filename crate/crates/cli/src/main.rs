//! `chball`: ball automorphisms, limit sets and proper-map checks from the command line.
//!
//! Exit status: 0 when a result or verdict was produced, 1 when a numerical
//! precondition failed, 2 on usage, I/O or input-format errors.

mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use chball_core::dynamics::{contraction_rate, verify_north_south};
use chball_core::json::JsonVec;
use chball_core::maps::{
    ftag_fit_with, holder_estimate, move_to_origin, rigidity_verify, schwarz_check, z_x_report, RationalProperMap,
    RigidityConfig, SymmetryPair,
};
use chball_core::normal_forms::{kak_with, loxodromic_normal_form_with};
use chball_core::sampling::random_ball_point;
use chball_core::siegel::{cayley, conjugated_flow, rescaling_limit, unit_box_grid, RescalingProblem};
use chball_core::spectral::{classify_with, Kind, SpectralData};
use chball_core::subgroups::{limit_set, monomials, zariski_test_with, GeneratorSet};
use chball_core::{AffineLine, BallPoint, BoundaryPoint, CVec, Error, GroupElement};

use config::Config;

#[derive(Parser)]
#[command(name = "chball", version, about = "Automorphisms of the complex unit ball", arg_required_else_help = true)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    cmd: Command,
}

#[derive(Args)]
struct Global {
    /// Write the result here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// `key = value` file with seed, sample counts and tolerances.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[arg(long, global = true)]
    tol_group: Option<f64>,
    #[arg(long, global = true)]
    tol_bdry: Option<f64>,
    #[arg(long, global = true)]
    tol_line: Option<f64>,
    #[arg(long, global = true)]
    tol_denom: Option<f64>,
    #[arg(long, global = true)]
    tol_class: Option<f64>,
    #[arg(long, global = true)]
    tol_sym: Option<f64>,
    #[arg(long, global = true)]
    tol_proper: Option<f64>,
    #[arg(long, global = true)]
    tol_det: Option<f64>,
    #[arg(long, global = true)]
    tol_rank: Option<f64>,
    #[arg(long, global = true)]
    tol_poly: Option<f64>,
    #[arg(long, global = true)]
    tol_rate: Option<f64>,
    #[arg(long, global = true)]
    tol_unitary_return: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Elliptic / parabolic / loxodromic, with λ1, σ1 and fixed points.
    Classify(InArg),
    /// Cartan decomposition g = k1 a_t k2.
    Kak(InArg),
    /// g = h k a_t h^-1 for loxodromic g.
    NormalForm(InArg),
    /// Fitted contraction rate of g^n(z) towards the attracting point.
    Rates(RatesArgs),
    /// Uniform convergence of a sequence g_n away from the repelling point.
    NorthSouth(NorthSouthArgs),
    /// Limit-set sample from the orbit of the origin.
    LimitSet(LimitSetArgs),
    /// Finite-degree Zariski density test.
    Zariski(ZariskiArgs),
    /// Properness, Schwarz and Hölder diagnostics for a rational map.
    CheckMap(CheckMapArgs),
    /// Line detector and direct collinearity check for one chord.
    DetectLines(DetectArgs),
    /// Fractional linear fit of sample pairs.
    FtagFit(FtagArgs),
    /// Equivalence with the trivial embedding.
    Rigidity(RigidityArgs),
    /// Cayley transform and the straightened flow.
    Siegel(SiegelArgs),
    /// Rescaled polynomials along the straightened flow.
    Rescale(RescaleArgs),
}

#[derive(Args)]
struct InArg {
    /// Group element JSON {"m", "lift"}.
    #[arg(long = "in")]
    input: PathBuf,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Starting point, a list of [re, im].
    #[arg(long)]
    z: PathBuf,
    #[arg(long, default_value_t = 40)]
    n: usize,
    /// Also write (n, log-distance) rows here.
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct NorthSouthArgs {
    /// List of group elements g_1, ..., g_n.
    #[arg(long = "in")]
    input: PathBuf,
    /// Test points; random interior points when omitted.
    #[arg(long)]
    z: Option<PathBuf>,
    #[arg(long, default_value_t = 0.1)]
    exclusion: f64,
}

#[derive(Args)]
struct LimitSetArgs {
    #[arg(long)]
    gens: PathBuf,
    #[arg(long, default_value_t = 8)]
    length: usize,
    #[arg(long, default_value_t = 1e-3)]
    eps: f64,
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    svg: Option<PathBuf>,
    /// Real coordinates for the SVG axes, counted Re z1, Im z1, Re z2, ...
    #[arg(long, default_value = "0,1")]
    proj: String,
}

#[derive(Args)]
struct ZariskiArgs {
    #[arg(long)]
    gens: PathBuf,
    #[arg(long, default_value_t = 2)]
    degree: usize,
    /// Defaults to three times the number of monomials.
    #[arg(long)]
    samples: Option<usize>,
}

#[derive(Args)]
struct CheckMapArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long, default_value_t = 512)]
    samples: usize,
}

#[derive(Args)]
struct DetectArgs {
    #[arg(long)]
    map: PathBuf,
    #[arg(long)]
    x: PathBuf,
    #[arg(long)]
    y: PathBuf,
    #[arg(long, default_value_t = 8)]
    nmax: usize,
    /// Threshold for h_n and the direct check.
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
}

#[derive(Args)]
struct FtagArgs {
    /// List of {"z": [...], "w": [...]}.
    #[arg(long)]
    samples: PathBuf,
}

#[derive(Args)]
struct RigidityArgs {
    #[arg(long)]
    map: PathBuf,
    /// List of {"phi": g, "psi": g}.
    #[arg(long)]
    pairs: PathBuf,
    #[arg(long, default_value_t = 2)]
    word_length: usize,
    #[arg(long, default_value_t = 20)]
    lines: usize,
}

#[derive(Args)]
struct SiegelArgs {
    /// Check ζ ∘ (k a_t) ∘ ζ^-1 against (e^-2t v, e^-t U w).
    #[arg(long, requires_all = ["k", "t"])]
    check_flow: bool,
    /// An element of M.
    #[arg(long)]
    k: Option<PathBuf>,
    #[arg(long, allow_negative_numbers = true)]
    t: Option<f64>,
    /// A ball point to send to the Siegel domain.
    #[arg(long)]
    cayley: Option<PathBuf>,
}

#[derive(Args)]
struct RescaleArgs {
    /// {"m", "h", "t", "u"}.
    #[arg(long)]
    problem: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    nlist: Vec<u32>,
    /// Grid points per real axis of the unit box.
    #[arg(long, default_value_t = 5)]
    grid: usize,
}

enum Fail {
    Usage(String),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

impl From<String> for Fail {
    fn from(e: String) -> Self {
        Fail::Usage(e)
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Fail> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| Fail::Usage(format!("{}: {e}", path.display())))
}

fn read_vec(path: &Path) -> Result<CVec, Fail> {
    Ok(read_json::<JsonVec>(path)?.0)
}

fn resolve_config(g: &Global) -> Result<Config, Fail> {
    let mut c = match &g.config {
        Some(p) => Config::load(p)?,
        None => Config::default(),
    };
    if let Some(s) = g.seed {
        c.seed = s;
    }
    let overrides = [
        ("group", g.tol_group),
        ("bdry", g.tol_bdry),
        ("line", g.tol_line),
        ("denom", g.tol_denom),
        ("class", g.tol_class),
        ("sym", g.tol_sym),
        ("proper", g.tol_proper),
        ("det", g.tol_det),
        ("rank", g.tol_rank),
        ("poly", g.tol_poly),
        ("rate", g.tol_rate),
        ("unitary_return", g.tol_unitary_return),
    ];
    for (name, v) in overrides {
        if let Some(v) = v {
            c.set(&format!("tol_{name}"), &v.to_string())?;
        }
    }
    c.validate()?;
    Ok(c)
}

#[derive(Deserialize)]
struct SamplePair {
    z: JsonVec,
    w: JsonVec,
}

#[derive(Serialize)]
struct CheckMapOutput {
    check: chball_core::maps::MapCheck,
    /// Whether `f` was postcomposed to move `f(0)` to the origin first.
    normalized: bool,
    schwarz: chball_core::maps::SchwarzReport,
    holder: chball_core::maps::HolderEstimate,
}

#[derive(Serialize)]
struct FixedPoints {
    attracting: Option<BoundaryPoint>,
    repelling: Option<BoundaryPoint>,
    interior: Option<BallPoint>,
}

#[derive(Serialize)]
struct ClassifyOutput {
    kind: Kind,
    lambda1: f64,
    sigma1: f64,
    fixed_points: FixedPoints,
    axis: Option<AffineLine>,
}

impl From<SpectralData> for ClassifyOutput {
    fn from(d: SpectralData) -> Self {
        ClassifyOutput {
            kind: d.kind,
            lambda1: d.lambda1,
            sigma1: d.sigma1,
            fixed_points: FixedPoints { attracting: d.fixed_plus, repelling: d.fixed_minus, interior: d.interior_fixed },
            axis: d.axis,
        }
    }
}

#[derive(Serialize)]
struct FlowOutput {
    flow: chball_core::siegel::ConjugatedFlow,
    samples: usize,
    conjugacy_residual: f64,
}

fn run(cli: Cli) -> Result<String, Fail> {
    let cfg = resolve_config(&cli.global)?;
    let tol = &cfg.tol;
    let out = cli.global.out.as_deref();
    let text = match cli.cmd {
        Command::Classify(a) => {
            output::json(&ClassifyOutput::from(classify_with(&read_json::<GroupElement>(&a.input)?, tol)?))
        }
        Command::Kak(a) => output::json(&kak_with(&read_json::<GroupElement>(&a.input)?, tol)?),
        Command::NormalForm(a) => output::json(&loxodromic_normal_form_with(&read_json::<GroupElement>(&a.input)?, tol)?),
        Command::Rates(a) => {
            let g: GroupElement = read_json(&a.input)?;
            let r = contraction_rate(&g, &read_vec(&a.z)?, a.n, tol)?;
            if let Some(p) = &a.csv {
                let mut s = String::from("n,log_distance\n");
                for (n, d) in &r.samples {
                    s.push_str(&format!("{n},{d:e}\n"));
                }
                output::write_text(Some(p), &s)?;
            }
            output::json(&r)
        }
        Command::NorthSouth(a) => {
            let gs: Vec<GroupElement> = read_json(&a.input)?;
            let m = gs.first().map(GroupElement::m).ok_or_else(|| Fail::Usage("empty sequence".into()))?;
            let zs: Vec<CVec> = match &a.z {
                Some(p) => read_json::<Vec<JsonVec>>(p)?.into_iter().map(|v| v.0).collect(),
                None => {
                    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                    (0..cfg.samples.unwrap_or(100)).map(|_| random_ball_point(m, 1.0, &mut rng).into_vec()).collect()
                }
            };
            output::json(&verify_north_south(&gs, &zs, a.exclusion)?)
        }
        Command::LimitSet(a) => {
            let gens: GeneratorSet = read_json(&a.gens)?;
            let proj = parse_proj(&a.proj, 2 * gens.m())?;
            let ls = limit_set(&gens, a.length, a.eps, cfg.word_budget)?;
            let pts: Vec<&CVec> = ls.points.iter().map(|p| p.as_vec()).collect();
            if let Some(p) = &a.csv {
                output::write_text(Some(p), &output::points_csv(&pts, &ls.words))?;
            }
            if let Some(p) = &a.svg {
                output::write_text(Some(p), &output::scatter_svg(&pts, proj))?;
            }
            output::json(&ls)
        }
        Command::Zariski(a) => {
            let gens: GeneratorSet = read_json(&a.gens)?;
            let k = monomials(2 * (gens.m() + 1).pow(2), a.degree.clamp(1, 4)).len();
            let n = a.samples.or(cfg.samples).unwrap_or(3 * k);
            output::json(&zariski_test_with(&gens, a.degree, n, cfg.seed, tol)?)
        }
        Command::CheckMap(a) => {
            let f: RationalProperMap = read_json(&a.map)?;
            let check = f.check(a.samples, cfg.seed, tol)?;
            let f0 = f.eval_with(&CVec::zeros(f.m()), tol)?;
            let normalized = f0.norm() > tol.sym;
            let g = if normalized { f.postcompose(&move_to_origin(&f0)?)? } else { f.clone() };
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let zs: Vec<CVec> = (0..a.samples).map(|_| random_ball_point(f.m(), 1.0, &mut rng).into_vec()).collect();
            let schwarz = schwarz_check(&g, &zs, tol)?;
            let holder = holder_estimate(&f, 20, (1e-4, 1e-1), cfg.seed)?;
            output::json(&CheckMapOutput { check, normalized, schwarz, holder })
        }
        Command::DetectLines(a) => {
            let f: RationalProperMap = read_json(&a.map)?;
            output::json(&z_x_report(&f, &read_vec(&a.x)?, &read_vec(&a.y)?, a.nmax, a.tol)?)
        }
        Command::FtagFit(a) => {
            let raw: Vec<SamplePair> = read_json(&a.samples)?;
            let m = raw.first().map(|s| s.z.0.len()).ok_or_else(|| Fail::Usage("no samples".into()))?;
            let samples: Vec<(CVec, CVec)> = raw.into_iter().map(|s| (s.z.0, s.w.0)).collect();
            output::json(&ftag_fit_with(&samples, m, tol)?)
        }
        Command::Rigidity(a) => {
            let f: RationalProperMap = read_json(&a.map)?;
            let pairs: Vec<SymmetryPair> = read_json(&a.pairs)?;
            let rc = RigidityConfig {
                word_length: a.word_length,
                n_lines: a.lines,
                n_samples: cfg.samples.unwrap_or(1000),
                seed: cfg.seed,
                tol: *tol,
                ..RigidityConfig::default()
            };
            output::json(&rigidity_verify(&f, &pairs, &rc)?)
        }
        Command::Siegel(a) => {
            if a.check_flow {
                let (Some(kp), Some(t)) = (&a.k, a.t) else { return Err(Fail::Usage("--check-flow needs --k and --t".into())) };
                let k: GroupElement = read_json(kp)?;
                let flow = conjugated_flow(&k, t)?;
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                let n = cfg.samples.unwrap_or(1000);
                let xs: Vec<CVec> = (0..n)
                    .map(|_| chball_core::sampling::random_boundary_point(k.m(), &mut rng).into_vec())
                    .filter(|x| (x[0] + chball_core::linalg::ONE).norm() > 0.05)
                    .collect();
                let conjugacy_residual = flow.conjugacy_residual(&k, &xs, tol)?;
                output::json(&FlowOutput { flow, samples: xs.len(), conjugacy_residual })
            } else if let Some(p) = &a.cayley {
                output::json(&cayley(&read_vec(p)?, tol)?)
            } else {
                return Err(Fail::Usage("siegel needs --check-flow or --cayley".into()));
            }
        }
        Command::Rescale(a) => {
            let prob: RescalingProblem = read_json(&a.problem)?;
            let grid = unit_box_grid(prob.m(), a.grid);
            output::json(&rescaling_limit(&prob, &a.nlist, &grid, tol)?)
        }
    }?;
    output::write_text(out, &text)?;
    Ok(text)
}

fn parse_proj(s: &str, dims: usize) -> Result<(usize, usize), Fail> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| Fail::Usage(format!("--proj: {e}")))?;
    match parts[..] {
        [a, b] if a < dims && b < dims => Ok((a, b)),
        _ => Err(Fail::Usage(format!("--proj needs two indices below {dims}"))),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(_) => ExitCode::SUCCESS,
        Err(Fail::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Fail::Usage(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
