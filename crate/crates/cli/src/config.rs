//! Command-line flags, the optional JSON config file, and their merge into a
//! validated [`RunConfig`]. Flags override the file; the file overrides the
//! built-in defaults.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use robinspec::geometry::{DomainKind, DomainSpec, GammaSelector};
use serde::Deserialize;

#[derive(Parser, Debug)]
#[command(
    name = "robinspec",
    version,
    about = "Robin Laplacian eigenvalues, optimal boundary coefficients and spectral bounds"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    /// Lowest Robin eigenvalue on one refinement level
    Solve,
    /// Optimal boundary coefficient of total mass m on Γ
    Optimal,
    /// Two-sided bounds on the optimal eigenvalue and on convex domains
    Bounds,
    /// Eigenvalue of the dilated domain εΩ as ε varies
    Scaling,
    /// Hardy inequality of convex domains on random and ground-state functions
    Hardy,
    /// Eigenvalues over refinement levels with observed convergence order
    Converge,
    /// Export the mesh of the selected level
    Mesh,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Solve => "solve",
            Command::Optimal => "optimal",
            Command::Bounds => "bounds",
            Command::Scaling => "scaling",
            Command::Hardy => "hardy",
            Command::Converge => "converge",
            Command::Mesh => "mesh",
        }
    }
}

pub const DOMAINS: [&str; 6] = ["interval", "square", "rect", "triangle", "polygon", "disk"];

#[derive(Args, Debug, Default)]
pub struct Flags {
    /// Domain shape
    #[arg(long, global = true, value_parser = DOMAINS)]
    pub domain: Option<String>,
    /// Left end of the interval
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub a: Option<f64>,
    /// Right end of the interval
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Rectangle width
    #[arg(long, global = true)]
    pub width: Option<f64>,
    /// Rectangle height
    #[arg(long, global = true)]
    pub height: Option<f64>,
    /// Polygon vertices as x0,y0,x1,y1,… counterclockwise
    #[arg(long, global = true, value_delimiter = ',', allow_negative_numbers = true)]
    pub vertices: Option<Vec<f64>>,
    /// Disk radius
    #[arg(long, global = true)]
    pub radius: Option<f64>,
    /// Boundary segments of the coarsest disk mesh
    #[arg(long, global = true)]
    pub segments: Option<usize>,
    /// Γ: all, edges=i,j,… or arc=θ₁:θ₂[,θ₃:θ₄…]
    #[arg(long, global = true)]
    pub gamma: Option<String>,
    /// Constant σ on Γ (a comma list where the command sweeps σ)
    #[arg(long, global = true, value_delimiter = ',')]
    pub sigma: Option<Vec<f64>>,
    /// σ at the left end of an interval
    #[arg(long = "sigma-a", global = true)]
    pub sigma_a: Option<f64>,
    /// σ at the right end of an interval
    #[arg(long = "sigma-b", global = true)]
    pub sigma_b: Option<f64>,
    /// Boundary mass grid
    #[arg(long, global = true, value_delimiter = ',')]
    pub m: Option<Vec<f64>>,
    /// Dilation grid
    #[arg(long, global = true, value_delimiter = ',')]
    pub eps: Option<Vec<f64>>,
    /// Hardy shift grid
    #[arg(long, global = true, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    /// Refinement level (the finest level for converge)
    #[arg(long, global = true)]
    pub levels: Option<usize>,
    /// Random trials for optimal and hardy
    #[arg(long, global = true)]
    pub trials: Option<usize>,
    /// JSON output path (standard output otherwise)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// CSV side file (defaults to the --out path with a .csv extension)
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Seed for random trials
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// JSON config file; flags override its entries
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
pub enum Grid {
    One(f64),
    Many(Vec<f64>),
}

impl Grid {
    fn into_vec(self) -> Vec<f64> {
        match self {
            Grid::One(x) => vec![x],
            Grid::Many(v) => v,
        }
    }
}

/// Keys of the config file; the same names as the flags, with `_` for `-`.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub domain: Option<String>,
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub width: Option<f64>,
    pub height: Option<f64>,
    pub vertices: Option<Vec<[f64; 2]>>,
    pub radius: Option<f64>,
    pub segments: Option<usize>,
    pub gamma: Option<String>,
    pub sigma: Option<Grid>,
    pub sigma_a: Option<f64>,
    pub sigma_b: Option<f64>,
    pub m: Option<Grid>,
    pub eps: Option<Grid>,
    pub alpha: Option<Grid>,
    pub levels: Option<usize>,
    pub trials: Option<usize>,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub domain_name: String,
    pub domain: DomainSpec,
    pub gamma_text: String,
    pub sigma: Vec<f64>,
    /// Interval endpoint coefficients, when given.
    pub sigma_ends: Option<(f64, f64)>,
    pub m: Vec<f64>,
    pub eps: Vec<f64>,
    /// `None` means the per-σ default `0.1, 0.25, 1/(2σ), 1`.
    pub alpha: Option<Vec<f64>>,
    pub levels: usize,
    pub trials: usize,
    pub out: Option<PathBuf>,
    pub csv: Option<PathBuf>,
    pub seed: u64,
}

pub const DEFAULT_SEED: u64 = 42;

fn read_file(path: &Path) -> Result<FileConfig, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read config {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("config {}: {e}", path.display()))
}

pub fn parse_gamma(text: &str) -> Result<GammaSelector, String> {
    let text = text.trim();
    if text == "all" {
        return Ok(GammaSelector::All);
    }
    if let Some(list) = text.strip_prefix("edges=") {
        let sides = list
            .split(',')
            .map(|s| s.trim().parse::<usize>().map_err(|_| format!("bad edge index {s:?} in --gamma")))
            .collect::<Result<Vec<_>, _>>()?;
        return Ok(GammaSelector::Sides(sides));
    }
    if let Some(list) = text.strip_prefix("arc=") {
        let arcs = list
            .split(',')
            .map(|r| {
                let (f, t) = r.split_once(':').ok_or_else(|| format!("arc {r:?} needs the form θ₁:θ₂"))?;
                let parse = |s: &str| s.trim().parse::<f64>().map_err(|_| format!("bad angle {s:?} in --gamma"));
                Ok((parse(f)?, parse(t)?))
            })
            .collect::<Result<Vec<_>, String>>()?;
        return Ok(GammaSelector::Arcs(arcs));
    }
    Err(format!("--gamma must be all, edges=i,j,… or arc=θ₁:θ₂, got {text:?}"))
}

fn check_grid(name: &str, grid: &[f64], positive: bool) -> Result<(), String> {
    if grid.is_empty() {
        return Err(format!("--{name} grid is empty"));
    }
    let ok = |x: f64| x.is_finite() && if positive { x > 0.0 } else { x >= 0.0 };
    match grid.iter().find(|&&x| !ok(x)) {
        Some(bad) => Err(format!(
            "--{name} values must be finite and {}, got {bad}",
            if positive { "positive" } else { "nonnegative" }
        )),
        None => Ok(()),
    }
}

impl RunConfig {
    pub fn resolve(command: Command, flags: Flags) -> Result<RunConfig, String> {
        let file = match &flags.config {
            Some(p) => read_file(p)?,
            None => FileConfig::default(),
        };
        let domain_name = flags.domain.or(file.domain).unwrap_or_else(|| "square".into());
        if !DOMAINS.contains(&domain_name.as_str()) {
            return Err(format!("unknown domain {domain_name:?}; expected one of {DOMAINS:?}"));
        }
        let vertices = match flags.vertices {
            Some(flat) => {
                if flat.len() % 2 != 0 {
                    return Err("--vertices needs an even number of coordinates".into());
                }
                Some(flat.chunks(2).map(|c| [c[0], c[1]]).collect::<Vec<_>>())
            }
            None => file.vertices,
        };
        let kind = match domain_name.as_str() {
            "interval" => DomainKind::Interval { a: flags.a.or(file.a).unwrap_or(0.0), b: flags.b.or(file.b).unwrap_or(1.0) },
            "square" => DomainSpec::unit_square().kind,
            "rect" => {
                DomainSpec::rectangle(flags.width.or(file.width).unwrap_or(2.0), flags.height.or(file.height).unwrap_or(1.0)).kind
            }
            "triangle" => DomainSpec::right_triangle().kind,
            "polygon" => DomainKind::Polygon { vertices: vertices.ok_or("--domain polygon needs --vertices")? },
            _ => DomainKind::Disk {
                center: [0.0, 0.0],
                radius: flags.radius.or(file.radius).unwrap_or(1.0),
                segments: flags.segments.or(file.segments).unwrap_or(16),
            },
        };
        let gamma_text = flags.gamma.or(file.gamma).unwrap_or_else(|| "all".into());
        let domain = DomainSpec { kind, gamma: parse_gamma(&gamma_text)? };
        domain.validate().map_err(|e| e.to_string())?;

        let sigma = flags.sigma.or(file.sigma.map(Grid::into_vec)).unwrap_or_else(|| vec![1.0]);
        check_grid("sigma", &sigma, false)?;
        let sigma_ends = match (flags.sigma_a.or(file.sigma_a), flags.sigma_b.or(file.sigma_b)) {
            (None, None) => None,
            (sa, sb) => {
                if domain.dim() != 1 {
                    return Err("--sigma-a/--sigma-b apply to intervals only".into());
                }
                let (sa, sb) = (sa.unwrap_or(sigma[0]), sb.unwrap_or(sigma[0]));
                check_grid("sigma-a", &[sa], false)?;
                check_grid("sigma-b", &[sb], false)?;
                Some((sa, sb))
            }
        };
        let default_m = if command == Command::Bounds { vec![0.1, 1.0, 10.0, 100.0] } else { vec![1.0] };
        let m = flags.m.or(file.m.map(Grid::into_vec)).unwrap_or(default_m);
        check_grid("m", &m, true)?;
        let eps = flags
            .eps
            .or(file.eps.map(Grid::into_vec))
            .unwrap_or_else(|| vec![1e-3, 1e-2, 0.1, 1.0, 10.0, 100.0, 1e3]);
        check_grid("eps", &eps, true)?;
        let alpha = flags.alpha.or(file.alpha.map(Grid::into_vec));
        if let Some(a) = &alpha {
            check_grid("alpha", a, true)?;
        }
        let default_levels = if command == Command::Converge { 5 } else { 3 };
        let levels = flags.levels.or(file.levels).unwrap_or(default_levels);
        if levels == 0 {
            return Err("--levels must be at least 1".into());
        }
        if command == Command::Converge && levels < 3 {
            return Err("converge needs --levels 3 or more to estimate an order".into());
        }
        let default_trials = if command == Command::Hardy { 25 } else { 20 };
        Ok(RunConfig {
            command,
            domain_name,
            domain,
            gamma_text,
            sigma,
            sigma_ends,
            m,
            eps,
            alpha,
            levels,
            trials: flags.trials.or(file.trials).unwrap_or(default_trials),
            out: flags.out.or(file.out),
            csv: flags.csv.or(file.csv),
            seed: flags.seed.or(file.seed).unwrap_or(DEFAULT_SEED),
        })
    }

    /// Where the CSV side file goes: `--csv`, else `--out` with a `.csv`
    /// extension, else nowhere.
    pub fn csv_path(&self) -> Option<PathBuf> {
        self.csv.clone().or_else(|| self.out.as_ref().map(|p| p.with_extension("csv")))
    }
}
