//! Command-line front end: reads surface and family JSON, runs the pipeline and writes JSON, CSV and SVG.

pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use umbilic_core::acceptance::run_all;
use umbilic_core::geometry::{asymptotic_directions, classify_point, left_right_label};
use umbilic_core::io::{curve_json, parse_family, parse_surface, to_string_pretty, to_value, write_sweep_csv};
use umbilic_core::nodes::{find_ellipnodes_report, find_hyperbonodes_report, refine_node, NodeSearch};
use umbilic_core::sweep::sweep;
use umbilic_core::tracing::{trace_flecnodal, trace_parabolic};
use umbilic_core::{tolerance, Error, MongeJet, NodeKind, PointKind, Window};

pub use svg::render_svg;

pub const MIN_GRID: usize = 16;
pub const MAX_GRID: usize = 4096;
pub const MAX_STEPS: usize = 100_000;

#[derive(Debug, Parser)]
#[command(name = "umbilic", version, about = "Projective umbilics of polynomial surfaces")]
pub struct Cli {
    /// Multiplier applied to every numerical tolerance.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub tol_scale: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Point type and labeled asymptotic directions.
    Classify {
        #[arg(long)]
        surface: PathBuf,
        /// `x,y`; may be repeated.
        #[arg(long, required = true, allow_hyphen_values = true)]
        point: Vec<String>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Parabolic and flecnodal curves.
    Trace {
        #[arg(long)]
        surface: PathBuf,
        #[command(flatten)]
        domain: Domain,
        /// JSON output; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long)]
        svg: Option<PathBuf>,
    },
    /// Hyperbonodes and ellipnodes in the window.
    Nodes {
        #[arg(long)]
        surface: PathBuf,
        #[command(flatten)]
        domain: Domain,
        #[arg(long, value_enum, default_value_t = KindFilter::All)]
        kind: KindFilter,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Refines a node near a point and reports its invariants.
    Invariant {
        #[arg(long)]
        surface: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Node type; chosen from the point type when absent.
        #[arg(long, value_enum)]
        kind: Option<KindChoice>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sweeps a one-parameter family and reports transitions.
    Sweep {
        #[arg(long)]
        family: PathBuf,
        #[command(flatten)]
        domain: Domain,
        /// `t0,t1`.
        #[arg(long, allow_hyphen_values = true)]
        t_range: String,
        /// Number of samples, both ends included.
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Per-sample component table.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Transitions JSON; stdout when absent.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Runs a verification suite.
    Verify {
        #[arg(long, value_enum, default_value_t = Suite::Builtin)]
        suite: Suite,
    },
    /// Figure of curves and nodes.
    Plot {
        #[arg(long)]
        surface: PathBuf,
        #[command(flatten)]
        domain: Domain,
        #[arg(long)]
        svg: PathBuf,
    },
}

#[derive(Debug, Args)]
pub struct Domain {
    /// `xmin,xmax,ymin,ymax`.
    #[arg(long, allow_hyphen_values = true, default_value = "-1,1,-1,1")]
    pub window: String,
    #[arg(long, default_value_t = 256)]
    pub grid: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindFilter {
    All,
    Hyperbonode,
    Ellipnode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum KindChoice {
    Hyperbonode,
    Ellipnode,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Suite {
    Builtin,
}

/// Failure classes with their exit codes.
#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input; exit 1.
    Usage(String),
    /// A module gave up; exit 2.
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Numerical(_) => 2,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_floats<const N: usize>(text: &str, what: &str) -> CliResult<[f64; N]> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| usage(format!("{what} `{text}`: {e}")))?;
    let arr: [f64; N] = parts
        .try_into()
        .map_err(|_| usage(format!("{what} `{text}`: expected {N} comma-separated numbers")))?;
    if arr.iter().any(|v| !v.is_finite()) {
        return Err(usage(format!("{what} `{text}`: values must be finite")));
    }
    Ok(arr)
}

pub fn parse_window(text: &str) -> CliResult<Window> {
    let [xmin, xmax, ymin, ymax] = parse_floats::<4>(text, "window")?;
    Window::new(xmin, xmax, ymin, ymax).map_err(|e| usage(e.to_string()))
}

fn check_grid(grid: usize) -> CliResult<usize> {
    if (MIN_GRID..=MAX_GRID).contains(&grid) {
        Ok(grid)
    } else {
        Err(usage(format!("grid {grid} outside [{MIN_GRID}, {MAX_GRID}]")))
    }
}

impl Domain {
    fn resolve(&self) -> CliResult<(Window, usize)> {
        Ok((parse_window(&self.window)?, check_grid(self.grid)?))
    }
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn load_surface(path: &Path) -> CliResult<MongeJet> {
    parse_surface(&read(path)?).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn write_file(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn emit(value: &Value, output: Option<&Path>) -> CliResult<()> {
    let text = to_string_pretty(value)?;
    match output {
        Some(p) => write_file(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn search_json(search: &NodeSearch) -> CliResult<Vec<Value>> {
    Ok(search.nodes.iter().map(to_value).collect::<umbilic_core::Result<_>>()?)
}

fn find_nodes(jet: &MongeJet, window: &Window, grid: usize, kind: KindFilter) -> CliResult<(Vec<Value>, usize, Vec<umbilic_core::NodeRecord>)> {
    let mut values = Vec::new();
    let mut records = Vec::new();
    let mut rejected = 0;
    if kind != KindFilter::Ellipnode {
        let s = find_hyperbonodes_report(jet, window, grid)?;
        values.extend(search_json(&s)?);
        rejected += s.rejected.len();
        records.extend(s.nodes);
    }
    if kind != KindFilter::Hyperbonode {
        let s = find_ellipnodes_report(jet, window, grid)?;
        values.extend(search_json(&s)?);
        rejected += s.rejected.len();
        records.extend(s.nodes);
    }
    Ok((values, rejected, records))
}

fn classify_json(jet: &MongeJet, x: f64, y: f64) -> CliResult<Value> {
    let class = classify_point(jet, x, y);
    let mut directions = Vec::new();
    if class.kind == PointKind::Hyperbolic {
        let frame = asymptotic_directions(jet, x, y)?;
        let labeled = left_right_label(jet, &frame).unwrap_or(frame);
        for d in labeled.directions {
            directions.push(json!({ "dx": d.dx, "dy": d.dy, "label": d.label }));
        }
    }
    Ok(to_value(&json!({
        "x": x,
        "y": y,
        "kind": class.kind,
        "discriminant": class.discriminant,
        "directions": directions,
    }))?)
}

fn trace_all(jet: &MongeJet, window: &Window, grid: usize) -> CliResult<Vec<umbilic_core::TracedCurve>> {
    let parabolic = trace_parabolic(jet, window, grid)?;
    let (left, right) = trace_flecnodal(jet, window, grid)?;
    Ok(vec![parabolic, right, left])
}

/// Executes one command.
pub fn run(cli: &Cli) -> CliResult<()> {
    tolerance::set_scale(cli.tol_scale).map_err(|e| usage(e.to_string()))?;
    match &cli.command {
        Command::Classify { surface, point, output } => {
            let jet = load_surface(surface)?;
            let points = point
                .iter()
                .map(|p| {
                    let [x, y] = parse_floats::<2>(p, "point")?;
                    classify_json(&jet, x, y)
                })
                .collect::<CliResult<Vec<_>>>()?;
            emit(&Value::Array(points), output.as_deref())
        }
        Command::Trace { surface, domain, output, svg } => {
            let jet = load_surface(surface)?;
            let (window, grid) = domain.resolve()?;
            let curves = trace_all(&jet, &window, grid)?;
            if let Some(path) = svg {
                write_file(path, &render_svg(&curves, &[], &window))?;
            }
            let value = json!({
                "window": to_value(&window)?,
                "grid": grid,
                "curves": curves.iter().map(curve_json).collect::<Vec<_>>(),
            });
            emit(&value, output.as_deref())
        }
        Command::Nodes { surface, domain, kind, output } => {
            let jet = load_surface(surface)?;
            let (window, grid) = domain.resolve()?;
            let (nodes, rejected, _) = find_nodes(&jet, &window, grid, *kind)?;
            emit(&json!({ "nodes": nodes, "rejected_seeds": rejected }), output.as_deref())
        }
        Command::Invariant { surface, point, kind, output } => {
            let jet = load_surface(surface)?;
            let [x, y] = parse_floats::<2>(point, "point")?;
            let kind = match kind {
                Some(KindChoice::Hyperbonode) => NodeKind::Hyperbonode,
                Some(KindChoice::Ellipnode) => NodeKind::Ellipnode,
                None if classify_point(&jet, x, y).kind == PointKind::Elliptic => NodeKind::Ellipnode,
                None => NodeKind::Hyperbonode,
            };
            let node = refine_node(&jet, [x, y], kind)?;
            emit(&to_value(&node)?, output.as_deref())
        }
        Command::Sweep { family, domain, t_range, steps, csv, output } => {
            let fam = parse_family(&read(family)?).map_err(|e| usage(format!("{}: {e}", family.display())))?;
            let (window, grid) = domain.resolve()?;
            let [t0, t1] = parse_floats::<2>(t_range, "t-range")?;
            if t0 >= t1 {
                return Err(usage(format!("empty t-range [{t0}, {t1}]")));
            }
            if !(2..=MAX_STEPS).contains(steps) {
                return Err(usage(format!("steps {steps} outside [2, {MAX_STEPS}]")));
            }
            let report = sweep(&fam, &window, grid, (t0, t1), *steps)?;
            if let Some(path) = csv {
                let mut buf = Vec::new();
                write_sweep_csv(&report, &mut buf)?;
                fs::write(path, buf).map_err(|e| usage(format!("{}: {e}", path.display())))?;
            }
            emit(&json!({ "transitions": to_value(&report.transitions)? }), output.as_deref())
        }
        Command::Verify { suite: Suite::Builtin } => {
            let outcomes = run_all();
            for o in &outcomes {
                println!("{o}");
            }
            let failed: Vec<u8> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id).collect();
            if failed.is_empty() {
                Ok(())
            } else {
                Err(CliError::Numerical(format!("criteria {failed:?} failed")))
            }
        }
        Command::Plot { surface, domain, svg } => {
            let jet = load_surface(surface)?;
            let (window, grid) = domain.resolve()?;
            let curves = trace_all(&jet, &window, grid)?;
            let (_, _, nodes) = find_nodes(&jet, &window, grid, KindFilter::All)?;
            write_file(svg, &render_svg(&curves, &nodes, &window))
        }
    }
}
