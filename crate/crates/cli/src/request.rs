//! Request documents, command-line overrides and up-front validation.

use std::io::Read;
use std::path::{Path, PathBuf};

use clap::Args;
use qgid::analysis::{
    SemigroupFamily, Settings, ThresholdSearch, DEFAULT_PRECHECK_ORDER, DEFAULT_Z_GRID,
};
use qgid::lst::RawSpec;
use qgid::LstSpec;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

pub const REQUEST_SCHEMA: &str = "qgid.request/v1";

const MAX_ORDER: usize = 150;
const MAX_GRID_POINTS: usize = 10_000;
const MAX_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Command {
    Analyze,
    Threshold,
    Split,
    Sweep,
    Precheck,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Self::Analyze => "analyze",
            Self::Threshold => "threshold",
            Self::Split => "split",
            Self::Sweep => "sweep",
            Self::Precheck => "precheck",
        }
    }
}

/// Bisection bracket as written in a request document.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketDocument {
    pub lo: Option<f64>,
    pub hi: Option<f64>,
    pub iters: Option<usize>,
    pub cap: Option<f64>,
}

/// JSON request as read from a file or stdin. Every field is optional here;
/// [`AnalysisRequest::build`] decides what each command needs.
#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RequestDocument {
    pub schema: Option<String>,
    pub command: Option<Command>,
    pub spec: Option<serde_json::Value>,
    pub lambda: Option<f64>,
    pub lambda_grid: Option<Vec<f64>>,
    pub p: Option<f64>,
    pub p_grid: Option<Vec<f64>>,
    pub order: Option<usize>,
    pub tolerance: Option<f64>,
    pub semigroup: Option<String>,
    pub bracket: Option<BracketDocument>,
    pub z_grid: Option<Vec<f64>>,
    pub m: Option<usize>,
}

/// Command-line flags. Any flag given overrides the request document.
#[derive(Debug, Clone, Default, Args)]
pub struct Overrides {
    /// Request document; `-` reads stdin.
    #[arg(long, value_name = "FILE")]
    pub request: Option<PathBuf>,
    /// Distribution spec as inline JSON, or `@FILE`.
    #[arg(long, value_name = "JSON")]
    pub spec: Option<String>,
    /// Truncation order.
    #[arg(long)]
    pub order: Option<usize>,
    /// Nonnegativity tolerance.
    #[arg(long, allow_negative_numbers = true)]
    pub tol: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub lambda: Option<f64>,
    /// Evenly spaced grid `lo:hi:n`.
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    pub lambda_grid: Option<String>,
    /// Split parameter.
    #[arg(long, allow_negative_numbers = true)]
    pub p: Option<f64>,
    /// Evenly spaced grid `lo:hi:n` of split parameters.
    #[arg(long, value_name = "LO:HI:N", allow_hyphen_values = true)]
    pub p_grid: Option<String>,
    /// `geometric` or `classical`.
    #[arg(long)]
    pub semigroup: Option<String>,
    /// Lower end of the threshold bracket.
    #[arg(long, allow_negative_numbers = true)]
    pub lo: Option<f64>,
    /// Upper end of the threshold bracket.
    #[arg(long, allow_negative_numbers = true)]
    pub hi: Option<f64>,
    /// Bisection steps.
    #[arg(long)]
    pub iters: Option<usize>,
    /// Largest λ tried while expanding the bracket.
    #[arg(long, allow_negative_numbers = true)]
    pub cap: Option<f64>,
    /// Comma-separated evaluation points for `precheck`.
    #[arg(long, value_name = "Z,...", allow_hyphen_values = true)]
    pub z_grid: Option<String>,
    /// Derivative count for `precheck`.
    #[arg(long)]
    pub m: Option<usize>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    /// Directory for `index,value` CSV dumps of every sequence.
    #[arg(long, value_name = "DIR")]
    pub csv: Option<PathBuf>,
}

/// A fully validated request.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisRequest {
    pub command: Command,
    pub spec: LstSpec,
    pub settings: Settings,
    pub semigroup: SemigroupFamily,
    pub lambda: Option<f64>,
    pub lambda_grid: Vec<f64>,
    pub p_grid: Vec<f64>,
    pub search: ThresholdSearch,
    pub z_grid: Vec<f64>,
    pub m: usize,
}

fn out_of_range(msg: String) -> CliError {
    CliError::OutOfRange(msg)
}

fn parse_json(text: &str, source_name: &str) -> Result<serde_json::Value> {
    serde_json::from_str(text).map_err(|e| CliError::MalformedJson {
        source_name: source_name.to_string(),
        message: e.to_string(),
    })
}

fn read_text(path: &Path) -> Result<String> {
    if path == Path::new("-") {
        let mut text = String::new();
        std::io::stdin()
            .read_to_string(&mut text)
            .map_err(|source| CliError::Io {
                path: path.to_path_buf(),
                source,
            })?;
        return Ok(text);
    }
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Parses a request document from JSON text.
pub fn parse_document(text: &str, source_name: &str) -> Result<RequestDocument> {
    let value = parse_json(text, source_name)?;
    serde_json::from_value(value).map_err(|e| CliError::InvalidRequest(e.to_string()))
}

/// Parses a spec: JSON shape first, then family and parameter ranges.
pub fn parse_spec(value: serde_json::Value) -> Result<LstSpec> {
    let raw: RawSpec = serde_json::from_value(value)
        .map_err(|e| CliError::InvalidRequest(format!("spec: {e}")))?;
    LstSpec::try_from(raw).map_err(CliError::from_validation)
}

/// `lo:hi:n` with `n` evenly spaced points, both ends included.
pub fn parse_grid(text: &str, name: &str) -> Result<Vec<f64>> {
    let bad = || CliError::InvalidRequest(format!("{name} must look like lo:hi:n, got '{text}'"));
    let parts: Vec<&str> = text.split(':').collect();
    let [lo, hi, n] = parts.as_slice() else {
        return Err(bad());
    };
    let lo: f64 = lo.trim().parse().map_err(|_| bad())?;
    let hi: f64 = hi.trim().parse().map_err(|_| bad())?;
    let n: usize = n.trim().parse().map_err(|_| bad())?;
    if n == 0 || n > MAX_GRID_POINTS {
        return Err(out_of_range(format!(
            "{name} point count out of range [1,{MAX_GRID_POINTS}], got {n}"
        )));
    }
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(out_of_range(format!("{name} ends must be finite")));
    }
    if n == 1 {
        return Ok(vec![lo]);
    }
    let step = (hi - lo) / (n - 1) as f64;
    Ok((0..n)
        .map(|i| if i + 1 == n { hi } else { lo + step * i as f64 })
        .collect())
}

fn parse_list(text: &str, name: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|s| {
            s.trim().parse::<f64>().map_err(|_| {
                CliError::InvalidRequest(format!(
                    "{name} must be comma-separated numbers, got '{text}'"
                ))
            })
        })
        .collect()
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda.is_finite() && lambda > 0.0 {
        Ok(())
    } else {
        Err(out_of_range(format!(
            "lambda out of range (0,inf), got {lambda}"
        )))
    }
}

fn check_lambda_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(out_of_range("lambda grid is empty".into()));
    }
    grid.iter().try_for_each(|&l| check_lambda(l))?;
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(out_of_range(
            "lambda grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

impl AnalysisRequest {
    /// Reads the request file (if any), applies flag overrides and validates.
    /// `command` is the subcommand; `None` takes it from the document.
    pub fn from_sources(command: Option<Command>, flags: &Overrides) -> Result<Self> {
        let doc = match &flags.request {
            Some(path) => {
                let text = read_text(path)?;
                parse_document(&text, &path.display().to_string())?
            }
            None => RequestDocument::default(),
        };
        Self::build(command, doc, flags)
    }

    pub fn build(
        command: Option<Command>,
        mut doc: RequestDocument,
        flags: &Overrides,
    ) -> Result<Self> {
        if let Some(schema) = &doc.schema {
            if schema != REQUEST_SCHEMA {
                return Err(CliError::InvalidRequest(format!(
                    "unsupported schema '{schema}', expected '{REQUEST_SCHEMA}'"
                )));
            }
        }
        let command = match (command, doc.command) {
            (Some(c), Some(d)) if c != d => {
                return Err(CliError::InvalidRequest(format!(
                    "request command '{}' conflicts with subcommand '{}'",
                    d.name(),
                    c.name()
                )))
            }
            (Some(c), _) | (None, Some(c)) => c,
            (None, None) => {
                return Err(CliError::InvalidRequest(
                    "no command given in the request document".into(),
                ))
            }
        };

        if let Some(text) = &flags.spec {
            doc.spec = Some(match text.strip_prefix('@') {
                Some(path) => {
                    let body = read_text(Path::new(path))?;
                    parse_json(&body, path)?
                }
                None => parse_json(text, "--spec")?,
            });
        }
        let spec = parse_spec(
            doc.spec
                .ok_or_else(|| CliError::InvalidRequest("no spec given".into()))?,
        )?;

        let defaults = Settings::default();
        let order = flags.order.or(doc.order).unwrap_or(defaults.order);
        let tol = flags.tol.or(doc.tolerance).unwrap_or(defaults.tol);
        if order > MAX_ORDER {
            return Err(out_of_range(format!(
                "order out of range [1,{MAX_ORDER}], got {order}"
            )));
        }
        let settings = Settings::new(order, tol).map_err(CliError::from_validation)?;

        let semigroup: SemigroupFamily = match flags.semigroup.as_ref().or(doc.semigroup.as_ref()) {
            Some(name) => name
                .parse()
                .map_err(|e: qgid::Error| CliError::InvalidRequest(e.to_string()))?,
            None => SemigroupFamily::Geometric,
        };

        let lambda = flags.lambda.or(doc.lambda);
        let lambda_grid = match &flags.lambda_grid {
            Some(text) => parse_grid(text, "lambda grid")?,
            None => doc.lambda_grid.unwrap_or_default(),
        };
        let p_grid = match (flags.p, &flags.p_grid) {
            (Some(p), _) => vec![p],
            (None, Some(text)) => parse_grid(text, "p grid")?,
            (None, None) => match (doc.p, doc.p_grid) {
                (Some(p), _) => vec![p],
                (None, Some(grid)) => grid,
                (None, None) => Vec::new(),
            },
        };

        let bracket = doc.bracket.unwrap_or_default();
        let base = ThresholdSearch::default();
        let search = ThresholdSearch {
            lo: flags.lo.or(bracket.lo).unwrap_or(base.lo),
            hi: flags.hi.or(bracket.hi).unwrap_or(base.hi),
            iters: flags.iters.or(bracket.iters).unwrap_or(base.iters),
            cap: flags.cap.or(bracket.cap).unwrap_or(base.cap),
        };
        let z_grid = match &flags.z_grid {
            Some(text) => parse_list(text, "z grid")?,
            None => doc.z_grid.unwrap_or_else(|| DEFAULT_Z_GRID.to_vec()),
        };
        let m = flags.m.or(doc.m).unwrap_or(DEFAULT_PRECHECK_ORDER);

        let request = Self {
            command,
            spec,
            settings,
            semigroup,
            lambda,
            lambda_grid,
            p_grid,
            search,
            z_grid,
            m,
        };
        request.validate()?;
        Ok(request)
    }

    pub(crate) fn require_lambda(&self) -> Result<f64> {
        let lambda = self.lambda.ok_or_else(|| {
            CliError::InvalidRequest(format!("'{}' needs lambda", self.command.name()))
        })?;
        check_lambda(lambda)?;
        Ok(lambda)
    }

    fn validate(&self) -> Result<()> {
        match self.command {
            Command::Analyze => {
                self.require_lambda()?;
            }
            Command::Threshold => {
                let s = self.search;
                if !(s.lo.is_finite() && s.lo > 0.0) {
                    return Err(out_of_range(format!(
                        "lo out of range (0,inf), got {}",
                        s.lo
                    )));
                }
                if !(s.hi.is_finite() && s.hi > s.lo) {
                    return Err(out_of_range(format!(
                        "hi out of range (lo,inf), got {} with lo = {}",
                        s.hi, s.lo
                    )));
                }
                if !(s.cap.is_finite() && s.cap >= s.hi) {
                    return Err(out_of_range(format!(
                        "cap out of range [hi,inf), got {} with hi = {}",
                        s.cap, s.hi
                    )));
                }
                if s.iters > MAX_ITERS {
                    return Err(out_of_range(format!(
                        "iters out of range [0,{MAX_ITERS}], got {}",
                        s.iters
                    )));
                }
            }
            Command::Split => {
                self.require_lambda()?;
                if self.p_grid.is_empty() {
                    return Err(CliError::InvalidRequest("'split' needs p or p_grid".into()));
                }
            }
            Command::Sweep => {
                if self.lambda_grid.is_empty() {
                    return Err(CliError::InvalidRequest("'sweep' needs lambda_grid".into()));
                }
                check_lambda_grid(&self.lambda_grid)?;
            }
            Command::Precheck => {
                self.require_lambda()?;
                if self.z_grid.is_empty() {
                    return Err(out_of_range("z grid is empty".into()));
                }
                if let Some(z) = self.z_grid.iter().find(|z| !(z.is_finite() && **z < 1.0)) {
                    return Err(out_of_range(format!("z out of range (-inf,1), got {z}")));
                }
                if self.m == 0 || self.m > MAX_ORDER {
                    return Err(out_of_range(format!(
                        "m out of range [1,{MAX_ORDER}], got {}",
                        self.m
                    )));
                }
            }
        }
        if self.p_grid.len() > MAX_GRID_POINTS {
            return Err(out_of_range(format!(
                "p grid has more than {MAX_GRID_POINTS} points"
            )));
        }
        for &p in &self.p_grid {
            self.semigroup
                .check_admissible(p)
                .map_err(CliError::from_validation)?;
        }
        Ok(())
    }
}
