//! Command-line front end: configuration, dispatch and CSV output.
//!
//! Configuration comes from an optional flat `key = value` file overlaid by
//! command-line flags. Every table starts with `#` comment lines carrying the
//! resolved configuration.

mod commands;
mod verify;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::kernel::check_hypotheses;

pub use verify::{run_verify, Check};

#[derive(Debug, Parser)]
#[command(name = "mieprop", version, about = "Mie eigenfunctions and the localized Maxwell propagator outside a conducting ball")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub opts: Options,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Spherical Bessel values and Wronskian defects on a (ℓ, z) grid.
    Specfun,
    /// Gram matrix defect of the vector harmonics on the default grid.
    VshGram,
    /// Scattering amplitudes per order, polarization and size parameter.
    Mie,
    /// E and H of a random generalized eigenfunction at sample points.
    Field,
    /// Kernel values at sampled point pairs.
    Kernel,
    /// Time-decay sweep of the sampled kernel sup-norm.
    Sweep,
    /// Runs the verification suite.
    Verify,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Specfun => "specfun",
            Command::VshGram => "vsh-gram",
            Command::Mie => "mie",
            Command::Field => "field",
            Command::Kernel => "kernel",
            Command::Sweep => "sweep",
            Command::Verify => "verify",
        }
    }
}

/// Flags shared by every subcommand; each overrides the same key in the
/// config file.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// Flat `key = value` configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub rho: Option<String>,
    #[arg(long, global = true)]
    pub a: Option<String>,
    #[arg(long, global = true)]
    pub h: Option<String>,
    /// Observation radius bound.
    #[arg(long = "R", alias = "r-bound", global = true)]
    pub r_bound: Option<String>,
    /// Largest degree, or `auto`.
    #[arg(long, global = true)]
    pub ell_max: Option<String>,
    #[arg(long, global = true)]
    pub seed: Option<String>,
    #[arg(long, short, global = true)]
    pub output: Option<String>,
    #[arg(long, global = true)]
    pub samples: Option<String>,
    #[arg(long, global = true)]
    pub x_min: Option<String>,
    #[arg(long, global = true)]
    pub x_max: Option<String>,
    #[arg(long, global = true)]
    pub lambda: Option<String>,
    #[arg(long, global = true)]
    pub t: Option<String>,
    #[arg(long, global = true)]
    pub pairs: Option<String>,
    /// Comma-separated list of h values for the sweep.
    #[arg(long, global = true)]
    pub hs: Option<String>,
    /// Comma-separated Cartesian point.
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub y: Option<String>,
    #[arg(long, global = true, allow_hyphen_values = true)]
    pub y2: Option<String>,
    /// Skip the hypothesis gate; outputs are watermarked.
    #[arg(long, global = true)]
    pub unsafe_params: bool,
    /// Debug: replace the scattering amplitudes by zero.
    #[arg(long, global = true)]
    pub zero_amplitude: bool,
}

const KEYS: &[&str] = &[
    "rho",
    "a",
    "h",
    "R",
    "ell_max",
    "seed",
    "output",
    "samples",
    "x_min",
    "x_max",
    "lambda",
    "t",
    "pairs",
    "hs",
    "y",
    "y2",
    "unsafe_params",
    "zero_amplitude",
];

impl Options {
    fn overrides(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        let pairs: [(&str, &Option<String>); 16] = [
            ("rho", &self.rho),
            ("a", &self.a),
            ("h", &self.h),
            ("R", &self.r_bound),
            ("ell_max", &self.ell_max),
            ("seed", &self.seed),
            ("output", &self.output),
            ("samples", &self.samples),
            ("x_min", &self.x_min),
            ("x_max", &self.x_max),
            ("lambda", &self.lambda),
            ("t", &self.t),
            ("pairs", &self.pairs),
            ("hs", &self.hs),
            ("y", &self.y),
            ("y2", &self.y2),
        ];
        for (k, v) in pairs {
            if let Some(v) = v {
                m.insert(k.to_string(), v.clone());
            }
        }
        if self.unsafe_params {
            m.insert("unsafe_params".into(), "true".into());
        }
        if self.zero_amplitude {
            m.insert("zero_amplitude".into(), "true".into());
        }
        m
    }
}

/// Parses flat `key = value` text; `#` starts a comment.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut m = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("config line {}: expected `key = value`", n + 1)))?;
        let k = k.trim();
        if !KEYS.contains(&k) {
            return Err(Error::Usage(format!("unknown config key '{k}'")));
        }
        m.insert(k.to_string(), v.trim().to_string());
    }
    Ok(m)
}

/// Fully resolved run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    pub rho: f64,
    pub a: f64,
    pub h: f64,
    pub r_bound: f64,
    pub ell_max: Option<usize>,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub samples: Option<usize>,
    pub x_min: Option<f64>,
    pub x_max: Option<f64>,
    pub lambda: Option<f64>,
    pub t: f64,
    pub pairs: Option<usize>,
    pub hs: Vec<f64>,
    pub y: Option<[f64; 3]>,
    pub y2: Option<[f64; 3]>,
    pub unsafe_params: bool,
    pub zero_amplitude: bool,
}

fn parse_num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.trim()
        .parse()
        .map_err(|_| Error::Usage(format!("invalid value '{v}' for '{key}'")))
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(',').map(|s| parse_num(key, s)).collect()
}

fn parse_point(key: &str, v: &str) -> Result<[f64; 3]> {
    let l = parse_list(key, v)?;
    <[f64; 3]>::try_from(l).map_err(|_| Error::Usage(format!("'{key}' needs three comma-separated numbers")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v.trim() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Usage(format!("invalid boolean '{v}' for '{key}'"))),
    }
}

impl RunConfig {
    /// Merges file values and flag overrides, then applies the hypothesis
    /// gate unless `unsafe_params` is set.
    pub fn resolve(command: Command, file: &BTreeMap<String, String>, flags: &BTreeMap<String, String>) -> Result<Self> {
        let mut m = file.clone();
        for (k, v) in flags {
            if !KEYS.contains(&k.as_str()) {
                return Err(Error::Usage(format!("unknown key '{k}'")));
            }
            m.insert(k.clone(), v.clone());
        }
        let get = |k: &str| m.get(k).map(String::as_str);
        let num = |k: &str, d: f64| -> Result<f64> { get(k).map_or(Ok(d), |v| parse_num(k, v)) };
        let opt_num = |k: &str| -> Result<Option<f64>> { get(k).map(|v| parse_num(k, v)).transpose() };
        let opt_usize = |k: &str| -> Result<Option<usize>> { get(k).map(|v| parse_num(k, v)).transpose() };
        let h = num("h", 0.125)?;
        let cfg = Self {
            command,
            rho: num("rho", 1.0)?,
            a: num("a", 4.0)?,
            h,
            r_bound: num("R", 2.0)?,
            ell_max: match get("ell_max") {
                None | Some("auto") => None,
                Some(v) => Some(parse_num("ell_max", v)?),
            },
            seed: get("seed").map_or(Ok(0), |v| parse_num("seed", v))?,
            output: get("output").map(PathBuf::from),
            samples: opt_usize("samples")?,
            x_min: opt_num("x_min")?,
            x_max: opt_num("x_max")?,
            lambda: opt_num("lambda")?,
            t: num("t", 0.0)?,
            pairs: opt_usize("pairs")?,
            hs: match get("hs") {
                Some(v) => parse_list("hs", v)?,
                None if command == Command::Sweep => vec![1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0],
                None => vec![h],
            },
            y: get("y").map(|v| parse_point("y", v)).transpose()?,
            y2: get("y2").map(|v| parse_point("y2", v)).transpose()?,
            unsafe_params: get("unsafe_params").map_or(Ok(false), |v| parse_bool("unsafe_params", v))?,
            zero_amplitude: get("zero_amplitude").map_or(Ok(false), |v| parse_bool("zero_amplitude", v))?,
        };
        if !(cfg.rho > 0.0 && cfg.a > 0.0 && cfg.r_bound > 0.0 && cfg.hs.iter().all(|&h| h > 0.0) && cfg.h > 0.0) {
            return Err(Error::Usage("rho, a, h and R must be positive".into()));
        }
        if !cfg.unsafe_params {
            check_hypotheses(cfg.rho, cfg.a, cfg.h, cfg.r_bound)?;
            for &hh in &cfg.hs {
                check_hypotheses(cfg.rho, cfg.a, hh, cfg.r_bound)?;
            }
        }
        Ok(cfg)
    }

    /// `# key = value` lines for every resolved parameter, in a fixed order.
    pub fn header(&self) -> Vec<String> {
        let mut out = vec![format!("mieprop {}", self.command.name())];
        if self.unsafe_params {
            out.push("UNSAFE PARAMETERS: hypothesis gate disabled".into());
        }
        let opt = |v: Option<String>| v.unwrap_or_else(|| "default".into());
        let pt = |p: Option<[f64; 3]>| opt(p.map(|p| format!("{},{},{}", p[0], p[1], p[2])));
        let kv: Vec<(&str, String)> = vec![
            ("rho", self.rho.to_string()),
            ("a", self.a.to_string()),
            ("h", self.h.to_string()),
            ("R", self.r_bound.to_string()),
            ("ell_max", self.ell_max.map_or("auto".into(), |l| l.to_string())),
            ("seed", self.seed.to_string()),
            ("samples", opt(self.samples.map(|s| s.to_string()))),
            ("x_min", opt(self.x_min.map(|s| s.to_string()))),
            ("x_max", opt(self.x_max.map(|s| s.to_string()))),
            ("lambda", opt(self.lambda.map(|s| s.to_string()))),
            ("t", self.t.to_string()),
            ("pairs", opt(self.pairs.map(|s| s.to_string()))),
            ("hs", self.hs.iter().map(|h| h.to_string()).collect::<Vec<_>>().join(",")),
            ("y", pt(self.y)),
            ("y2", pt(self.y2)),
            ("unsafe_params", self.unsafe_params.to_string()),
            ("zero_amplitude", self.zero_amplitude.to_string()),
        ];
        out.extend(kv.into_iter().map(|(k, v)| format!("{k} = {v}")));
        out
    }
}

/// Resolves the configuration of a parsed command line (reading the config
/// file if one was given).
pub fn parse_config(cli: &Cli) -> Result<RunConfig> {
    let file = match &cli.opts.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|source| Error::Io {
                path: p.to_path_buf(),
                source,
            })?;
            parse_config_text(&text)?
        }
        None => BTreeMap::new(),
    };
    RunConfig::resolve(cli.command, &file, &cli.opts.overrides())
}

/// Header comments, column names and pre-formatted rows.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CsvTable {
    pub comments: Vec<String>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvTable {
    pub fn new(comments: Vec<String>, columns: &[&str]) -> Self {
        Self {
            comments,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    /// Renders with LF line endings; fields with commas, quotes or
    /// newlines are quoted.
    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.comments {
            let _ = writeln!(s, "# {c}");
        }
        let line = |fields: &[String]| fields.iter().map(|f| quote(f)).collect::<Vec<_>>().join(",");
        let _ = writeln!(s, "{}", line(&self.columns));
        for r in &self.rows {
            let _ = writeln!(s, "{}", line(r));
        }
        s
    }
}

fn quote(f: &str) -> String {
    if f.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", f.replace('"', "\"\""))
    } else {
        f.to_string()
    }
}

/// Float with 17 significant digits.
pub fn fmt_f(x: f64) -> String {
    format!("{x:.16e}")
}

/// Writes `table` to `path`, or to stdout when `path` is `None`.
pub fn emit_csv(table: &CsvTable, path: Option<&Path>) -> Result<()> {
    let text = table.render();
    match path {
        Some(p) => std::fs::write(p, text).map_err(|source| Error::Io {
            path: p.to_path_buf(),
            source,
        }),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes()).map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            })
        }
    }
}

/// Process exit code for an error.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) | Error::Hypothesis(_) | Error::Domain(_) | Error::Truncation { .. } | Error::GridMismatch(_) => 2,
        Error::Budget { .. } => 3,
        _ => 1,
    }
}

/// Runs one resolved command; returns the exit code.
pub fn run(cfg: &RunConfig) -> Result<i32> {
    let (table, code) = match cfg.command {
        Command::Specfun => (commands::specfun(cfg)?, 0),
        Command::VshGram => (commands::vsh_gram(cfg)?, 0),
        Command::Mie => (commands::mie(cfg)?, 0),
        Command::Field => (commands::field(cfg)?, 0),
        Command::Kernel => (commands::kernel(cfg)?, 0),
        Command::Sweep => (commands::sweep(cfg)?, 0),
        Command::Verify => {
            let checks = run_verify(cfg)?;
            let failed: Vec<&Check> = checks.iter().filter(|c| !c.pass).collect();
            if let Some(first) = failed.first() {
                eprintln!(
                    "verify: {} of {} checks failed; first: {} (measured {:.3e}, tolerance {:.3e})",
                    failed.len(),
                    checks.len(),
                    first.name,
                    first.measured,
                    first.tolerance
                );
            }
            (verify::report(cfg, &checks), if failed.is_empty() { 0 } else { 1 })
        }
    };
    emit_csv(&table, cfg.output.as_deref())?;
    Ok(code)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn resolve(args: &[&str]) -> Result<RunConfig> {
        let mut argv = vec!["mieprop"];
        argv.extend_from_slice(args);
        let cli = Cli::try_parse_from(argv).map_err(|e| Error::Usage(e.to_string()))?;
        parse_config(&cli)
    }

    #[test]
    fn valid_flags_resolve() {
        let c = resolve(&["mie", "--rho", "1", "--a", "4", "--h", "0.125"]).unwrap();
        assert_eq!((c.rho, c.a, c.h), (1.0, 4.0, 0.125));
    }

    #[test]
    fn hypothesis_violations_are_named() {
        let e = resolve(&["mie", "--rho", "1", "--a", "1", "--h", "0.5"]).unwrap_err();
        assert!(e.to_string().contains("h < 1/4 violated"));
        assert_eq!(exit_code(&e), 2);
        let e = resolve(&["mie", "--rho", "0.4", "--a", "4"]).unwrap_err();
        assert!(e.to_string().contains("rho ≥ 1 violated"));
        let c = resolve(&["mie", "--rho", "0.4", "--unsafe-params"]).unwrap();
        assert!(c.header().iter().any(|l| l.contains("UNSAFE")));
    }

    #[test]
    fn file_values_are_overridden_and_unknown_keys_rejected() {
        let file = parse_config_text("# comment\nrho = 1.5\nh = 0.0625\n").unwrap();
        let mut flags = BTreeMap::new();
        flags.insert("h".to_string(), "0.125".to_string());
        let c = RunConfig::resolve(Command::Mie, &file, &flags).unwrap();
        assert_eq!((c.rho, c.h), (1.5, 0.125));
        let e = parse_config_text("bogus = 1").unwrap_err();
        assert!(e.to_string().contains("bogus"));
        assert!(parse_config_text("rho 1").is_err());
    }

    #[test]
    fn csv_rendering() {
        let mut t = CsvTable::new(vec!["x = 1".into()], &["a", "b"]);
        assert_eq!(t.render(), "# x = 1\na,b\n");
        t.push(vec![fmt_f(0.1), "p,q".into()]);
        assert_eq!(t.render(), "# x = 1\na,b\n1.0000000000000001e-1,\"p,q\"\n");
    }
}
