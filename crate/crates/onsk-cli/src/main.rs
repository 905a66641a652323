use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use onsk::kmatrix::{build_ktr, matching_k};
use onsk::onsager::{hamiltonian, onsager_generators, CoideaSpec};
use onsk::report::{Report, Status};
use onsk::spinrep::{generators, FamilyTag};
use onsk::suites::{self, Suite, SpectrumRow, SuiteConfig};
use onsk::{make_params, Error, Operator, Rational, Scalar};

#[derive(Parser)]
#[command(name = "onsk", version, about = "Exact checks for q-boson K matrices and Onsager spin chains")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a verification suite; exit 0 iff every check passes.
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
        #[command(flatten)]
        common: Common,
    },
    /// Write a matrix in JSON.
    Dump {
        #[arg(value_enum)]
        target: Target,
        #[command(flatten)]
        common: Common,
    },
    /// Print the certified spectrum table.
    Spectrum {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Kmatrix,
    Generators,
    Hamiltonian,
    Onsager,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value = "A")]
    family: String,
    #[arg(long, default_value_t = 3)]
    n: usize,
    #[arg(long)]
    k: Option<u8>,
    #[arg(long)]
    kp: Option<u8>,
    /// Sampling seed; ONSK_SEED takes precedence.
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Override t (rational `a/b`).
    #[arg(long, allow_hyphen_values = true)]
    t: Option<String>,
    /// Override z (`a/b` or `a/b+c/d*i`).
    #[arg(long, allow_hyphen_values = true)]
    z: Option<String>,
    #[arg(long, allow_negative_numbers = true)]
    eps: Option<i8>,
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<i8>,
    /// Fock space truncation for the sp4 suite.
    #[arg(long, default_value_t = 10)]
    trunc: usize,
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum)]
    format: Option<Format>,
    #[arg(long)]
    jobs: Option<usize>,
    /// Report elapsed_ms as 0 so reports are byte-identical across runs.
    #[arg(long)]
    no_timing: bool,
}

enum Failure {
    Config(String),
    Run(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Range(_) | Error::Spec(_) | Error::Parse(_) | Error::Genericity(_) | Error::ZeroParameter(_) => {
                Failure::Config(e.to_string())
            }
            _ => Failure::Run(e.to_string()),
        }
    }
}

impl Common {
    fn config(&self) -> Result<SuiteConfig, Failure> {
        let tag: FamilyTag = self.family.parse()?;
        let ends = match (self.k, self.kp) {
            (Some(k), Some(kp)) => Some((k, kp)),
            (None, None) => None,
            _ => return Err(Failure::Config("--k and --kp go together".into())),
        };
        let seed = match std::env::var("ONSK_SEED") {
            Ok(s) => s.trim().parse().map_err(|_| Failure::Config(format!("ONSK_SEED={s:?}")))?,
            Err(_) => self.seed,
        };
        let mut cfg = SuiteConfig::sampled(tag, self.n, ends, seed);
        cfg.trunc = self.trunc;
        if self.t.is_some() || self.z.is_some() || self.eps.is_some() || self.mu.is_some() {
            let p = &cfg.params;
            let t: Rational = match &self.t {
                Some(s) => {
                    let x: Scalar = s.parse()?;
                    if !x.is_real() {
                        return Err(Failure::Config(format!("t must be rational, got {s}")));
                    }
                    x.re
                }
                None => p.t.clone(),
            };
            let z: Scalar = match &self.z {
                Some(s) => s.parse()?,
                None => p.z.clone(),
            };
            cfg.params = make_params(t, z, self.eps.unwrap_or(p.eps), self.mu.unwrap_or(p.mu))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(p) => std::fs::write(p, text).map_err(|e| Failure::Config(format!("{}: {e}", p.display()))),
            None => {
                let mut o = std::io::stdout().lock();
                o.write_all(text.as_bytes()).map_err(|e| Failure::Run(e.to_string()))
            }
        }
    }
}

#[derive(Serialize)]
struct ParamsOut {
    t: String,
    z: String,
    eps: i8,
    mu: i8,
}

impl ParamsOut {
    fn of(cfg: &SuiteConfig) -> Self {
        let p = &cfg.params;
        ParamsOut { t: p.t.to_string(), z: p.z.to_string(), eps: p.eps, mu: p.mu }
    }
}

#[derive(Serialize)]
struct VerifyOut<'a> {
    suite: String,
    family: String,
    n: usize,
    params: ParamsOut,
    checks: &'a [onsk::report::Check],
    #[serde(skip_serializing_if = "<[_]>::is_empty")]
    spectrum: &'a [SpectrumRow],
    elapsed_ms: u128,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn spectrum_csv(rows: &[SpectrumRow]) -> String {
    let mut out = String::from("n,family,spectrum,l,j,form,value,observed,expected,status\n");
    for r in rows {
        let j = r.j.map(|j| j.to_string()).unwrap_or_default();
        let f = [r.n.to_string(), r.family.clone(), r.spectrum.clone(), r.l.to_string(), j, csv_field(&r.form), csv_field(&r.value), r.observed.to_string(), r.expected.to_string(), r.status.clone()];
        out += &f.join(",");
        out.push('\n');
    }
    out
}

fn checks_csv(rep: &Report) -> String {
    let mut out = String::from("name,paper_ref,status,detail\n");
    for c in &rep.checks {
        let s = serde_json::to_value(c.status).unwrap();
        out += &format!("{},{},{},{}\n", csv_field(&c.name), csv_field(&c.paper_ref), s.as_str().unwrap(), csv_field(&c.detail));
    }
    out
}

fn checks_text(rep: &Report) -> String {
    let mut out = String::new();
    for c in &rep.checks {
        let s = match c.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skip => "INFO",
        };
        out += &format!("{s}  {}", c.name);
        if !c.detail.is_empty() {
            out += &format!("  [{}]", c.detail);
        }
        out.push('\n');
    }
    out += &format!("{} passed, {} failed\n", rep.count(Status::Pass), rep.count(Status::Fail));
    out
}

fn spectrum_text(rows: &[SpectrumRow]) -> String {
    let mut out = String::new();
    for r in rows {
        let j = r.j.map(|j| format!(" j={j}")).unwrap_or_default();
        out += &format!("{:<4} n={} l={}{j}  mult {}/{}  {}  {}\n", r.spectrum, r.n, r.l, r.observed, r.expected, r.status, r.form);
    }
    out
}

fn verify(suite: &str, c: &Common) -> Result<bool, Failure> {
    let suite: Suite = suite.parse()?;
    let cfg = c.config()?;
    let start = Instant::now();
    let (rep, rows) = suites::run(suite, &cfg)?;
    let elapsed_ms = if c.no_timing { 0 } else { start.elapsed().as_millis() };
    let default = if suite == Suite::Spectra { Format::Csv } else { Format::Json };
    let text = match c.format.unwrap_or(default) {
        Format::Json => {
            let out = VerifyOut {
                suite: suite.to_string(),
                family: cfg.tag.to_string(),
                n: cfg.n,
                params: ParamsOut::of(&cfg),
                checks: &rep.checks,
                spectrum: &rows,
                elapsed_ms,
            };
            serde_json::to_string_pretty(&out).unwrap() + "\n"
        }
        Format::Csv if suite == Suite::Spectra => spectrum_csv(&rows),
        Format::Csv => checks_csv(&rep),
        Format::Text => checks_text(&rep) + &spectrum_text(&rows),
    };
    c.emit(&text)?;
    if let Some(f) = rep.first_failure() {
        eprintln!("FAIL: {} ({})", f.name, f.detail);
    }
    Ok(rep.passed())
}

#[derive(Serialize)]
struct Entry {
    row: usize,
    col: usize,
    value: String,
}

#[derive(Serialize)]
struct MatrixOut {
    name: String,
    dim: usize,
    trace: String,
    entries: Vec<Entry>,
}

fn matrix_out(name: impl Into<String>, op: &Operator) -> MatrixOut {
    let dim = 1usize << op.n;
    let trace = (0..dim).fold(Scalar::from_rational(Rational::from_integer(0.into())), |acc, i| acc + op.get(i, i));
    let entries = op.entries().map(|(row, col, v)| Entry { row, col, value: v.to_string() }).collect();
    MatrixOut { name: name.into(), dim, trace: trace.to_string(), entries }
}

#[derive(Serialize)]
struct DumpOut {
    target: String,
    family: String,
    n: usize,
    params: ParamsOut,
    matrices: Vec<MatrixOut>,
}

/// The `(k, k')` spec to dump: as given, else `(r, r')`.
fn dump_spec(cfg: &SuiteConfig) -> Result<CoideaSpec, Failure> {
    let fam = cfg.family()?;
    Ok(match (cfg.ends, fam.tag.rr()) {
        (_, None) => CoideaSpec::cyclic(fam)?,
        (Some((k, kp)), _) => CoideaSpec::new(fam, k, kp)?,
        (None, Some((r, rp))) => CoideaSpec::new(fam, r, rp)?,
    })
}

fn dump(target: Target, c: &Common) -> Result<bool, Failure> {
    let cfg = c.config()?;
    let p = &cfg.params;
    let spec = dump_spec(&cfg)?;
    let (name, matrices) = match target {
        Target::Kmatrix => {
            let km = if spec.ends.is_none() { build_ktr(cfg.n, &p.z, p)? } else { matching_k(&spec, &p.z, p)? };
            ("kmatrix", vec![matrix_out(format!("K {}", spec.label()), &km.op)])
        }
        Target::Generators => {
            let g = generators(&spec.fam, p);
            let mut m = vec![];
            for i in 0..g.e.len() {
                m.push(matrix_out(format!("e{i}"), &g.e[i]));
                m.push(matrix_out(format!("f{i}"), &g.f[i]));
                m.push(matrix_out(format!("k{i}"), &g.kplus[i]));
            }
            ("generators", m)
        }
        Target::Onsager => {
            let b = onsager_generators(&spec, p);
            ("onsager", b.iter().enumerate().map(|(i, x)| matrix_out(format!("b{i}"), x)).collect())
        }
        Target::Hamiltonian => ("hamiltonian", vec![matrix_out(format!("H {}", spec.label()), &hamiltonian(&spec, p)?)]),
    };
    let out = DumpOut { target: name.into(), family: cfg.tag.to_string(), n: cfg.n, params: ParamsOut::of(&cfg), matrices };
    c.emit(&(serde_json::to_string_pretty(&out).unwrap() + "\n"))?;
    Ok(true)
}

fn spectrum(c: &Common) -> Result<bool, Failure> {
    let cfg = c.config()?;
    let (rep, rows) = suites::spectra(&cfg)?;
    let text = match c.format.unwrap_or(Format::Text) {
        Format::Json => serde_json::to_string_pretty(&rows).unwrap() + "\n",
        Format::Csv => spectrum_csv(&rows),
        Format::Text => spectrum_text(&rows),
    };
    c.emit(&text)?;
    Ok(rep.passed())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.cmd {
        Cmd::Verify { common, .. } | Cmd::Dump { common, .. } | Cmd::Spectrum { common } => common,
    };
    if let Some(j) = common.jobs {
        if j == 0 || rayon::ThreadPoolBuilder::new().num_threads(j).build_global().is_err() {
            eprintln!("error: bad --jobs {j}");
            return ExitCode::from(2);
        }
    }
    let res = match &cli.cmd {
        Cmd::Verify { suite, common } => verify(suite, common),
        Cmd::Dump { target, common } => dump(*target, common),
        Cmd::Spectrum { common } => spectrum(common),
    };
    match res {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(Failure::Config(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Run(m)) => {
            eprintln!("FAIL: {m}");
            ExitCode::from(1)
        }
    }
}
