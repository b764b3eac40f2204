use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use drinfeld::{bundle, exit_code, load_config, parse_budget, run_all, strip_timing, CheckRequest};
use drinfeld_core::cremona::{point_json, psi_map};
use drinfeld_core::field::factor_prime_power;
use drinfeld_core::moore::tower_for;
use drinfeld_core::registry::{CheckSpec, CHECKS};
use drinfeld_core::{CheckReport, Error};
use serde_json::{Map, Value};

#[derive(Parser)]
#[command(name = "drinfeld", version, about = "Exact checks for Drinfeld half-space computations over finite fields")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    out: OutputArgs,
}

#[derive(Args, Clone)]
struct OutputArgs {
    /// Write the JSON report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads (0 = all cores).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,
    /// Resource caps, e.g. "points=10000000,degree=200,field=1048576".
    #[arg(long, global = true)]
    budget: Option<String>,
    /// Drop runtime_ms fields so repeated runs are byte-identical.
    #[arg(long, global = true)]
    omit_timing: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Clone, Default)]
struct Params {
    /// Characteristic.
    #[arg(long)]
    p: Option<u32>,
    /// q = p^e.
    #[arg(long)]
    e: Option<u32>,
    /// Prime power q (alternative to --p/--e).
    #[arg(long)]
    q: Option<u32>,
    #[arg(long)]
    n: Option<u32>,
    /// Extension degree over F_q.
    #[arg(long)]
    m: Option<u32>,
    #[arg(long)]
    c: Option<u32>,
    #[arg(long)]
    j: Option<u32>,
    #[arg(long)]
    d: Option<u32>,
    #[arg(long)]
    s: Option<u32>,
    /// Extra parameter as key=JSON; overrides the flags above.
    #[arg(long = "param", value_name = "KEY=JSON")]
    extra: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run checks: `all`, a module name, a check id, or a unique id suffix.
    Verify {
        target: String,
        /// Restrict a module to one check, e.g. `verify foliation --check splitting`.
        #[arg(long)]
        check: Option<String>,
        #[command(flatten)]
        params: Params,
    },
    /// The map ψ.
    Map {
        #[command(subcommand)]
        action: MapAction,
    },
    /// Linear systems.
    Linsys {
        #[command(subcommand)]
        action: LinsysAction,
    },
    /// Point and subspace counts.
    Count {
        #[command(subcommand)]
        action: CountAction,
    },
    /// Run every check listed in a TOML or JSON config.
    Report {
        #[arg(long)]
        config: PathBuf,
    },
    /// List check ids and their parameters.
    List,
}

#[derive(Subcommand)]
enum MapAction {
    /// Print the components of ψ.
    Show {
        #[command(flatten)]
        params: Params,
    },
    /// Apply ψ to a point given as a JSON list of element encodings.
    Apply {
        #[arg(long)]
        point: String,
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Subcommand)]
enum LinsysAction {
    Dim {
        #[command(flatten)]
        params: Params,
    },
    Serre {
        #[command(flatten)]
        params: Params,
    },
    Vanishing {
        #[command(flatten)]
        params: Params,
    },
    Reducibility {
        #[command(flatten)]
        params: Params,
    },
    /// Imposed-conditions experiment; the points file is a JSON list of {"point": [...], "mult": k}.
    Appendix {
        #[arg(long)]
        points_file: Option<PathBuf>,
        #[command(flatten)]
        params: Params,
    },
}

#[derive(Subcommand)]
enum CountAction {
    Strata {
        #[command(flatten)]
        params: Params,
    },
    Flags {
        #[command(flatten)]
        params: Params,
    },
    B2 {
        #[command(flatten)]
        params: Params,
    },
}

/// Usage problems map to exit code 2.
struct Usage(anyhow::Error);

impl<E: Into<anyhow::Error>> From<E> for Usage {
    fn from(e: E) -> Self {
        Usage(e.into())
    }
}

impl Params {
    fn q(&self) -> anyhow::Result<u32> {
        let from_pe = match (self.p, self.e) {
            (Some(p), e) => {
                let q = p.checked_pow(e.unwrap_or(1)).ok_or_else(|| anyhow!("p^e overflows"))?;
                match factor_prime_power(q as u64) {
                    Some((pp, _)) if pp == p => Some(q),
                    _ => bail!("--p {p} is not prime"),
                }
            }
            (None, Some(_)) => bail!("--e needs --p"),
            (None, None) => None,
        };
        match (self.q, from_pe) {
            (Some(q), Some(x)) if q != x => bail!("--q {q} disagrees with --p/--e ({x})"),
            (Some(q), _) => Ok(q),
            (None, Some(x)) => Ok(x),
            (None, None) => bail!("this command needs --q or --p/--e"),
        }
    }

    fn extras(&self) -> anyhow::Result<Map<String, Value>> {
        let mut m = Map::new();
        for kv in &self.extra {
            let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--param {kv:?} is not KEY=JSON"))?;
            let v: Value = serde_json::from_str(v).with_context(|| format!("--param {k}: value is not JSON"))?;
            m.insert(k.to_string(), v);
        }
        Ok(m)
    }

    /// Parameters for one check, with defaults for flags that were not given.
    fn for_spec(&self, spec: &CheckSpec) -> anyhow::Result<Map<String, Value>> {
        let extras = self.extras()?;
        let n = self.n.unwrap_or(2);
        let mut out = Map::new();
        for &key in spec.required.iter().chain(spec.optional) {
            if let Some(v) = extras.get(key) {
                out.insert(key.into(), v.clone());
                continue;
            }
            let optional = spec.optional.contains(&key);
            let v: Option<u32> = match (spec.id, key) {
                ("lattice.discrepancy", "m") => Some(self.m.unwrap_or(1)),
                ("lattice.discrepancy", "d") => Some(self.d.unwrap_or(2)),
                (_, "q") => Some(self.q()?),
                (_, "p") => self.p,
                (_, "n") => Some(n),
                ("cremona.omega" | "cremona.indeterminacy" | "moore.strata-dual" | "counting.strata", "m") => {
                    Some(self.m.unwrap_or(n + 1))
                }
                (_, "m") if optional => self.m,
                (_, "m") => Some(self.m.unwrap_or((n + 1).min(3))),
                (_, "c") => Some(self.c.unwrap_or(2)),
                (_, "j") => Some(self.j.unwrap_or(1)),
                (_, "d") => Some(self.d.unwrap_or(3)),
                (_, "s") => Some(self.s.unwrap_or(self.q()? + 1)),
                (_, "f" | "g" | "points") if optional => None,
                (id, k) => bail!("{id} needs --param {k}=<JSON>"),
            };
            if let Some(v) = v {
                out.insert(key.into(), v.into());
            }
        }
        Ok(out)
    }
}

fn resolve_targets(target: &str, check: Option<&str>, params: &Params) -> anyhow::Result<Vec<&'static CheckSpec>> {
    let has_maps = params.extra.iter().any(|kv| kv.starts_with("f="));
    let runnable = |s: &&CheckSpec| s.id != "cremona.proj-equal" || has_maps;
    if target == "all" {
        return Ok(CHECKS.iter().filter(runnable).collect());
    }
    let modules = ["moore", "cremona", "foliation", "lattice", "linsys", "counting"];
    if modules.contains(&target) {
        let prefix = format!("{target}.");
        let found: Vec<_> = match check {
            Some(c) => CHECKS.iter().filter(|s| s.id == format!("{prefix}{c}")).collect(),
            None => CHECKS.iter().filter(|s| s.id.starts_with(&prefix)).filter(runnable).collect(),
        };
        if found.is_empty() {
            bail!("no check {:?} in module {target}; valid ids: {}", check.unwrap_or(""), ids());
        }
        return Ok(found);
    }
    if let Some(s) = CHECKS.iter().find(|s| s.id == target) {
        return Ok(vec![s]);
    }
    let suffix: Vec<_> = CHECKS.iter().filter(|s| s.id.ends_with(&format!(".{target}"))).collect();
    match suffix.len() {
        1 => Ok(suffix),
        0 => bail!("unknown target {target:?}; use all, a module ({}) or a check id: {}", modules.join(", "), ids()),
        _ => bail!("target {target:?} is ambiguous; valid ids: {}", ids()),
    }
}

fn ids() -> String {
    CHECKS.iter().map(|s| s.id).collect::<Vec<_>>().join(", ")
}

fn requests_for(specs: &[&CheckSpec], params: &Params) -> anyhow::Result<Vec<CheckRequest>> {
    specs
        .iter()
        .map(|s| Ok(CheckRequest { id: s.id.into(), params: params.for_spec(s)?, expect: None, criterion: None }))
        .collect()
}

fn emit(out: &OutputArgs, doc: &Value, csv_rows: Option<(Vec<&str>, Vec<Vec<String>>)>) -> Result<(), Usage> {
    let mut doc = doc.clone();
    if out.omit_timing {
        strip_timing(&mut doc);
    }
    let text = match (out.format, csv_rows) {
        (Format::Csv, Some((header, rows))) => {
            let mut w = csv::Writer::from_writer(Vec::new());
            w.write_record(&header)?;
            for r in rows {
                w.write_record(&r)?;
            }
            String::from_utf8(w.into_inner().map_err(|e| anyhow!("{e}"))?)?
        }
        (Format::Csv, None) => return Err(Usage(anyhow!("--format csv is only available for count commands"))),
        (Format::Json, _) => serde_json::to_string_pretty(&doc)? + "\n",
    };
    match &out.out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display()))?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

/// Builds a CSV header and rows from the reports of a count command.
type TableFn = dyn Fn(&[CheckReport]) -> (Vec<&'static str>, Vec<Vec<String>>);

fn run_requests(out: &OutputArgs, reqs: &[CheckRequest], csv: Option<&TableFn>) -> Result<i32, Usage> {
    let budget = parse_budget(out.budget.as_deref())?;
    let reports = run_all(reqs, &budget, out.jobs)?;
    let rows = csv.map(|f| f(&reports));
    emit(out, &bundle(&reports), rows)?;
    Ok(exit_code(&reports))
}

fn single(id: &str, params: &Params) -> anyhow::Result<Vec<CheckRequest>> {
    let spec = CHECKS.iter().find(|s| s.id == id).expect("registered id");
    requests_for(&[spec], params)
}

fn data_str(r: &CheckReport, key: &str) -> String {
    match r.data.get(key) {
        Some(Value::String(s)) => s.clone(),
        Some(v) => v.to_string(),
        None => String::new(),
    }
}

fn real_main(cli: Cli) -> Result<i32, Usage> {
    let out = &cli.out;
    match &cli.command {
        Command::Verify { target, check, params } => {
            let specs = resolve_targets(target, check.as_deref(), params)?;
            run_requests(out, &requests_for(&specs, params)?, None)
        }
        Command::Report { config } => run_requests(out, &load_config(config)?, None),
        Command::List => {
            let list: Vec<Value> = CHECKS
                .iter()
                .map(|s| {
                    serde_json::json!({"id": s.id, "required": s.required, "optional": s.optional, "example": serde_json::from_str::<Value>(s.example).unwrap_or(Value::Null)})
                })
                .collect();
            emit(out, &Value::Array(list), None)?;
            Ok(0)
        }
        Command::Map { action } => {
            let budget = parse_budget(out.budget.as_deref())?;
            match action {
                MapAction::Show { params } => {
                    let n = params.n.unwrap_or(2) as usize;
                    let f = tower_for(params.q()?, 1, &budget).map_err(core_err)?;
                    let psi = psi_map(n, &f);
                    let doc = serde_json::json!({
                        "schema": drinfeld::SCHEMA,
                        "n": n,
                        "q": f.q(),
                        "tower": f.describe(),
                        "components": psi.components().iter().map(|c| c.text()).collect::<Vec<_>>(),
                    });
                    emit(out, &doc, None)?;
                    Ok(0)
                }
                MapAction::Apply { point, params } => {
                    let n = params.n.unwrap_or(2) as usize;
                    let q = params.q()?;
                    let f = tower_for(q, 1, &budget).map_err(core_err)?;
                    let ext = tower_for(q, params.m.unwrap_or(1), &budget).map_err(core_err)?;
                    let v: Value = serde_json::from_str(point).context("--point is not JSON")?;
                    let coords = v.as_array().ok_or_else(|| anyhow!("--point must be a JSON list"))?;
                    if coords.len() != n + 1 {
                        return Err(Usage(anyhow!("--point needs {} coordinates", n + 1)));
                    }
                    let pt = coords.iter().map(|c| ext.decode(c)).collect::<Result<Vec<_>, _>>().map_err(core_err)?;
                    let psi = psi_map(n, &f);
                    let (image, code) = match psi.apply(&ext, &pt) {
                        Ok(img) => (point_json(&ext, &img), 0),
                        Err(Error::Indeterminacy { .. }) => (Value::Null, 1),
                        Err(e) => return Err(core_err(e)),
                    };
                    let doc = serde_json::json!({
                        "schema": drinfeld::SCHEMA,
                        "tower": ext.describe(),
                        "point": point_json(&ext, &pt),
                        "image": image,
                        "indeterminate": code == 1,
                    });
                    emit(out, &doc, None)?;
                    Ok(code)
                }
            }
        }
        Command::Linsys { action } => match action {
            LinsysAction::Dim { params } => {
                let p = Params { n: Some(params.n.unwrap_or(2)), ..params.clone() };
                run_requests(out, &single("linsys.en-dimension", &p)?, None)
            }
            LinsysAction::Serre { params } => run_requests(out, &single("linsys.serre", params)?, None),
            LinsysAction::Vanishing { params } => run_requests(out, &single("linsys.vanishing", params)?, None),
            LinsysAction::Reducibility { params } => run_requests(out, &single("linsys.reducibility", params)?, None),
            LinsysAction::Appendix { points_file, params } => {
                let mut reqs = single("linsys.appendix", params)?;
                if let Some(path) = points_file {
                    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                    let pts: Value = serde_json::from_str(&text).context("points file is not JSON")?;
                    reqs[0].params.insert("points".into(), pts);
                }
                run_requests(out, &reqs, None)
            }
        },
        Command::Count { action } => match action {
            CountAction::Strata { params } => {
                let table = |rs: &[CheckReport]| {
                    let strata = rs[0].data.get("strata").and_then(Value::as_array).cloned().unwrap_or_default();
                    let rows = strata.iter().enumerate().map(|(i, c)| vec![i.to_string(), c.to_string()]).collect();
                    (vec!["stratum", "count"], rows)
                };
                run_requests(out, &single("counting.strata", params)?, Some(&table))
            }
            CountAction::Flags { params } => {
                let table = |rs: &[CheckReport]| {
                    let r = &rs[0];
                    let row = ["flags", "graph_closure", "blowup_points"].iter().map(|k| data_str(r, k)).collect();
                    (vec!["flags", "graph_closure", "blowup_points"], vec![row])
                };
                run_requests(out, &single("counting.flags", params)?, Some(&table))
            }
            CountAction::B2 { params } => {
                let table = |rs: &[CheckReport]| {
                    let r = &rs[0];
                    let row = ["points", "lines", "b2"].iter().map(|k| data_str(r, k)).collect();
                    (vec!["points", "lines", "b2"], vec![row])
                };
                run_requests(out, &single("counting.b2", params)?, Some(&table))
            }
        },
    }
}

fn core_err(e: Error) -> Usage {
    Usage(anyhow!("{e}"))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match real_main(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(Usage(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
