use std::fs;
use std::path::{Path, PathBuf};

use clap::Args;
use serde::Serialize;
use serde_json::{json, Value};

use crate::criteria::EULER_LAGRANGE_REL_L2;
use crate::error::{CliError, CliResult};
use crate::output::{sidecar_path, write_json, Cell, Format, Table};

#[derive(Debug, Clone, Args, Serialize)]
pub struct ReportArgs {
    /// Directory holding earlier outputs and their sidecars.
    #[arg(long)]
    pub dir: PathBuf,
    /// Manifest table to write.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// ||a - b||_2 / ||b||_2 over matching samples.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    let num: f64 = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum();
    let den: f64 = b.iter().map(|y| y * y).sum();
    (num / den).sqrt()
}

/// Reads the named columns of a table written by this tool, skipping the
/// footer rows.
pub fn read_columns(path: &Path, names: &[&str]) -> CliResult<Vec<Vec<f64>>> {
    let wrap = |source| CliError::Csv {
        path: path.display().to_string(),
        source,
    };
    let delim = if path.extension().is_some_and(|e| e == "tsv") { b'\t' } else { b',' };
    let mut r = csv::ReaderBuilder::new()
        .delimiter(delim)
        .flexible(true)
        .from_path(path)
        .map_err(wrap)?;
    let header = r.headers().map_err(wrap)?.clone();
    let idx = names
        .iter()
        .map(|n| {
            header
                .iter()
                .position(|h| h == *n)
                .ok_or_else(|| CliError::config(format!("{}: no column `{n}`", path.display())))
        })
        .collect::<CliResult<Vec<_>>>()?;
    let mut cols = vec![Vec::new(); names.len()];
    for rec in r.records() {
        let rec = rec.map_err(wrap)?;
        if rec.len() != header.len() {
            break;
        }
        for (col, &i) in cols.iter_mut().zip(&idx) {
            let v = rec[i]
                .parse()
                .map_err(|_| CliError::config(format!("{}: `{}` is not a number", path.display(), &rec[i])))?;
            col.push(v);
        }
    }
    Ok(cols)
}

struct Sidecar {
    path: PathBuf,
    value: Value,
}

impl Sidecar {
    fn artifact(&self) -> String {
        self.value["outputs"][0].as_str().unwrap_or_default().to_string()
    }

    fn burgers_mode(&self) -> Option<&str> {
        (self.value["command"] == "burgers").then(|| self.value["config"]["mode"].as_str())?
    }
}

fn load_sidecars(dir: &Path) -> CliResult<Vec<Sidecar>> {
    let mut paths: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| CliError::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    paths.sort();
    let mut out = Vec::new();
    for path in paths {
        let text = fs::read_to_string(&path).map_err(|e| CliError::io(&path, e))?;
        let Ok(value) = serde_json::from_str::<Value>(&text) else {
            continue;
        };
        if value["tool"] == "turbcloud" {
            out.push(Sidecar { path, value });
        }
    }
    Ok(out)
}

/// Eulerian against Lagrangian ensemble-mean gas curves for every N_p both
/// sweeps share.
fn euler_lagrange(sidecars: &[Sidecar]) -> CliResult<Vec<Value>> {
    let find = |mode| sidecars.iter().find(|s| s.burgers_mode() == Some(mode));
    let (Some(e), Some(l)) = (find("eulerian"), find("lagrangian")) else {
        return Ok(Vec::new());
    };
    let nps = |s: &Sidecar| -> Vec<u64> {
        s.value["summary"]["deviation"]
            .as_array()
            .map(|a| a.iter().filter_map(|d| d["np"].as_u64()).collect())
            .unwrap_or_default()
    };
    let (ne, nl) = (nps(e), nps(l));
    let mut claims = Vec::new();
    for np in ne.iter().filter(|n| nl.contains(n)) {
        let column = |s: &Sidecar, n: usize| {
            let name = if n == 1 { "mean_gas_velocity".to_string() } else { format!("gas_np{np}") };
            read_columns(Path::new(&s.artifact()), &[&name]).map(|mut c| c.remove(0))
        };
        let ge = column(e, ne.len())?;
        let gl = column(l, nl.len())?;
        if ge.len() != gl.len() {
            continue;
        }
        let rel = relative_l2(&ge, &gl);
        claims.push(json!({
            "claim": format!("Eulerian moments reproduce the Lagrangian ensemble at Np = {np}"),
            "command": "burgers",
            "artifact": format!("{} vs {}", e.artifact(), l.artifact()),
            "metric": "relative_l2",
            "value": rel,
            "holds": rel < EULER_LAGRANGE_REL_L2,
        }));
    }
    Ok(claims)
}

pub fn run(args: ReportArgs) -> CliResult<()> {
    let sidecars = load_sidecars(&args.dir)?;
    let mut entries = Vec::new();
    for s in &sidecars {
        let command = s.value["command"].as_str().unwrap_or_default();
        for c in s.value["claims"].as_array().into_iter().flatten() {
            let mut c = c.clone();
            c["command"] = json!(command);
            c["artifact"] = json!(s.artifact());
            entries.push(c);
        }
        if s.value["claims"].as_array().is_none_or(|a| a.is_empty()) {
            entries.push(json!({
                "claim": "",
                "command": command,
                "artifact": s.artifact(),
                "metric": "",
                "value": null,
                "holds": null,
                "sidecar": s.path.display().to_string(),
            }));
        }
    }
    entries.extend(euler_lagrange(&sidecars)?);

    let mut t = Table::new(["claim", "command", "artifact", "metric", "value", "holds"]);
    for e in &entries {
        let text = |k: &str| Cell::S(e[k].as_str().unwrap_or_default().to_string());
        t.push(vec![
            text("claim"),
            text("command"),
            text("artifact"),
            text("metric"),
            e["value"].as_f64().map_or(Cell::Empty, Cell::F),
            e["holds"].as_bool().map_or(Cell::Empty, |b| Cell::S(b.to_string())),
        ]);
    }
    t.write(&args.out, args.format)?;
    let record = json!({
        "tool": "turbcloud-report",
        "version": env!("CARGO_PKG_VERSION"),
        "dir": args.dir.display().to_string(),
        "entries": entries,
    });
    write_json(&sidecar_path(&args.out), &record)
}
