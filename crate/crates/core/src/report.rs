//! CSV emission of paired theory/empirical sweep results, with the run
//! config embedded as a comment block so a file fully describes its run.

use std::io::Write;

use crate::config::ProblemConfig;
use crate::harness::SweepPoint;
use crate::{Error, Result};

const COLUMNS: &[&str] = &[
    "lambda",
    "theory_mse",
    "emp_mse_mean",
    "emp_mse_stderr",
    "theory_phi_on",
    "emp_phi_on_mean",
    "emp_phi_on_stderr",
    "theory_phi_off",
    "emp_phi_off_mean",
    "emp_phi_off_stderr",
    "theory_eer",
    "emp_eer_mean",
    "emp_eer_stderr",
    "theory_cosine",
    "emp_cosine_mean",
    "emp_cosine_stderr",
    "alpha_star",
    "beta_star",
    "chi_star",
    "mu_star",
    "trials",
    "nonconverged_count",
];

fn fmt(v: f64) -> String {
    // shortest round-trip scientific representation
    format!("{v:e}")
}

fn opt(v: Option<f64>) -> String {
    v.map(fmt).unwrap_or_default()
}

/// Render sweep results as CSV text. The config rides along as `#`-prefixed
/// comment lines above the header row.
pub fn render_csv(config: &ProblemConfig, points: &[SweepPoint]) -> Result<String> {
    if points.is_empty() {
        return Err(Error::invalid("no sweep results to emit"));
    }
    let mut out = String::new();
    out.push_str("# corrlasso sweep results\n# config:\n");
    for line in config.to_toml().lines() {
        out.push_str("#   ");
        out.push_str(line);
        out.push('\n');
    }
    out.push_str(&COLUMNS.join(","));
    out.push('\n');

    for p in points {
        if let Some(err) = &p.error {
            out.push_str(&format!(
                "# point lambda={} failed: {}\n",
                fmt(p.lambda),
                err
            ));
            continue;
        }
        let th = p.theory.as_ref();
        let emp = p.empirical.as_ref();
        let fields: Vec<String> = vec![
            fmt(p.lambda),
            opt(th.map(|t| t.mse)),
            opt(emp.map(|e| e.mse.mean)),
            opt(emp.map(|e| e.mse.stderr)),
            opt(th.map(|t| t.phi_on)),
            opt(emp.map(|e| e.phi_on.mean)),
            opt(emp.map(|e| e.phi_on.stderr)),
            opt(th.map(|t| t.phi_off)),
            opt(emp.map(|e| e.phi_off.mean)),
            opt(emp.map(|e| e.phi_off.stderr)),
            opt(th.map(|t| t.eer)),
            opt(emp.map(|e| e.eer.mean)),
            opt(emp.map(|e| e.eer.stderr)),
            opt(th.and_then(|t| t.cosine)),
            opt(emp.and_then(|e| e.cosine.map(|c| c.mean))),
            opt(emp.and_then(|e| e.cosine.map(|c| c.stderr))),
            opt(th.map(|t| t.saddle.alpha_star)),
            opt(th.map(|t| t.saddle.beta_star)),
            opt(th.map(|t| t.saddle.chi_star)),
            opt(th.map(|t| t.saddle.mu_star)),
            emp.map(|e| e.trial_count.to_string()).unwrap_or_default(),
            emp.map(|e| e.nonconverged_count.to_string())
                .unwrap_or_default(),
        ];
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    Ok(out)
}

/// Write the CSV to `path`.
pub fn emit_csv(config: &ProblemConfig, points: &[SweepPoint], path: &str) -> Result<()> {
    let text = render_csv(config, points)?;
    let mut file = std::fs::File::create(path).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })?;
    file.write_all(text.as_bytes()).map_err(|source| Error::Io {
        path: path.to_string(),
        source,
    })
}
