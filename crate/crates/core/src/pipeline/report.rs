use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::run::{Manifest, VerifyArtifact};
use super::PipelineError;
use crate::partition::IdentityReport;
use crate::quadrature::MomentSet;

/// Names of the tables written by [`report_render`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RenderedTables {
    pub files: Vec<String>,
}

fn load<T: for<'de> Deserialize<'de>>(dir: &Path, file: &str) -> Result<T, PipelineError> {
    let bytes = fs::read(dir.join(file)).map_err(|_| PipelineError::MissingArtifact(file.to_string()))?;
    Ok(serde_json::from_slice(&bytes)?)
}

fn opt(v: Option<f64>) -> String {
    v.map(|v| format!("{v:e}")).unwrap_or_default()
}

/// Writes the summary tables for the artifacts listed in `dir/manifest.json`.
pub fn report_render(dir: &Path) -> Result<RenderedTables, PipelineError> {
    let manifest: Manifest = load(dir, "manifest.json")?;

    let mut identities = String::from("identity,params,residual,pass\n");
    for a in manifest.of_kind("identities") {
        let rep: IdentityReport = load(dir, &a.file)?;
        identities.push_str(rep.to_csv().split_once('\n').map_or("", |(_, rest)| rest));
    }

    let mut z_table = String::from("k,z_k,z_err,predicted_theta_k\n");
    let mut moment_set: Option<MomentSet> = None;
    for a in manifest.of_kind("moments") {
        let ms: MomentSet = load(dir, &a.file)?;
        let sgn = if ms.m.is_multiple_of(2) { -1.0 } else { 1.0 };
        for (k, (&z, &e)) in ms.z.iter().zip(&ms.z_err).enumerate() {
            z_table.push_str(&format!("{k},{z:e},{e:e},{:e}\n", sgn * z));
        }
        moment_set = Some(ms);
    }

    let mut remainders = String::from("x,y,d_max,r_1,abs_r_sum,max_normalized,argmax_d,max_normalized_class_one,two_way_agree\n");
    let mut bias = String::from("x,k,s_k,t_k,raw_bias,observed,observed_squarefree,predicted,ratio\n");
    let mut parity = String::from("x,mu_sum,predicted_mu_sum,lambda_sum,parity_normalized,square_divisible_entries,hooley\n");
    let mut verifies: Vec<VerifyArtifact> = manifest
        .of_kind("verify")
        .map(|a| load(dir, &a.file))
        .collect::<Result<_, _>>()?;
    verifies.sort_by_key(|v| v.x);
    let k_max = verifies
        .iter()
        .map(|v| v.moments.rows.len())
        .max()
        .or(moment_set.as_ref().map(|m| m.z.len().saturating_sub(1)))
        .unwrap_or(0);
    let mut series = String::from("x");
    for k in 1..=k_max {
        series.push_str(&format!(",t_{k}"));
    }
    series.push('\n');
    for v in &verifies {
        let rem = &v.remainder;
        remainders.push_str(&format!(
            "{},{},{},{:e},{:e},{:e},{},{},{}\n",
            v.x,
            v.y,
            rem.d_max,
            v.r_1,
            rem.abs_r_sum,
            rem.max_normalized,
            rem.argmax_d,
            opt(v.max_normalized_class_one),
            rem.two_way_agree
        ));
        let m = &v.moments;
        for r in &m.rows {
            bias.push_str(&format!(
                "{},{},{:e},{:e},{:e},{:e},{:e},{},{}\n",
                v.x,
                r.k,
                r.s_k,
                r.t_k,
                r.raw_bias,
                r.excess_bias,
                r.excess_bias_squarefree,
                opt(r.predicted),
                opt(r.ratio)
            ));
        }
        parity.push_str(&format!(
            "{},{:e},{},{:e},{:e},{},{}\n",
            v.x,
            m.mu_sum,
            opt(m.predicted_mu_sum),
            m.lambda_sum,
            m.parity_normalized,
            m.square_divisible_entries,
            opt(v.hooley)
        ));
        series.push_str(&v.x.to_string());
        for k in 1..=k_max {
            let t = m.row(k as u32).map(|r| format!("{:e}", r.t_k)).unwrap_or_default();
            series.push_str(&format!(",{t}"));
        }
        series.push('\n');
    }

    let tables = [
        ("table_identities.csv", identities),
        ("table_z_moments.csv", z_table),
        ("table_remainders.csv", remainders),
        ("table_bias.csv", bias),
        ("table_parity.csv", parity),
        ("series_t_k.csv", series),
    ];
    let mut files = Vec::new();
    for (name, text) in tables {
        fs::write(dir.join(name), text)?;
        files.push(name.to_string());
    }
    Ok(RenderedTables { files })
}
