//! Tensor files, report files, digests, and report rendering.
//!
//! A tensor file is a single JSON document with the dims triple and four
//! real component arrays indexed [slice][row][col]. Numbers are written in
//! shortest-exact decimal form, so write followed by read reproduces every
//! component bitwise.

use crate::perturb::PerturbReport;
use crate::qtensor::QTensor;
use crate::{Error, Quat, Result};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TensorFile {
    pub dims: [usize; 3],
    pub w: Vec<Vec<Vec<f64>>>,
    pub x: Vec<Vec<Vec<f64>>>,
    pub y: Vec<Vec<Vec<f64>>>,
    pub z: Vec<Vec<Vec<f64>>>,
}

impl TensorFile {
    pub fn from_tensor(a: &QTensor) -> TensorFile {
        let (n1, n2, n3) = a.dims();
        let comp = |f: fn(Quat) -> f64| -> Vec<Vec<Vec<f64>>> {
            (0..n3)
                .map(|s| {
                    (0..n1)
                        .map(|i| (0..n2).map(|j| f(a.get(i, j, s))).collect())
                        .collect()
                })
                .collect()
        };
        TensorFile {
            dims: [n1, n2, n3],
            w: comp(|q| q.w),
            x: comp(|q| q.x),
            y: comp(|q| q.y),
            z: comp(|q| q.z),
        }
    }

    pub fn to_tensor(&self, origin: &str) -> Result<QTensor> {
        let [n1, n2, n3] = self.dims;
        if n1 == 0 || n2 == 0 || n3 == 0 {
            return Err(Error::Shape {
                path: origin.into(),
                detail: format!("dims [{n1}, {n2}, {n3}] must all be positive"),
            });
        }
        for (name, arr) in [("w", &self.w), ("x", &self.x), ("y", &self.y), ("z", &self.z)] {
            if arr.len() != n3 {
                return Err(Error::Shape {
                    path: origin.into(),
                    detail: format!("component {name} has {} slices, dims say {n3}", arr.len()),
                });
            }
            for (s, slice) in arr.iter().enumerate() {
                if slice.len() != n1 || slice.iter().any(|row| row.len() != n2) {
                    return Err(Error::Shape {
                        path: origin.into(),
                        detail: format!("component {name} slice {s} is not {n1}x{n2}"),
                    });
                }
            }
        }
        Ok(QTensor::from_fn(n1, n2, n3, |i, j, s| {
            Quat::new(self.w[s][i][j], self.x[s][i][j], self.y[s][i][j], self.z[s][i][j])
        }))
    }
}

pub fn read_tensor(path: impl AsRef<Path>) -> Result<QTensor> {
    let path = path.as_ref();
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    let file: TensorFile = serde_json::from_str(&text).map_err(|e| Error::Parse {
        path: path.display().to_string(),
        detail: e.to_string(),
    })?;
    file.to_tensor(&path.display().to_string())
}

pub fn write_tensor(a: &QTensor, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    if !a.is_finite() {
        return Err(Error::Inconsistency(
            "refusing to write a tensor with non-finite components".into(),
        ));
    }
    let text = serde_json::to_string_pretty(&TensorFile::from_tensor(a))
        .expect("tensor files always serialize");
    fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Hex SHA-256 of the canonical (compact JSON) serialization.
pub fn tensor_digest(a: &QTensor) -> String {
    let canon = serde_json::to_string(&TensorFile::from_tensor(a))
        .expect("tensor files always serialize");
    let mut h = Sha256::new();
    h.update(canon.as_bytes());
    let out = h.finalize();
    out.iter().map(|b| format!("{b:02x}")).collect()
}

/// A perturbation report plus the context needed to audit it later: tool
/// version, input digests, and the tolerances in force. The flattened
/// serialization keeps the machine format a single flat key-value document.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportFile {
    pub tool_version: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp_unix: Option<u64>,
    pub digest_a: String,
    pub digest_e: String,
    pub atol: f64,
    pub rtol: f64,
    pub core_tol: f64,
    pub identity_tol: f64,
    #[serde(flatten)]
    pub report: PerturbReport,
}

pub fn render_report_json(file: &ReportFile) -> String {
    serde_json::to_string_pretty(file).expect("reports always serialize") + "\n"
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn pass_fail(b: bool) -> &'static str {
    if b {
        "PASS"
    } else {
        "FAIL"
    }
}

/// Human-readable rendering: hypotheses, norms, identities, then the bound
/// chain, mirroring how the worked example is usually laid out.
pub fn render_report_text(file: &ReportFile) -> String {
    let r = &file.report;
    let mut out = String::new();
    let mut line = |s: String| {
        out.push_str(&s);
        out.push('\n');
    };

    line(format!("QT-Drazin perturbation report (qtlab {})", file.tool_version));
    line(format!("input A  sha256:{}", file.digest_a));
    line(format!("input E  sha256:{}", file.digest_e));
    if let Some(ts) = file.timestamp_unix {
        line(format!("unix time {ts}"));
    }
    line(String::new());

    line("hypotheses".into());
    line(format!(
        "  core condition residual  {:.3e}  (tol {:.1e})  {}",
        r.cond_core_residual,
        file.core_tol,
        pass_fail(r.core_condition_holds)
    ));
    line(format!(
        "  rho(A^D * E)             {:.4}  (< 1 required)  {}",
        r.rho_value,
        pass_fail(r.rho_value < 1.0)
    ));
    line(format!("  trivial perturbation     {}", yes_no(r.trivial_perturbation)));
    line(format!("  hypotheses hold          {}", yes_no(r.hypotheses_hold)));
    line(String::new());

    line("norms".into());
    line(format!("  ||A||_s         = {:.4}", r.norm_a));
    line(format!("  ||A^D||_s       = {:.4}", r.norm_a_drazin));
    line(format!("  ||E||_s         = {:.4}", r.norm_e));
    line(format!("  ||A^D * E||_s   = {:.4}", r.norm_value));
    line(format!("  ||E * A^D||_s   = {:.4}", r.norm_ead));
    if let Some(v) = r.norm_b_drazin {
        line(format!("  ||B^D||_s       = {v:.4}"));
    }
    if let Some(v) = r.norm_diff {
        line(format!("  ||B^D - A^D||_s = {v:.4}"));
    }
    line(format!("  kappa           = {:.4}", r.kappa));
    line(String::new());

    line(format!("identities (relative residuals, verified at {:.1e})", file.identity_tol));
    let ids = [
        ("A*A^D = B*B^D              ", r.projector_residual),
        ("B^D - A^D = -B^D*E*A^D     ", r.diff_residual_left),
        ("B^D - A^D = -A^D*E*B^D     ", r.diff_residual_right),
        ("B^D = (I + A^D*E)^-1 * A^D ", r.resolvent_residual_left),
        ("B^D = A^D * (I + E*A^D)^-1 ", r.resolvent_residual_right),
    ];
    for (label, v) in ids {
        match v {
            Some(v) => line(format!("  {label} {v:.3e}")),
            None => line(format!("  {label} not computed")),
        }
    }
    if let Some(ok) = r.identities_verified {
        line(format!("  identities verified         {}", yes_no(ok)));
    }
    line(String::new());

    line("bound chain".into());
    match (r.delta_lhs, r.delta_rhs, r.delta_holds) {
        (Some(lhs), Some(rhs), Some(holds)) => {
            line(format!(
                "  delta: ||(I+A^D*E)^-1||_s = {:.4} <= 1/(1-||A^D*E||_s) = {:.4}  {}",
                lhs,
                rhs,
                if holds { "HOLDS" } else { "FAILS" }
            ));
        }
        _ => line("  delta: not applicable (||A^D*E||_s >= 1 or hypotheses failed)".into()),
    }
    match (r.bound_lower, r.norm_b_drazin, r.bound_upper) {
        (Some(lo), Some(nb), Some(hi)) => {
            line(format!("  {lo:.4} <= ||B^D||_s = {nb:.4} <= {hi:.4}"));
        }
        _ => line("  enclosure for ||B^D||_s not computed".into()),
    }
    if let (Some(lo), Some(hi)) = (r.bound_lower_swapped, r.bound_upper_swapped) {
        line(format!("  (E*A^D variant: {lo:.4} <= ||B^D||_s <= {hi:.4})"));
    }
    match (r.rel_error_measured, r.rel_error_bound) {
        (Some(m), Some(b)) => match r.rel_error_bound_kappa {
            Some(k) => line(format!(
                "  relative error {m:.4} <= {b:.4} <= {k:.4} (kappa form)"
            )),
            None => line(format!("  relative error {m:.4} <= {b:.4}")),
        },
        _ => line("  relative-error bound not computed".into()),
    }
    if let Some(ok) = r.bound_chain_holds {
        line(format!("  measured values inside enclosure  {}", yes_no(ok)));
    }
    out
}
