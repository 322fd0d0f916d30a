use std::io::Write;
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;

use crate::engine::BsdeSolution;
use crate::estimates::EstimateReport;
use crate::spectral::{ModeSet, VelocityField, WaveVector};

pub const FIELD_HEADER: &str = "kx,ky,re_ux,im_ux,re_uy,im_uy";

fn io_err(path: &Path, e: std::io::Error) -> String {
    format!("{}: {e}", path.display())
}

/// Serializes a field as one row per stored representative mode. Floats use
/// the shortest round-trip decimal, so write-then-read is bitwise lossless.
pub fn field_csv_string(field: &VelocityField) -> String {
    let modes = field.mode_set();
    let mut out = String::from(FIELD_HEADER);
    out.push('\n');
    for (k, c) in modes.representatives().iter().zip(field.coeffs()) {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            k.kx, k.ky, c[0].re, c[0].im, c[1].re, c[1].im
        ));
    }
    out
}

pub fn write_field_csv(field: &VelocityField, path: &Path) -> Result<(), String> {
    std::fs::write(path, field_csv_string(field)).map_err(|e| io_err(path, e))
}

/// Reads a field written by [`write_field_csv`]. The rows must enumerate
/// exactly the representatives of `modes`, in order.
pub fn read_field_csv(modes: &Arc<ModeSet>, path: &Path) -> Result<VelocityField, String> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(path, e))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == FIELD_HEADER => {}
        other => return Err(format!("{}: bad header {:?}", path.display(), other)),
    }
    let mut field = VelocityField::zero(modes);
    let mut count = 0usize;
    for (row, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 6 {
            return Err(format!("{}: row {}: expected 6 columns", path.display(), row + 1));
        }
        let num = |s: &str| -> Result<f64, String> {
            s.parse()
                .map_err(|_| format!("{}: row {}: bad number `{s}`", path.display(), row + 1))
        };
        let k = WaveVector::new(
            cols[0]
                .parse()
                .map_err(|_| format!("{}: row {}: bad kx", path.display(), row + 1))?,
            cols[1]
                .parse()
                .map_err(|_| format!("{}: row {}: bad ky", path.display(), row + 1))?,
        );
        let c = [
            Complex64::new(num(cols[2])?, num(cols[3])?),
            Complex64::new(num(cols[4])?, num(cols[5])?),
        ];
        field
            .set_coeff(k, c)
            .map_err(|e| format!("{}: row {}: {e}", path.display(), row + 1))?;
        count += 1;
    }
    if count != modes.len_pairs() {
        return Err(format!(
            "{}: {count} rows for a mode set with {} pairs",
            path.display(),
            modes.len_pairs()
        ));
    }
    Ok(field)
}

/// One node of a solve with stored fields: `M` rows per mode, grouped by a
/// leading `path` column.
pub fn write_solution_slice_csv(
    sol: &BsdeSolution,
    node: usize,
    path: &Path,
) -> Result<(), String> {
    let fields = sol
        .u_fields
        .as_ref()
        .ok_or("per-path fields were not stored")?;
    let file = std::fs::File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = std::io::BufWriter::new(file);
    (|| -> std::io::Result<()> {
        writeln!(out, "path,{FIELD_HEADER}")?;
        for p in 0..sol.paths {
            let field = &fields[node * sol.paths + p];
            for (k, c) in sol.modes.representatives().iter().zip(field.coeffs()) {
                writeln!(
                    out,
                    "{p},{},{},{},{},{},{}",
                    k.kx, k.ky, c[0].re, c[0].im, c[1].re, c[1].im
                )?;
            }
        }
        out.flush()
    })()
    .map_err(|e| io_err(path, e))
}

/// Per-node ensemble means of the recorded norms.
pub fn write_norms_csv(sol: &BsdeSolution, path: &Path) -> Result<(), String> {
    let mut out = String::from("node,t,mean_u_h_sq,mean_u_v_sq,mean_z_h_sq\n");
    for i in 0..=sol.grid.steps {
        let z = if i < sol.grid.steps {
            sol.mean_z_h_sq(i)
        } else {
            0.0
        };
        out.push_str(&format!(
            "{i},{},{},{},{z}\n",
            sol.grid.node(i),
            sol.mean_u_h_sq(i),
            sol.mean_u_v_sq(i)
        ));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

pub fn write_report_json(report: &EstimateReport, path: &Path) -> Result<(), String> {
    let text = serde_json::to_string_pretty(report).map_err(|e| e.to_string())?;
    std::fs::write(path, text).map_err(|e| io_err(path, e))
}

/// Per-sample sides and margins of an audit, one row per sample.
pub fn write_report_csv(report: &EstimateReport, path: &Path) -> Result<(), String> {
    let mut out = String::from("sample,lhs,rhs,margin\n");
    for (i, (l, r)) in report.lhs.iter().zip(&report.rhs).enumerate() {
        out.push_str(&format!("{i},{l},{r},{}\n", r - l));
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}

/// Generic two-column table, used for residual and comparison curves.
pub fn write_table_csv(
    header: &str,
    rows: &[Vec<f64>],
    path: &Path,
) -> Result<(), String> {
    let mut out = String::from(header);
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out).map_err(|e| io_err(path, e))
}
