//! CSV writers for convergence tables and field dumps.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::analysis::{ConvergenceTable, Rate};
use crate::discretization::{Point, Shape};
use crate::error::{Error, Result};
use crate::hdg::{recover_unscaled, HdgSolution};
use crate::mesh::Mesh;
use crate::physics::ManufacturedCase;

pub fn format_error(e: f64) -> String {
    format!("{e:.3e}")
}

pub fn format_rate(r: Rate) -> String {
    match r {
        Rate::Absent => String::new(),
        Rate::Exact => "exact".to_string(),
        Rate::Value(v) => format!("{v:.3}"),
    }
}

pub fn write_table<W: Write>(table: &ConvergenceTable, mut w: W) -> Result<()> {
    if table.rows.is_empty() {
        return Err(Error::InvalidParameter(
            "cannot write an empty table".into(),
        ));
    }
    let mut header = vec!["k".to_string(), "h".to_string()];
    for f in &table.fields {
        header.push(format!("err_{}", f.label()));
        header.push(format!("rate_{}", f.label()));
    }
    writeln!(w, "{}", header.join(","))?;
    for row in &table.rows {
        let mut rec = vec![row.k.to_string(), format!("{:.6}", row.h)];
        match &row.errors {
            Ok(errs) => {
                for (e, r) in errs.iter().zip(&row.rates) {
                    rec.push(format_error(*e));
                    rec.push(format_rate(*r));
                }
            }
            Err(_) => {
                for _ in &table.fields {
                    rec.push("FAILED".to_string());
                    rec.push(String::new());
                }
            }
        }
        writeln!(w, "{}", rec.join(","))?;
    }
    Ok(())
}

pub fn emit_table(table: &ConvergenceTable, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_table(table, &mut w)?;
    w.flush()?;
    Ok(())
}

/// Cell-centred sample points in reference coordinates, `density` per direction.
/// Density 1 gives the reference centroid.
pub fn sampling_points(shape: Shape, density: usize) -> Vec<Point> {
    let s = density.max(1);
    let c = |i: usize| -1.0 + 2.0 * (i as f64 + 0.5) / s as f64;
    let mut out = Vec::new();
    match shape {
        Shape::Segment => (0..s).for_each(|i| out.push([c(i), 0.0, 0.0])),
        Shape::Quad => {
            for j in 0..s {
                for i in 0..s {
                    out.push([c(i), c(j), 0.0]);
                }
            }
        }
        Shape::Hex => {
            for l in 0..s {
                for j in 0..s {
                    for i in 0..s {
                        out.push([c(i), c(j), c(l)]);
                    }
                }
            }
        }
        Shape::Tri => {
            let t = s as f64;
            for j in 0..s {
                for i in 0..s - j {
                    let (x, y) = (i as f64, j as f64);
                    out.push([(x + 1.0 / 3.0) / t, (y + 1.0 / 3.0) / t, 0.0]);
                    if i + j + 1 < s {
                        out.push([(x + 2.0 / 3.0) / t, (y + 2.0 / 3.0) / t, 0.0]);
                    }
                }
            }
        }
    }
    out
}

pub fn write_fields<W: Write>(
    mesh: &Mesh,
    case: &ManufacturedCase,
    sol: &HdgSolution,
    density: usize,
    mut w: W,
) -> Result<()> {
    let dim = mesh.dim;
    writeln!(
        w,
        "# {} k={} n={}: {} cell-centred samples per direction per element; ptilde is 0 on the one-phase region",
        case.name, sol.info.k, mesh.n, density
    )?;
    let axes = ["x", "y", "z"];
    let mut header: Vec<String> = axes[..dim].iter().map(|s| s.to_string()).collect();
    header.push("p".into());
    header.extend((1..=dim).map(|d| format!("u{d}")));
    header.push("ptilde".into());
    writeln!(w, "{}", header.join(","))?;
    let refs = sampling_points(mesh.shape, density);
    for (e, el) in mesh.elements.iter().enumerate() {
        let pts: Vec<Point> = refs.iter().map(|r| el.map.map(r)).collect();
        let table = sol.space.element.basis_at(&refs);
        let unscaled = recover_unscaled(mesh, case, sol, e, &pts);
        for (q, x) in pts.iter().enumerate() {
            let (p, u) = sol.eval_with_basis(e, table.row(q));
            let mut rec: Vec<String> = x[..dim].iter().map(|v| format!("{v:.12e}")).collect();
            rec.push(format!("{p:.12e}"));
            rec.extend(u[..dim].iter().map(|v| format!("{v:.12e}")));
            rec.push(format!("{:.12e}", unscaled[q].0));
            writeln!(w, "{}", rec.join(","))?;
        }
    }
    Ok(())
}

pub fn emit_fields(
    mesh: &Mesh,
    case: &ManufacturedCase,
    sol: &HdgSolution,
    density: usize,
    path: &Path,
) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    write_fields(mesh, case, sol, density, &mut w)?;
    w.flush()?;
    Ok(())
}
