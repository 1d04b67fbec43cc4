//! Legacy ASCII VTK snapshot of a quad mesh.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;
use crate::mesh::Mesh;

/// Writes the mesh with nodal `point_data` and per-element `cell_data` scalars.
pub fn write_snapshot(path: &Path, mesh: &Mesh, point_data: &[(&str, &[f64])], cell_data: &[(&str, &[f64])]) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "mtpgd snapshot")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", mesh.n_nodes())?;
    for p in &mesh.nodes {
        writeln!(w, "{} {} 0", p[0], p[1])?;
    }
    writeln!(w, "CELLS {} {}", mesh.n_elements(), 5 * mesh.n_elements())?;
    for el in &mesh.elements {
        writeln!(w, "4 {} {} {} {}", el[0], el[1], el[2], el[3])?;
    }
    writeln!(w, "CELL_TYPES {}", mesh.n_elements())?;
    for _ in &mesh.elements {
        writeln!(w, "9")?;
    }
    if !point_data.is_empty() {
        writeln!(w, "POINT_DATA {}", mesh.n_nodes())?;
        for (name, vals) in point_data {
            writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
            for v in vals.iter() {
                writeln!(w, "{v}")?;
            }
        }
    }
    if !cell_data.is_empty() {
        writeln!(w, "CELL_DATA {}", mesh.n_elements())?;
        for (name, vals) in cell_data {
            writeln!(w, "SCALARS {name} double 1\nLOOKUP_TABLE default")?;
            for v in vals.iter() {
                writeln!(w, "{v}")?;
            }
        }
    }
    w.flush()?;
    Ok(())
}
