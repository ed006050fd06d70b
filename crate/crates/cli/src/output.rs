//! CSV and plot-script emission.
//!
//! Every file opens with `# `-prefixed metadata lines (mode, tool version,
//! worker count, seed) so a result can be traced back to its run without
//! embedding anything time- or path-dependent — outputs are byte-identical
//! across repeated runs of the same configuration.

use pistonfilm_core::dynamics::{SimulationTrace, Snapshot};
use pistonfilm_core::geometry::{FilmMesh, ScalarField};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// Run-level facts recorded at the top of every output file.
#[derive(Debug, Clone)]
pub struct OutputMeta {
    pub mode: &'static str,
    pub workers: usize,
    pub seed: Option<u64>,
    /// Extra `# key: value` lines a mode wants to record.
    pub notes: Vec<String>,
}

impl OutputMeta {
    pub fn new(mode: &'static str, workers: usize, seed: Option<u64>) -> Self {
        Self { mode, workers, seed, notes: Vec::new() }
    }

    pub fn note(mut self, line: impl Into<String>) -> Self {
        self.notes.push(line.into());
        self
    }

    fn header(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# pistonfilm {} mode={}", env!("CARGO_PKG_VERSION"), self.mode);
        let _ = writeln!(s, "# workers: {}", self.workers);
        if let Some(seed) = self.seed {
            let _ = writeln!(s, "# seed: {seed}");
        }
        for note in &self.notes {
            let _ = writeln!(s, "# {note}");
        }
        s
    }
}

/// The declared stand-in status of the default inlet waveform, recorded
/// wherever a waveform-driven quantity is written.
pub const WAVEFORM_NOTE: &str =
    "inlet waveform: configured stand-in for valve-plate port timing, not measured pump data";

/// A CSV file under construction: header comments, one column row, data rows.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(meta: &OutputMeta, columns: &[&str]) -> Self {
        let mut text = meta.header();
        text.push_str(&columns.join(","));
        text.push('\n');
        Self { text }
    }

    /// Appends one row; values use shortest-roundtrip formatting, so full
    /// precision survives a parse back.
    pub fn row(&mut self, fields: &[CsvField]) {
        for (k, f) in fields.iter().enumerate() {
            if k > 0 {
                self.text.push(',');
            }
            match f {
                CsvField::Int(v) => {
                    let _ = write!(self.text, "{v}");
                }
                CsvField::Float(v) => {
                    let _ = write!(self.text, "{v}");
                }
                CsvField::Bool(v) => {
                    let _ = write!(self.text, "{v}");
                }
                CsvField::Text(v) => {
                    // Keep the grid intact: cells never contain commas.
                    self.text.push_str(&v.replace(',', ";"));
                }
            }
        }
        self.text.push('\n');
    }

    pub fn write(self, path: &Path) -> anyhow::Result<()> {
        std::fs::write(path, self.text)?;
        Ok(())
    }
}

pub enum CsvField {
    Int(i64),
    Float(f64),
    Bool(bool),
    Text(String),
}

impl From<usize> for CsvField {
    fn from(v: usize) -> Self {
        Self::Int(v as i64)
    }
}
impl From<f64> for CsvField {
    fn from(v: f64) -> Self {
        Self::Float(v)
    }
}
impl From<bool> for CsvField {
    fn from(v: bool) -> Self {
        Self::Bool(v)
    }
}
impl From<&str> for CsvField {
    fn from(v: &str) -> Self {
        Self::Text(v.to_string())
    }
}
impl From<String> for CsvField {
    fn from(v: String) -> Self {
        Self::Text(v)
    }
}

/// Writes a full-mesh nodal field as `i,j,theta,y,<name>` rows.
pub fn write_field(
    meta: &OutputMeta,
    mesh: &FilmMesh,
    field: &ScalarField,
    name: &str,
    path: &Path,
) -> anyhow::Result<()> {
    let mut csv = Csv::new(meta, &["i", "j", "theta", "y", name]);
    for j in 0..mesh.n_y {
        for i in 0..mesh.n_theta {
            csv.row(&[
                i.into(),
                j.into(),
                mesh.theta(i).into(),
                mesh.y(j).into(),
                field.at(i, j).into(),
            ]);
        }
    }
    csv.write(path)
}

/// Writes paired pressure/thickness fields of one snapshot.
pub fn write_snapshot(
    meta: &OutputMeta,
    mesh: &FilmMesh,
    snap: &Snapshot,
    path: &Path,
) -> anyhow::Result<()> {
    let meta = meta
        .clone()
        .note(format!("step: {}", snap.step))
        .note(format!("time: {}", snap.time))
        .note(format!("shaft_angle: {}", snap.shaft_angle));
    let mut csv = Csv::new(&meta, &["i", "j", "theta", "y", "pressure", "thickness"]);
    for j in 0..mesh.n_y {
        for i in 0..mesh.n_theta {
            csv.row(&[
                i.into(),
                j.into(),
                mesh.theta(i).into(),
                mesh.y(j).into(),
                snap.pressure.at(i, j).into(),
                snap.thickness.at(i, j).into(),
            ]);
        }
    }
    csv.write(path)
}

pub fn snapshot_path(dir: &Path, step: usize) -> PathBuf {
    dir.join(format!("snapshot_{step:05}.csv"))
}

/// Writes the per-step trace of a simulation.
pub fn write_trace(meta: &OutputMeta, trace: &SimulationTrace, path: &Path) -> anyhow::Result<()> {
    let meta = meta.clone().note(format!("dt: {}", trace.dt));
    let mut csv = Csv::new(
        &meta,
        &[
            "step", "time", "shaft_angle", "inlet_pressure", "e1", "e2", "e3", "e4", "v1", "v2",
            "v3", "v4", "force_residual", "picard_iterations", "converged", "pcg_iterations",
            "min_thickness",
        ],
    );
    for s in &trace.steps {
        csv.row(&[
            s.step.into(),
            s.time.into(),
            s.shaft_angle.into(),
            s.inlet_pressure.into(),
            s.e[0].into(),
            s.e[1].into(),
            s.e[2].into(),
            s.e[3].into(),
            s.e_rate[0].into(),
            s.e_rate[1].into(),
            s.e_rate[2].into(),
            s.e_rate[3].into(),
            s.force_residual.into(),
            s.picard_iterations.into(),
            s.converged.into(),
            s.pcg_iterations.into(),
            s.min_thickness.into(),
        ]);
    }
    csv.write(path)
}

/// Writes the oil wrench per step, split into pressure and shear parts.
pub fn write_forces(meta: &OutputMeta, trace: &SimulationTrace, path: &Path) -> anyhow::Result<()> {
    let mut csv = Csv::new(
        meta,
        &[
            "step", "time", "shaft_angle", "inlet_pressure", "fx_pressure", "fy_pressure",
            "fz_pressure", "mx_pressure", "my_pressure", "mz_pressure", "fx_shear", "fy_shear",
            "fz_shear", "mx_shear", "my_shear", "mz_shear",
        ],
    );
    for s in &trace.steps {
        let p = &s.wrench.pressure;
        let t = &s.wrench.shear;
        csv.row(&[
            s.step.into(),
            s.time.into(),
            s.shaft_angle.into(),
            s.inlet_pressure.into(),
            p.force[0].into(),
            p.force[1].into(),
            p.force[2].into(),
            p.moment[0].into(),
            p.moment[1].into(),
            p.moment[2].into(),
            t.force[0].into(),
            t.force[1].into(),
            t.force[2].into(),
            t.moment[0].into(),
            t.moment[1].into(),
            t.moment[2].into(),
        ]);
    }
    csv.write(path)
}

/// Gnuplot script drawing a nodal field CSV as a heat map.
pub fn field_plot_script(csv_name: &str, column: usize, title: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set view map\n\
         set xlabel 'theta (rad)'\n\
         set ylabel 'y (m)'\n\
         set title '{title}'\n\
         splot '{csv_name}' using 3:4:{column} with points pt 5 ps 1 palette notitle\n\
         pause -1\n"
    )
}

/// Gnuplot script for the four eccentricity histories of a trace.
pub fn eccentricity_plot_script(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel 'shaft angle (rad)'\n\
         set ylabel 'eccentricity (m)'\n\
         set key outside\n\
         plot '{csv_name}' using 3:5 with lines title 'e1', \\\n\
              '{csv_name}' using 3:6 with lines title 'e2', \\\n\
              '{csv_name}' using 3:7 with lines title 'e3', \\\n\
              '{csv_name}' using 3:8 with lines title 'e4'\n\
         pause -1\n"
    )
}

/// Gnuplot script for oil force components against the inlet waveform.
pub fn forces_plot_script(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set xlabel 'shaft angle (rad)'\n\
         set ylabel 'force (N)'\n\
         set y2label 'inlet pressure (Pa)'\n\
         set y2tics\n\
         set key outside\n\
         plot '{csv_name}' using 3:5 with lines title 'Fx pressure', \\\n\
              '{csv_name}' using 3:6 with lines title 'Fy pressure', \\\n\
              '{csv_name}' using 3:13 with lines title 'Fz shear', \\\n\
              '{csv_name}' using 3:4 with lines axes x1y2 title 'inlet pressure'\n\
         pause -1\n"
    )
}

/// Gnuplot script for a residual history.
pub fn residual_plot_script(csv_name: &str) -> String {
    format!(
        "set datafile separator ','\n\
         set logscale y\n\
         set xlabel 'iteration'\n\
         set ylabel 'relative residual'\n\
         plot '{csv_name}' using 1:2 with lines notitle\n\
         pause -1\n"
    )
}
