//! CSV documents with a `# key = value` comment block.

use std::fmt::Display;

use crate::error::Result;
use crate::experiments::tables::{Column, SweptGroup, TableLayout, TableRow, TABLE_TAIL_TOLERANCE};
use crate::experiments::{
    ConvergenceConfig, ConvergenceResult, LocalError, MemoryPoint, TruncationConfig,
    TruncationStudyResult,
};
use crate::model::PhysicalParams;
use crate::schemes::{SchemeConfig, Trajectory};
use crate::spectral::{SpectralSample, StabilityReport};

/// Numbers carry 17 significant digits; `-0` is written as `0`.
pub fn format_number(x: f64) -> String {
    let x = if x == 0.0 { 0.0 } else { x };
    format!("{x:.16e}")
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CsvDocument {
    meta: Vec<(String, String)>,
    columns: Vec<String>,
    rows: Vec<Vec<String>>,
}

/// One cell of a row.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl Cell {
    fn render(&self) -> String {
        match self {
            Cell::Num(x) => format_number(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }
}

impl CsvDocument {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self {
            columns: columns.into_iter().map(Into::into).collect(),
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Display) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    /// A numeric metadata entry in the row format.
    pub fn meta_num(&mut self, key: &str, value: f64) -> &mut Self {
        self.meta(key, format_number(value))
    }

    /// Append a row; its length must match the header.
    pub fn row(&mut self, cells: Vec<Cell>) -> &mut Self {
        assert_eq!(
            cells.len(),
            self.columns.len(),
            "row width must match the header"
        );
        self.rows.push(cells.iter().map(Cell::render).collect());
        self
    }

    pub fn columns(&self) -> &[String] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            out.push_str(&format!("# {k} = {v}\n"));
        }
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns).expect("in-memory write");
        for r in &self.rows {
            w.write_record(r).expect("in-memory write");
        }
        let bytes = w.into_inner().expect("in-memory write");
        out.push_str(std::str::from_utf8(&bytes).expect("utf-8 fields"));
        out
    }
}

fn params_meta(d: &mut CsvDocument, p: &PhysicalParams) {
    d.meta_num("v", p.v)
        .meta_num("epsilon", p.epsilon)
        .meta_num("eta", p.eta);
}

fn scheme_meta(d: &mut CsvDocument, c: &SchemeConfig) {
    let g = c.groups();
    d.meta("kind", c.kind).meta("flux", c.flux);
    params_meta(d, &c.params);
    d.meta_num("dx", c.grid.dx())
        .meta_num("dt", c.grid.dt())
        .meta("n_cells", c.grid.n_cells())
        .meta_num("t_final", c.grid.t_final())
        .meta("truncation", format!("{:?}", c.truncation))
        .meta("boundary", c.boundary)
        .meta_num("cr", g.cr)
        .meta_num("df", g.df)
        .meta_num("fo", g.fo);
}

/// Snapshots in long format: one row per node and snapshot.
pub fn trajectory_csv(traj: &Trajectory) -> CsvDocument {
    let mut d = CsvDocument::new(["time", "j", "x", "u"]);
    scheme_meta(&mut d, &traj.config);
    d.meta("steps_completed", traj.steps_completed);
    match traj.blow_up {
        Some(b) => d.meta(
            "blow_up",
            format!("step {} time {}", b.step, format_number(b.time)),
        ),
        None => d.meta("blow_up", "none"),
    };
    for f in &traj.snapshots {
        for (j, &u) in f.values().iter().enumerate() {
            d.row(vec![
                f.time().into(),
                j.into(),
                f.grid().x(j).into(),
                u.into(),
            ]);
        }
    }
    d
}

/// A θ sweep with the verdict in the header.
pub fn sweep_csv(
    samples: &[SpectralSample],
    report: &StabilityReport,
    config: &SchemeConfig,
) -> CsvDocument {
    let mut d = CsvDocument::new([
        "theta",
        "re_g",
        "im_g",
        "abs_g",
        "abs_g_cont",
        "ratio",
        "delta",
    ]);
    scheme_meta(&mut d, config);
    d.meta_num("theta0", report.theta0)
        .meta_num("cfl_mod", report.cfl_mod)
        .meta("cfl_ok", report.cfl_ok)
        .meta("highfreq_ok", report.highfreq_ok)
        .meta("verdict", report.verdict)
        .meta_num("max_high_freq_gain", report.max_high_freq_gain)
        .meta_num("argmax_theta", report.argmax_theta)
        .meta("verdict_samples", report.samples);
    for s in samples {
        d.row(vec![
            s.theta.into(),
            s.g.re.into(),
            s.g.im.into(),
            s.g.norm().into(),
            s.g_cont.norm().into(),
            s.ratio.into(),
            s.delta.map_or(Cell::Text("nan".into()), Cell::Num),
        ]);
    }
    d
}

/// A reproduced table in its printed layout.
pub fn table_csv(id: u8, rows: &[TableRow]) -> Result<CsvDocument> {
    let layout = TableLayout::get(id)?;
    let columns = Column::for_layout(layout.wide);
    let mut header = vec![
        layout.swept.label().to_string(),
        "cfl1".into(),
        "cfl2".into(),
        "theta".into(),
    ];
    header.extend(columns.iter().map(|c| c.label().to_string()));
    let mut d = CsvDocument::new(header);
    d.meta("table", id).meta("swept", layout.swept.label());
    for (group, value) in [
        (SweptGroup::Cr, layout.base.cr),
        (SweptGroup::Df, layout.base.df),
        (SweptGroup::Fo, layout.base.fo),
    ] {
        if group != layout.swept {
            d.meta_num(group.label(), value);
        }
    }
    d.meta_num("tail_tolerance", TABLE_TAIL_TOLERANCE);
    for r in rows {
        let swept = match layout.swept {
            SweptGroup::Cr => r.cr,
            SweptGroup::Df => r.df,
            SweptGroup::Fo => r.fo,
        };
        let mut cells: Vec<Cell> = vec![
            swept.into(),
            r.cfl1.into(),
            r.cfl2.into(),
            r.angle.label().into(),
        ];
        cells.extend(columns.iter().map(|&c| Cell::Num(r.value(c))));
        d.row(cells);
    }
    Ok(d)
}

pub fn convergence_csv(config: &ConvergenceConfig, result: &ConvergenceResult) -> CsvDocument {
    let mut d = CsvDocument::new(["dx", "e1"]);
    d.meta("kind", config.kind).meta("flux", config.flux);
    params_meta(&mut d, &config.params);
    d.meta_num("domain_length", config.domain_length)
        .meta_num("t_final", config.t_final)
        .meta_num("bump_center", config.bump.center)
        .meta_num("bump_width", config.bump.width)
        .meta_num("bump_height", config.bump.height)
        .meta_num("dt_scale", config.dt_scale)
        .meta(
            "memory",
            config.memory.map_or("domain".to_string(), format_number),
        )
        .meta("boundary", config.boundary)
        .meta_num("fitted_slope", result.fitted_slope);
    for (&dx, &e) in result.dx_values.iter().zip(&result.e1_values) {
        d.row(vec![dx.into(), e.into()]);
    }
    d
}

fn truncation_meta(d: &mut CsvDocument, config: &TruncationConfig) {
    d.meta("kind", config.kind);
    params_meta(d, &config.params);
    d.meta_num("x0", config.x0)
        .meta_num("dt_scale", config.dt_scale)
        .meta_num("rate", config.rate)
        .meta_num("quadrature_tolerance", config.quadrature_tolerance);
}

const LOCAL_ERROR_COLUMNS: [&str; 8] = [
    "dx",
    "dt",
    "terms",
    "time",
    "advection",
    "diffusion",
    "nonlocal",
    "total",
];

fn local_error_cells(e: &LocalError) -> Vec<Cell> {
    vec![
        e.dx.into(),
        e.dt.into(),
        e.terms.into(),
        e.time.into(),
        e.advection.into(),
        e.diffusion.into(),
        e.nonlocal.into(),
        e.total.into(),
    ]
}

pub fn truncation_csv(config: &TruncationConfig, result: &TruncationStudyResult) -> CsvDocument {
    let mut d = CsvDocument::new(LOCAL_ERROR_COLUMNS);
    truncation_meta(&mut d, config);
    d.meta_num("memory", config.memory)
        .meta_num("fitted_order", result.fitted_order);
    for e in &result.error_values {
        d.row(local_error_cells(e));
    }
    d
}

pub fn memory_csv(config: &TruncationConfig, points: &[MemoryPoint]) -> CsvDocument {
    let mut columns = vec!["memory"];
    columns.extend(LOCAL_ERROR_COLUMNS);
    columns.push("memory_effect");
    let mut d = CsvDocument::new(columns);
    truncation_meta(&mut d, config);
    for p in points {
        let mut cells = vec![Cell::Num(p.memory)];
        cells.extend(local_error_cells(&p.error));
        cells.push(p.memory_effect.into());
        d.row(cells);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn renders_meta_header_and_rows() {
        let mut d = CsvDocument::new(["x", "label"]);
        d.meta("kind", "i1").meta_num("dx", 0.1);
        d.row(vec![0.5.into(), "a,b".into()]);
        let s = d.render();
        assert_eq!(
            s,
            "# kind = i1\n# dx = 1.0000000000000001e-1\nx,label\n5.0000000000000000e-1,\"a,b\"\n"
        );
    }

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, -3.5e-300, 1.0 / 3.0, 6.02e23] {
            assert_eq!(format_number(x).parse::<f64>().unwrap(), x);
        }
    }
}
