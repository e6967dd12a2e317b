//! Field sampling on a regular grid and the comma-separated field table.
//!
//! One record per grid point, row by row from the bottom. Points outside the
//! meshed perforated domain (inside a core, outside the outer boundary, or in
//! the sliver between a curved boundary and its polygonal mesh) carry `NA` in
//! every field column. Numbers use the shortest decimal that parses back to
//! the same `f64`.

use std::io::{Read, Write};

use rayon::prelude::*;

use super::channel::Channel;
use crate::domain::PerforatedDomain;
use crate::elasticity::Vec2;
use crate::equilibrium::{extract_fields, EquilibriumSolution, FieldSample};
use crate::error::{Error, Result};

pub const ABSENT: &str = "NA";

/// Cell-centered points over the bounding box of the outer boundary.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampleGrid {
    pub nx: usize,
    pub ny: usize,
    pub lo: [f64; 2],
    pub hi: [f64; 2],
}

impl SampleGrid {
    pub fn over(dom: &PerforatedDomain, nx: usize, ny: usize) -> Self {
        let (lo, hi) = dom.outer.bounding_box();
        Self { nx, ny, lo: [lo.x, lo.y], hi: [hi.x, hi.y] }
    }

    pub fn cell_size(&self) -> [f64; 2] {
        [(self.hi[0] - self.lo[0]) / self.nx as f64, (self.hi[1] - self.lo[1]) / self.ny as f64]
    }

    /// Center of cell `(i, j)`, `i` along x.
    pub fn point(&self, i: usize, j: usize) -> Vec2 {
        let [dx, dy] = self.cell_size();
        Vec2::new(self.lo[0] + (i as f64 + 0.5) * dx, self.lo[1] + (j as f64 + 0.5) * dy)
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone)]
pub struct FieldGrid {
    pub grid: SampleGrid,
    /// Row-major, `j * nx + i`; `None` where absent.
    pub samples: Vec<Option<FieldSample>>,
}

impl FieldGrid {
    pub fn channel(&self, c: Channel) -> Vec<Option<f64>> {
        self.samples.iter().map(|s| s.as_ref().map(|s| c.value(s))).collect()
    }

    pub fn present(&self) -> usize {
        self.samples.iter().filter(|s| s.is_some()).count()
    }
}

pub fn sample_fields(sol: &EquilibriumSolution, grid: SampleGrid) -> Result<FieldGrid> {
    let mesh = &sol.field.space().mesh;
    let samples = (0..grid.len())
        .into_par_iter()
        .map(|k| {
            let x = grid.point(k % grid.nx, k / grid.nx);
            if !sol.domain.contains(&x) || mesh.locate(&x).is_none() {
                return Ok(None);
            }
            extract_fields(sol, &x).map(Some)
        })
        .collect::<Result<_>>()?;
    Ok(FieldGrid { grid, samples })
}

fn header() -> Vec<String> {
    let mut h = vec!["x1".to_string(), "x2".to_string()];
    h.extend(Channel::all().into_iter().map(Channel::name));
    h
}

pub fn write_field_table(fields: &FieldGrid, w: impl Write) -> Result<()> {
    let channels = Channel::all();
    let mut out = csv::Writer::from_writer(w);
    out.write_record(header())?;
    let mut row = Vec::with_capacity(2 + channels.len());
    for (k, s) in fields.samples.iter().enumerate() {
        let x = fields.grid.point(k % fields.grid.nx, k / fields.grid.nx);
        row.clear();
        row.push(format!("{:?}", x.x));
        row.push(format!("{:?}", x.y));
        row.extend(channels.iter().map(|c| match s {
            Some(s) => format!("{:?}", c.value(s)),
            None => ABSENT.to_string(),
        }));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// A field table read back from text.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Option<f64>>>,
}

impl FieldTable {
    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }
}

pub fn read_field_table(r: impl Read) -> Result<FieldTable> {
    let bad = |line: u64, what: String| Error::Config(format!("field table line {line}: {what}"));
    let mut rd = csv::ReaderBuilder::new().flexible(true).from_reader(r);
    let columns: Vec<String> = rd.headers()?.iter().map(str::to_string).collect();
    if columns.iter().all(|c| c.is_empty()) {
        return Err(bad(1, "missing header".into()));
    }
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line());
        let row = rec
            .iter()
            .map(|f| if f == ABSENT { Ok(None) } else { f.parse::<f64>().map(Some) })
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| bad(line, e.to_string()))?;
        if row.len() != columns.len() {
            return Err(bad(line, format!("{} fields, header has {}", row.len(), columns.len())));
        }
        rows.push(row);
    }
    Ok(FieldTable { columns, rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::SymTensor2;

    fn synthetic() -> FieldGrid {
        let grid = SampleGrid { nx: 3, ny: 2, lo: [-1.0, -1.0], hi: [1.0, 1.0] };
        let t = |a: f64| SymTensor2::new(a, -a / 3.0, 1e-300 * a);
        let samples = (0..6)
            .map(|k| {
                (k != 4).then(|| FieldSample {
                    v: 0.1 * k as f64,
                    sigma: t(1.0 / 7.0),
                    eps: t(f64::MAX),
                    sigma_p: t(-2.5e-17),
                    eps_p: t(k as f64),
                    sigma_e: t(std::f64::consts::PI),
                    eps_e: t(0.0),
                })
            })
            .collect();
        FieldGrid { grid, samples }
    }

    #[test]
    fn table_round_trips_exactly() {
        let f = synthetic();
        let mut buf = Vec::new();
        write_field_table(&f, &mut buf).unwrap();
        let t = read_field_table(buf.as_slice()).unwrap();
        assert_eq!(t.rows.len(), 6);
        let channels = Channel::all();
        for (k, row) in t.rows.iter().enumerate() {
            let x = f.grid.point(k % 3, k / 3);
            assert_eq!(row[0].unwrap().to_bits(), x.x.to_bits());
            assert_eq!(row[1].unwrap().to_bits(), x.y.to_bits());
            for (c, v) in channels.iter().zip(&row[2..]) {
                match &f.samples[k] {
                    Some(s) => assert_eq!(v.unwrap().to_bits(), c.value(s).to_bits()),
                    None => assert!(v.is_none()),
                }
            }
        }
    }

    #[test]
    fn header_lists_each_column_once() {
        let mut buf = Vec::new();
        write_field_table(&synthetic(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let head = text.lines().next().unwrap();
        let cols: Vec<&str> = head.split(',').collect();
        let mut uniq = cols.clone();
        uniq.sort();
        uniq.dedup();
        assert_eq!(uniq.len(), cols.len());
        assert_eq!(cols.len(), 21);
        assert_eq!(text.lines().filter(|l| *l == head).count(), 1);
    }

    #[test]
    fn absent_rows_are_marked() {
        let mut buf = Vec::new();
        write_field_table(&synthetic(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let row = text.lines().nth(5).unwrap();
        assert_eq!(row.split(',').filter(|f| *f == ABSENT).count(), 19);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = "x1,x2\n1.0,2.0\n1.0,oops\n";
        let e = read_field_table(text.as_bytes()).unwrap_err();
        assert!(e.to_string().contains("line 3"), "{e}");
    }
}
