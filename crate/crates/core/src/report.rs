//! Sublayer tables and their CSV, JSON, TikZ and plain-text renderings.
//!
//! Big numbers are always written as decimal strings.

use std::fmt::Write as _;

use num_bigint::BigUint;
use serde::Serialize;

use crate::combinatorics::{build_table, closed_form_height, Family, GroundParams, LayerProfile, SublayerCoord};
use crate::error::Result;
use crate::poset::{quotient_dag, QuotientDag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Tikz,
    Text,
}

impl Format {
    pub fn name(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Tikz => "tikz",
            Format::Text => "text",
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TableRow {
    pub i: u32,
    pub j: u32,
    #[serde(serialize_with = "decimal")]
    pub size: BigUint,
    pub height: u32,
}

#[derive(Clone, Debug, Serialize)]
pub struct LayerRow {
    pub height: u32,
    #[serde(serialize_with = "decimal")]
    pub size: BigUint,
}

#[derive(Clone, Debug, Serialize)]
pub struct LargestLayer {
    pub heights: Vec<u32>,
    #[serde(serialize_with = "decimal")]
    pub size: BigUint,
    pub tie: bool,
}

/// Everything shown by `table`: sublayer sizes, heights and layer totals.
#[derive(Clone, Debug, Serialize)]
pub struct TableReport {
    pub p: u32,
    pub q: u32,
    pub r: u32,
    pub family: String,
    /// `closed-form` or `longest-path`.
    pub heights: &'static str,
    #[serde(serialize_with = "decimal")]
    pub total: BigUint,
    pub sublayers: Vec<TableRow>,
    pub layers: Vec<LayerRow>,
    pub largest_layer: LargestLayer,
    #[serde(skip)]
    dag: QuotientDag,
}

pub fn decimal<S: serde::Serializer>(n: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&n.to_str_radix(10))
}

impl TableReport {
    /// Uses `r - i + j` (or `j` on a sphere) when valid, else longest paths
    /// in the quotient.
    pub fn build(params: &GroundParams, family: Family) -> Result<TableReport> {
        let table = build_table(params, family.clone());
        let dag = quotient_dag(params, &family)?;
        let closed = table
            .sizes
            .keys()
            .all(|c| closed_form_height(&table, *c).is_ok())
            && !table.sizes.is_empty();
        let height = |c: SublayerCoord| {
            if closed {
                closed_form_height(&table, c).expect("checked")
            } else {
                dag.heights[&c]
            }
        };
        let mut sublayers: Vec<TableRow> = table
            .sizes
            .iter()
            .map(|(c, s)| TableRow {
                i: c.i,
                j: c.j,
                size: s.clone(),
                height: height(*c),
            })
            .collect();
        sublayers.sort_by_key(|row| (row.i + row.j, row.j));
        let profile = LayerProfile::from_heights(&table, height);
        Ok(TableReport {
            p: params.p,
            q: params.q,
            r: params.r,
            family: family.name(),
            heights: if closed { "closed-form" } else { "longest-path" },
            total: table.total(),
            layers: profile
                .heights
                .iter()
                .map(|(h, s)| LayerRow {
                    height: *h,
                    size: s.clone(),
                })
                .collect(),
            largest_layer: LargestLayer {
                heights: profile.argmax.clone(),
                size: profile.max_size(),
                tie: profile.tie,
            },
            sublayers,
            dag,
        })
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => to_json(self),
            Format::Tikz => self.to_tikz(),
            Format::Text => self.to_text(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("i,j,size,height\n");
        for row in &self.sublayers {
            let _ = writeln!(out, "{},{},{},{}", row.i, row.j, row.size, row.height);
        }
        out
    }

    /// Nodes at `(i + j, j - i)`, the largest layer in red, quotient edges dotted.
    pub fn to_tikz(&self) -> String {
        let xy = |c: SublayerCoord| (c.i + c.j, c.j as i64 - c.i as i64);
        let mut out = String::from("\\begin{tikzpicture}[scale=0.5]\n");
        for (c, d) in &self.dag.edges {
            let ((x1, y1), (x2, y2)) = (xy(*c), xy(*d));
            let _ = writeln!(out, "\\draw[dotted] ({x1},{y1}) -- ({x2},{y2});");
        }
        for row in &self.sublayers {
            let (x, y) = xy(SublayerCoord::new(row.i, row.j));
            let style = if self.largest_layer.heights.contains(&row.height) {
                "[red]"
            } else {
                ""
            };
            let _ = writeln!(out, "\\node{style} at ({x},{y}) {{{}}};", row.size);
        }
        out.push_str("\\end{tikzpicture}\n");
        out
    }

    pub fn to_text(&self) -> String {
        let mut rows = vec![vec!["i".into(), "j".into(), "size".into(), "height".into()]];
        rows.extend(self.sublayers.iter().map(|r| {
            vec![
                r.i.to_string(),
                r.j.to_string(),
                r.size.to_string(),
                r.height.to_string(),
            ]
        }));
        let mut out = format!(
            "{} of B_{}[{},{}]: {} sets, {} heights\n",
            self.family, self.r, self.p, self.q, self.total, self.heights
        );
        out.push_str(&aligned(&rows));
        let _ = writeln!(
            out,
            "largest layer: size {} at height{} {}{}",
            self.largest_layer.size,
            if self.largest_layer.heights.len() > 1 { "s" } else { "" },
            self.largest_layer
                .heights
                .iter()
                .map(u32::to_string)
                .collect::<Vec<_>>()
                .join(", "),
            if self.largest_layer.tie { " (tie)" } else { "" }
        );
        out
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("report serializes");
    s.push('\n');
    s
}

/// Right-aligned columns separated by two spaces.
pub fn aligned(rows: &[Vec<String>]) -> String {
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let widths: Vec<usize> = (0..cols)
        .map(|k| rows.iter().filter_map(|r| r.get(k)).map(String::len).max().unwrap_or(0))
        .collect();
    let mut out = String::new();
    for row in rows {
        let cells: Vec<String> = row
            .iter()
            .enumerate()
            .map(|(k, cell)| format!("{cell:>width$}", width = widths[k]))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ball_4_5_8() -> TableReport {
        TableReport::build(&GroundParams::new(5, 8, 4).unwrap(), Family::Ball).unwrap()
    }

    #[test]
    fn csv_rows_in_sphere_order() {
        let csv = ball_4_5_8().to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "i,j,size,height");
        assert_eq!(lines.len(), 16);
        assert_eq!(lines[1], "0,0,1,4");
        assert_eq!(lines[2], "1,0,5,3");
        assert_eq!(lines[3], "0,1,8,5");
        assert_eq!(lines[15], "0,4,70,8");
    }

    #[test]
    fn tikz_positions() {
        let t = ball_4_5_8().to_tikz();
        assert!(t.contains("\\node[red] at (2,0) {40};"));
        assert!(t.contains("\\node at (2,2) {28};"));
        assert!(t.contains("\\node[red] at (4,0) {280};"));
        assert!(t.contains("\\node[red] at (0,0) {1};"));
        assert!(t.contains("\\draw[dotted] (4,-4) -- (3,-3);"));

        let wide = TableReport::build(&GroundParams::new(9, 17, 10).unwrap(), Family::Ball).unwrap();
        assert_eq!(wide.heights, "longest-path");
        assert!(wide.to_tikz().contains("at (10,4) {1633632};"));
    }

    #[test]
    fn json_and_text() {
        let r = ball_4_5_8();
        let v: serde_json::Value = serde_json::from_str(&to_json(&r)).unwrap();
        assert_eq!(v["total"], "1093");
        assert_eq!(v["largest_layer"]["size"], "321");
        assert_eq!(v["largest_layer"]["heights"][0], 4);
        assert_eq!(v["sublayers"].as_array().unwrap().len(), 15);
        let text = r.to_text();
        assert!(text.contains("largest layer: size 321 at height 4"));
    }

    #[test]
    fn alignment() {
        let rows = vec![
            vec!["a".to_string(), "bb".to_string()],
            vec!["ccc".to_string(), "d".to_string()],
        ];
        assert_eq!(aligned(&rows), "  a  bb\nccc   d\n");
    }
}
