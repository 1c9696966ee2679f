use std::fmt::Write as _;
use std::str::FromStr;

use super::{ComplexError, SimComplex};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Dot,
    Svg2d,
}

impl FromStr for ExportFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "json" => Ok(ExportFormat::Json),
            "dot" => Ok(ExportFormat::Dot),
            "svg2d" | "svg" => Ok(ExportFormat::Svg2d),
            other => Err(format!("unknown format {other:?} (json, dot, svg2d)")),
        }
    }
}

const PALETTE: [&str; 8] = [
    "#d62728", "#2ca02c", "#1f77b4", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f",
];

/// Corners of the drawing for n = 3.
const CORNERS: [(f64, f64); 3] = [(300.0, 40.0), (40.0, 490.0), (560.0, 490.0)];

impl SimComplex {
    pub fn export(&self, format: ExportFormat) -> Result<String, ComplexError> {
        match format {
            ExportFormat::Json => Ok(self.to_json()),
            ExportFormat::Dot => Ok(self.to_dot()),
            ExportFormat::Svg2d => self.to_svg(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("complexes serialize")
    }

    /// Parses and structurally validates a complex.
    pub fn from_json(s: &str) -> Result<Self, ComplexError> {
        let c: SimComplex = serde_json::from_str(s).map_err(|e| ComplexError::Invalid(e.to_string()))?;
        if c.schedule.len() != c.k {
            return Err(ComplexError::Invalid(format!(
                "k = {} but schedule has {} pairs",
                c.k,
                c.schedule.len()
            )));
        }
        for (idx, v) in c.vertices.iter().enumerate() {
            if v.id != idx || v.color >= c.n || v.position.len() != c.n {
                return Err(ComplexError::Invalid(format!("bad vertex at index {idx}")));
            }
        }
        if let Some(top) = c
            .tops
            .iter()
            .find(|t| t.len() != c.n || t.iter().any(|&v| v >= c.vertices.len()))
        {
            return Err(ComplexError::Invalid(format!("bad top simplex {top:?}")));
        }
        Ok(c)
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("graph complex {\n");
        for v in &self.vertices {
            let _ = writeln!(
                out,
                "  v{} [label=\"p{}\", color=\"{}\"];",
                v.id,
                v.color,
                PALETTE[v.color % PALETTE.len()]
            );
        }
        for (a, b) in self.edges() {
            let _ = writeln!(out, "  v{a} -- v{b};");
        }
        out.push_str("}\n");
        out
    }

    fn point(&self, id: usize) -> (f64, f64) {
        let scale = self.scale() as f64;
        let pos = &self.vertices[id].position;
        CORNERS.iter().zip(pos).fold((0.0, 0.0), |(x, y), (&(cx, cy), &w)| {
            let w = w as f64 / scale;
            (x + w * cx, y + w * cy)
        })
    }

    /// Planar drawing of a 3-processor complex.
    pub fn to_svg(&self) -> Result<String, ComplexError> {
        if self.n != 3 {
            return Err(ComplexError::UnsupportedDimension { n: self.n });
        }
        let mut out = String::from(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"600\" height=\"530\" viewBox=\"0 0 600 530\">\n",
        );
        for top in &self.tops {
            let pts: Vec<String> = top
                .iter()
                .map(|&v| {
                    let (x, y) = self.point(v);
                    format!("{x:.2},{y:.2}")
                })
                .collect();
            let _ = writeln!(
                out,
                "  <polygon points=\"{}\" fill=\"#f4f4f4\" stroke=\"#333333\" stroke-width=\"1\"/>",
                pts.join(" ")
            );
        }
        let radius = (6.0 / (self.k as f64 + 1.0).sqrt()).max(1.5);
        for v in &self.vertices {
            let (x, y) = self.point(v.id);
            let _ = writeln!(
                out,
                "  <circle cx=\"{x:.2}\" cy=\"{y:.2}\" r=\"{radius:.2}\" fill=\"{}\"/>",
                PALETTE[v.color]
            );
        }
        out.push_str("</svg>\n");
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::super::{build, initial_complex};
    use super::*;
    use crate::adversary::PairSchedule;

    #[test]
    fn json_round_trip() {
        let c = build(3, &PairSchedule::parse(3, "1-2,0-1,0-2").unwrap(), 2, &[0, 1, 2]).unwrap();
        let back = SimComplex::from_json(&c.to_json()).unwrap();
        assert_eq!(back, c);
        assert!(SimComplex::from_json("{\"n\":2}").is_err());
    }

    #[test]
    fn svg_shapes() {
        let c = initial_complex(3, &[0, 1, 2]);
        let svg = c.to_svg().unwrap();
        assert_eq!(svg.matches("<polygon").count(), 1);
        let c = build(3, &PairSchedule::parse(3, "1-2,0-1,0-2").unwrap(), 1, &[0, 1, 2]).unwrap();
        let svg = c.export(ExportFormat::Svg2d).unwrap();
        assert_eq!(svg.matches("<polygon").count(), 3);
        assert_eq!(svg.matches("<polygon points=\"300.00,40.00").count(), 3);
        assert!(matches!(
            initial_complex(2, &[0, 1]).to_svg(),
            Err(ComplexError::UnsupportedDimension { n: 2 })
        ));
    }

    #[test]
    fn dot_lists_skeleton() {
        let dot = initial_complex(2, &[0, 1]).to_dot();
        assert!(dot.contains("v0 -- v1;"));
    }
}
