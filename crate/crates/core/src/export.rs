//! Structured-text and OBJ output for complexes; rationals travel as `"p/q"`.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::arith::{fmt_rat, parse_rat, to_f64, Rat};
use crate::error::{Error, Result};
use crate::geometry::volume::normalized_volume;
use crate::geometry::{Polytope, RationalPoint};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportedCell {
    pub vertices: Vec<Vec<String>>,
    pub measure: String,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExportedComplex {
    pub name: String,
    pub ambient: usize,
    pub cells: Vec<ExportedCell>,
}

impl ExportedComplex {
    pub fn new(name: &str, ambient: usize, cells: &[Polytope]) -> Result<Self> {
        let cells = cells
            .iter()
            .map(|c| {
                Ok(ExportedCell {
                    vertices: c.vertices().iter().map(|v| v.iter().map(fmt_rat).collect()).collect(),
                    measure: fmt_rat(&normalized_volume(c)?),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { name: name.into(), ambient, cells })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("plain data serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Scenario(format!("exported complex: {e}")))
    }

    /// Vertex lists and measures back as exact rationals.
    pub fn decode(&self) -> Result<Vec<(Vec<RationalPoint>, Rat)>> {
        let num = |s: &String| parse_rat(s).ok_or_else(|| Error::Scenario(format!("not a rational: {s:?}")));
        self.cells
            .iter()
            .map(|c| {
                let vs = c.vertices.iter().map(|v| v.iter().map(num).collect::<Result<Vec<_>>>()).collect::<Result<_>>()?;
                Ok((vs, num(&c.measure)?))
            })
            .collect()
    }

    /// Wavefront OBJ of the cells projected to the first `min(3, ambient)`
    /// coordinates: points, segments as lines, polygons as faces.
    pub fn to_obj(&self, polys: &[Polytope]) -> String {
        let k = self.ambient.min(3);
        let mut out = format!("# {}\n", self.name);
        let mut next = 1usize;
        for p in polys {
            let base = next;
            for v in p.vertices() {
                let mut coords: Vec<f64> = v.iter().take(k).map(to_f64).collect();
                coords.resize(3, 0.0);
                let _ = writeln!(out, "v {} {} {}", fmt_f64(coords[0]), fmt_f64(coords[1]), fmt_f64(coords[2]));
                next += 1;
            }
            let ids: Vec<usize> = match p.dim() {
                2 => boundary_cycle(p).into_iter().map(|i| base + i).collect(),
                _ => (base..next).collect(),
            };
            let list = ids.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(" ");
            match p.dim() {
                0 => {
                    let _ = writeln!(out, "p {list}");
                }
                1 => {
                    let _ = writeln!(out, "l {list}");
                }
                2 => {
                    let _ = writeln!(out, "f {list}");
                }
                _ => {
                    for e in p.faces_of_dim(1) {
                        let _ = writeln!(out, "l {} {}", base + e.vertices[0], base + e.vertices[1]);
                    }
                }
            }
        }
        out
    }
}

/// Vertices of a polygon in cyclic order, walking its edges.
fn boundary_cycle(p: &Polytope) -> Vec<usize> {
    let edges: Vec<&Vec<usize>> = p.faces_of_dim(1).map(|f| &f.vertices).collect();
    let mut order = vec![edges[0][0]];
    let mut prev = usize::MAX;
    while order.len() < p.vertices().len() {
        let cur = *order.last().unwrap();
        let nxt = edges
            .iter()
            .filter(|e| e.contains(&cur))
            .map(|e| if e[0] == cur { e[1] } else { e[0] })
            .find(|&w| w != prev && !order.contains(&w));
        match nxt {
            Some(w) => {
                prev = cur;
                order.push(w);
            }
            None => break,
        }
    }
    order
}

/// Twelve significant digits, trailing zeros trimmed.
pub fn fmt_f64(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() { "0".into() } else { x.to_string() };
    }
    let s = format!("{:.11e}", x);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let t = format!("{:.*}", decimals, x);
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        let m = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{m}e{exp}")
    }
}
