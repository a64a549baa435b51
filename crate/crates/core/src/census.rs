//! Enumeration of the conic-bundle shapes up to a degree bound.
//!
//! A shape fixes, for each nonzero element, the degrees of the curves and
//! their multiplicities at the pencil point. Every shape is built as a plane
//! model, validated, classified, reduced and resolved. Shapes that reduce to
//! the same model are one row.

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::classify::{classify, cremona_reduce, ClassifyError};
use crate::cover::{validate, CoverError, CoverModel};
use crate::group::GroupElement;
use crate::invariants;
use crate::lattice::CenterId;
use crate::normalize::resolve;

pub const MAX_DEGREE: i64 = 7;
const MAX_ROUNDS: usize = 32;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CensusError {
    #[error("census bounds exceeded: {0}")]
    Bounds(String),
    #[error("shape {shape}: {source}")]
    Cover { shape: String, source: CoverError },
    #[error("shape {shape}: {source}")]
    Classify { shape: String, source: ClassifyError },
    #[error("shapes {0} and {1} reduce to the same model with different labels")]
    Conflict(String, String),
}

/// One curve of a shape: degree, multiplicity at p, and whether it passes
/// through the auxiliary point q.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
struct Curve {
    degree: i64,
    mult: i64,
    through_q: bool,
}

fn curve(degree: i64, mult: i64) -> Curve {
    Curve { degree, mult, through_q: false }
}

fn line_through_q() -> Curve {
    Curve { degree: 1, mult: 0, through_q: true }
}

#[derive(Debug, Clone)]
struct Shape {
    r: u8,
    data: Vec<(GroupElement, Vec<Curve>)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CensusRow {
    pub shape: String,
    pub label: String,
    pub chi: i64,
    pub k_squared: i64,
    /// Number of enumerated shapes that reduce to this row.
    pub merged: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Census {
    pub r: u8,
    pub max_degree: i64,
    pub rows: Vec<CensusRow>,
}

impl Census {
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("shape\tlabel\tchi\tk2\tmerged\n");
        for row in &self.rows {
            out.push_str(&format!("{}\t{}\t{}\t{}\t{}\n", row.shape, row.label, row.chi, row.k_squared, row.merged));
        }
        out
    }
}

impl fmt::Display for Census {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "census r={} max_degree={} rows={}", self.r, self.max_degree, self.rows.len())?;
        let w = self.rows.iter().map(|r| r.shape.len()).max().unwrap_or(0);
        let wl = self.rows.iter().map(|r| r.label.len()).max().unwrap_or(0);
        for row in &self.rows {
            writeln!(
                f,
                "{:<w$}  {:<wl$}  chi={} k2={} merged={}",
                row.shape, row.label, row.chi, row.k_squared, row.merged
            )?;
        }
        Ok(())
    }
}

fn el(s: &str) -> GroupElement {
    s.parse().expect("static element")
}

/// Multiplicity choices for the odd curve of the r=2, r=3 families.
fn odd_curves(max: i64) -> Vec<Curve> {
    let mut out = Vec::new();
    for d in (1..=max).step_by(2) {
        out.push(curve(d, d - 1));
        if d >= 3 {
            out.push(curve(d, d - 2));
        }
    }
    out
}

/// (a,b,c) of equal parity with multiplicities d-1, or d on one of them.
fn triples(max: i64) -> Vec<[Curve; 3]> {
    let mut out = Vec::new();
    for a in 1..=max {
        for b in a..=max {
            for c in b..=max {
                if (a - b) % 2 != 0 || (b - c) % 2 != 0 {
                    continue;
                }
                let base = [curve(a, a - 1), curve(b, b - 1), curve(c, c - 1)];
                out.push(base);
                for i in 0..3 {
                    if i > 0 && base[i].degree == base[i - 1].degree {
                        continue;
                    }
                    let mut t = base;
                    t[i].mult += 1;
                    out.push(t);
                }
            }
        }
    }
    out
}

fn shapes(r: u8, max: i64) -> Vec<Shape> {
    let pl = curve(1, 1);
    let mut out = Vec::new();
    match r {
        2 => {
            out.push(Shape { r, data: vec![(el("10"), vec![pl]), (el("01"), vec![pl]), (el("11"), vec![pl])] });
            for c in odd_curves(max) {
                out.push(Shape { r, data: vec![(el("10"), vec![pl]), (el("01"), vec![pl]), (el("11"), vec![c])] });
            }
            for t in triples(max) {
                if t.iter().map(|c| c.degree).sum::<i64>() == 3 {
                    continue;
                }
                out.push(Shape { r, data: vec![(el("10"), vec![t[0]]), (el("01"), vec![t[1]]), (el("11"), vec![t[2]])] });
            }
        }
        3 => {
            for c in odd_curves(max) {
                out.push(Shape {
                    r,
                    data: vec![(el("100"), vec![pl]), (el("010"), vec![pl]), (el("001"), vec![pl]), (el("111"), vec![c])],
                });
            }
            for t in triples_with_concurrent(max) {
                out.push(Shape {
                    r,
                    data: vec![
                        (el("100"), vec![t[0]]),
                        (el("010"), vec![t[1]]),
                        (el("110"), vec![t[2]]),
                        (el("001"), vec![pl, pl]),
                    ],
                });
            }
        }
        4 => {
            for t in triples_with_concurrent(max) {
                out.push(Shape {
                    r,
                    data: vec![
                        (el("1000"), vec![t[0]]),
                        (el("0100"), vec![t[1]]),
                        (el("1100"), vec![t[2]]),
                        (el("0010"), vec![pl]),
                        (el("0001"), vec![pl]),
                        (el("0011"), vec![pl]),
                    ],
                });
            }
        }
        _ => {}
    }
    out
}

fn triples_with_concurrent(max: i64) -> Vec<[Curve; 3]> {
    let mut out = triples(max);
    out.push([line_through_q(); 3]);
    out
}

fn describe_curve(c: &Curve) -> String {
    let q = if c.through_q { "q" } else { "" };
    format!("{}/{}{q}", c.degree, c.mult)
}

fn describe_shape(s: &Shape) -> String {
    let mut parts: Vec<String> = s
        .data
        .iter()
        .map(|(g, cs)| format!("{g}:{}", cs.iter().map(describe_curve).collect::<Vec<_>>().join("+")))
        .collect();
    parts.sort();
    parts.join(" ")
}

fn build(s: &Shape) -> Result<CoverModel, CoverError> {
    let mut m = CoverModel::new(s.r)?;
    let p = m.add_center("p", None)?;
    m.pencil = Some(p);
    let q = if s.data.iter().any(|(_, cs)| cs.iter().any(|c| c.through_q)) {
        Some(m.add_center("q", None)?)
    } else {
        None
    };
    for (g, cs) in &s.data {
        for (i, c) in cs.iter().enumerate() {
            let name = if cs.len() == 1 { format!("D{g}") } else { format!("D{g}_{}", i + 1) };
            let mut mults: Vec<(CenterId, i64)> = vec![(p, c.mult)];
            if let (true, Some(q)) = (c.through_q, q) {
                mults.push((q, 1));
            }
            // a degree-d curve with a d-fold point is d lines
            let irreducible = c.degree == 1 || c.mult < c.degree;
            let id = m.add_curve(&name, c.degree, &mults, irreducible)?;
            m.assign(*g, id, 1)?;
        }
    }
    Ok(m)
}

/// Shape string of a plane model: per element, degree/multiplicity at the
/// pencil point of each component, and the elements through each other point.
pub fn model_shape(m: &CoverModel) -> String {
    let p = m.pencil;
    let mut parts = Vec::new();
    for (g, d) in &m.branch {
        let mut cs: Vec<String> = d
            .keys()
            .map(|&c| {
                let deg = m.component(c).map_or(0, |x| x.class.degree());
                let mult = p.map_or(0, |p| m.mult(c, p));
                let pts = m
                    .pending
                    .iter()
                    .filter(|z| Some(z.id) != p && m.mult(c, z.id) > 0)
                    .count();
                format!("{deg}/{mult}{}", "q".repeat(pts))
            })
            .collect();
        cs.sort();
        parts.push(format!("{g}:{}", cs.join("+")));
    }
    parts.sort();
    parts.join(" ")
}

struct Evaluated {
    source: String,
    shape: String,
    label: String,
    chi: i64,
    k_squared: i64,
}

fn evaluate(s: &Shape) -> Result<Evaluated, CensusError> {
    let source = describe_shape(s);
    let cover_err = |e: CoverError| CensusError::Cover { shape: source.clone(), source: e };
    let class_err = |e: ClassifyError| CensusError::Classify { shape: source.clone(), source: e };
    let m = build(s).map_err(cover_err)?;
    validate(&m).map_err(cover_err)?;
    let label = classify(&m).map_err(class_err)?.to_string();
    let (reduced, _) = cremona_reduce(&m).map_err(class_err)?;
    let after = classify(&reduced).map_err(class_err)?.to_string();
    if after != label {
        return Err(CensusError::Conflict(source, model_shape(&reduced)));
    }
    let res = resolve(&reduced, MAX_ROUNDS).map_err(cover_err)?;
    let chi = invariants::euler_characteristic(&res.model).map_err(cover_err)?;
    let k_squared = invariants::canonical_square(&res.model).map_err(cover_err)?;
    Ok(Evaluated { shape: model_shape(&reduced), source, label, chi, k_squared })
}

/// All conic-bundle shapes of rank r with curve degrees up to max_degree.
pub fn census(r: u8, max_degree: i64) -> Result<Census, CensusError> {
    if !(2..=4).contains(&r) {
        return Err(CensusError::Bounds(format!("r must be 2, 3 or 4, got {r}")));
    }
    if !(1..=MAX_DEGREE).contains(&max_degree) {
        return Err(CensusError::Bounds(format!("max_degree must be between 1 and {MAX_DEGREE}, got {max_degree}")));
    }
    let evaluated: Vec<Evaluated> =
        shapes(r, max_degree).par_iter().map(evaluate).collect::<Result<_, _>>()?;
    let mut rows: BTreeMap<String, (CensusRow, String)> = BTreeMap::new();
    for e in evaluated {
        match rows.get_mut(&e.shape) {
            Some((row, first)) => {
                if row.label != e.label || row.chi != e.chi || row.k_squared != e.k_squared {
                    return Err(CensusError::Conflict(first.clone(), e.source));
                }
                row.merged += 1;
            }
            None => {
                let row = CensusRow { shape: e.shape.clone(), label: e.label, chi: e.chi, k_squared: e.k_squared, merged: 1 };
                rows.insert(e.shape, (row, e.source));
            }
        }
    }
    Ok(Census { r, max_degree, rows: rows.into_values().map(|(row, _)| row).collect() })
}
