//! Matching plane models against the known normal forms, and the Cremona
//! reductions that bring a family member to its simplest shape.
//!
//! All tests are on declared incidences only. A configuration with an
//! undeclared special position is taken at face value.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::cover::{is_totally_ramified, CompId, CoverError, CoverModel};
use crate::group::{self, GroupElement};
use crate::lattice::{self, CenterId};
use crate::normalize::{normalize, pull_back};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Cover(#[from] CoverError),
    #[error("rank {0} is below 2; double planes are not classified here")]
    RankTooSmall(u8),
    #[error("not totally ramified")]
    NotTotallyRamified,
    #[error("the model is not normalized")]
    NotNormalized,
    #[error("classification works on plane models only")]
    NotPlaneModel,
    #[error("not an invariant-conic-bundle configuration: {0}")]
    NotConicBundle(String),
    #[error("no normal form matches: {}", .0.join("; "))]
    NoMatch(Vec<String>),
    #[error("ambiguous: {}", .0.join(", "))]
    Ambiguous(Vec<String>),
    #[error("reduction error: {0}")]
    Reduction(String),
}

impl From<lattice::LatticeError> for ClassifyError {
    fn from(e: lattice::LatticeError) -> Self {
        ClassifyError::Cover(e.into())
    }
}

impl From<group::GroupError> for ClassifyError {
    fn from(e: group::GroupError) -> Self {
        ClassifyError::Cover(e.into())
    }
}

/// "PropX.Y/SYMBOL[params]". Alternatives among symbols are joined by `|`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CaseLabel {
    pub prop: String,
    pub symbol: String,
    pub params: Option<String>,
}

impl CaseLabel {
    fn new(prop: &str, symbol: &str, params: Option<String>) -> Self {
        Self { prop: prop.to_string(), symbol: symbol.to_string(), params }
    }

    pub fn symbols(&self) -> Vec<&str> {
        self.symbol.split('|').collect()
    }
}

impl fmt::Display for CaseLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Prop{}/{}", self.prop, self.symbol)?;
        if let Some(p) = &self.params {
            write!(f, "[{p}]")?;
        }
        Ok(())
    }
}

impl FromStr for CaseLabel {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        let rest = s.strip_prefix("Prop").ok_or_else(|| format!("bad label {s:?}"))?;
        let (prop, tail) = rest.split_once('/').ok_or_else(|| format!("bad label {s:?}"))?;
        let (symbol, params) = match tail.split_once('[') {
            Some((sym, p)) => {
                let p = p.strip_suffix(']').ok_or_else(|| format!("bad label {s:?}"))?;
                (sym, Some(p.to_string()))
            }
            None => (tail, None),
        };
        if prop.is_empty() || symbol.is_empty() {
            return Err(format!("bad label {s:?}"));
        }
        Ok(CaseLabel::new(prop, symbol, params))
    }
}

/// The subgroup G' acting trivially on the pencil through a point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GPrimeStructure {
    pub s: u8,
    pub subgroup: BTreeSet<GroupElement>,
    /// Basis of a complement, i.e. a lift of G/G'.
    pub complement: Vec<GroupElement>,
    /// Branch points on a general line of the pencil, p included.
    pub branch_points: i64,
}

/// Which shape of a proposition was recognized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Normal,
    Alternative,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Match {
    pub label: CaseLabel,
    pub form: Form,
    /// The pencil point for conic-bundle matches.
    pub point: Option<CenterId>,
}

// ---------------------------------------------------------------------------
// incidence helpers

struct View<'a> {
    m: &'a CoverModel,
    el: BTreeMap<CompId, GroupElement>,
}

impl<'a> View<'a> {
    fn new(m: &'a CoverModel) -> Self {
        let el = m.branch.iter().flat_map(|(&g, d)| d.keys().map(move |&c| (c, g))).collect();
        Self { m, el }
    }

    fn comps(&self, g: GroupElement) -> Vec<CompId> {
        self.m.branch.get(&g).map(|d| d.keys().copied().collect()).unwrap_or_default()
    }

    fn all(&self) -> Vec<CompId> {
        self.el.keys().copied().collect()
    }

    fn deg(&self, c: CompId) -> i64 {
        self.m.component(c).map_or(0, |x| x.class.degree())
    }

    fn mult(&self, c: CompId, z: CenterId) -> i64 {
        self.m.mult(c, z) as i64
    }

    fn irreducible(&self, c: CompId) -> bool {
        self.m.component(c).is_some_and(|x| x.irreducible)
    }

    fn is_line(&self, c: CompId) -> bool {
        self.irreducible(c) && self.deg(c) == 1
    }

    fn is_conic(&self, c: CompId) -> bool {
        self.irreducible(c) && self.deg(c) == 2 && self.smooth(c)
    }

    fn smooth(&self, c: CompId) -> bool {
        self.m.component(c).is_some_and(|x| x.mults.values().all(|&k| k <= 1))
    }

    fn deg_g(&self, g: GroupElement) -> i64 {
        self.comps(g).iter().map(|&c| self.deg(c)).sum()
    }

    fn mult_g(&self, g: GroupElement, z: CenterId) -> i64 {
        self.comps(g).iter().map(|&c| self.mult(c, z)).sum()
    }

    fn points(&self) -> Vec<CenterId> {
        let mut v: Vec<_> = self.m.pending.iter().filter(|c| self.m.is_proper(c.id)).collect();
        v.sort_by(|a, b| a.name.cmp(&b.name));
        v.into_iter().map(|c| c.id).collect()
    }

    fn through(&self, z: CenterId) -> Vec<CompId> {
        self.all().into_iter().filter(|&c| self.mult(c, z) > 0).collect()
    }

    fn tangent(&self, a: CompId, b: CompId) -> bool {
        self.m
            .pending
            .iter()
            .any(|y| y.parent.is_some() && self.mult(a, y.id) > 0 && self.mult(b, y.id) > 0)
    }

    fn common_points(&self, cs: &[CompId]) -> Vec<CenterId> {
        self.points().into_iter().filter(|&z| cs.iter().all(|&c| self.mult(c, z) > 0)).collect()
    }

    fn is_pencil_line(&self, c: CompId, p: CenterId) -> bool {
        self.is_line(c) && self.mult(c, p) == 1
    }
}

fn pair_of_nonzero(v: &BTreeSet<GroupElement>) -> Vec<GroupElement> {
    v.iter().copied().filter(|g| !g.is_zero()).collect()
}

// ---------------------------------------------------------------------------
// preconditions

fn check_input(cover: &CoverModel) -> Result<(), ClassifyError> {
    if cover.r < 2 {
        return Err(ClassifyError::RankTooSmall(cover.r));
    }
    if !is_totally_ramified(cover) {
        return Err(ClassifyError::NotTotallyRamified);
    }
    if !cover.is_normal() {
        return Err(ClassifyError::NotNormalized);
    }
    if cover.surface.rank() != 1 {
        return Err(ClassifyError::NotPlaneModel);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// conic bundle case

pub fn infer_g_prime(cover: &CoverModel, p: CenterId) -> Result<GPrimeStructure, ClassifyError> {
    if !cover.is_normal() {
        return Err(ClassifyError::NotNormalized);
    }
    if !cover.is_proper(p) {
        return Err(ClassifyError::NotConicBundle("the pencil point is not a declared plane point".into()));
    }
    let v = View::new(cover);
    let mut moving = Vec::new();
    let mut off = 0;
    let mut e_p = GroupElement::zero(cover.r)?;
    for (&g, _) in &cover.branch {
        let d = v.deg_g(g);
        let m = v.mult_g(g, p);
        if m > d {
            return Err(ClassifyError::Cover(CoverError::Inconsistent(format!(
                "D{g} has multiplicity {m} > degree {d}"
            ))));
        }
        if d > m {
            moving.push(g);
        }
        off += d - m;
        if m % 2 == 1 {
            e_p = e_p.add(g)?;
        }
    }
    let subgroup = group::span(cover.r, &moving)?;
    let s = group::dimension(&subgroup);
    let count = off + i64::from(!e_p.is_zero());
    if s > 2 || cover.r - s > 2 {
        return Err(ClassifyError::NotConicBundle(format!("G' has dimension {s} in rank {}", cover.r)));
    }
    let expected = [0, 2, 3][s as usize];
    if count != expected {
        return Err(ClassifyError::NotConicBundle(format!(
            "{count} branch points on a general pencil line, expected {expected} for dim G' = {s}"
        )));
    }
    Ok(GPrimeStructure {
        s,
        complement: group::complement(cover.r, &subgroup)?,
        subgroup,
        branch_points: count,
    })
}

/// The three curves on V \ 0 in the (a,b,c) families.
struct Triple {
    degrees: Vec<i64>,
    b1: Option<i64>,
    comps: Vec<CompId>,
}

fn three_curves(v: &View, elements: &[GroupElement], p: CenterId) -> Result<Triple, String> {
    let mut degrees = Vec::new();
    let mut b1 = None;
    let mut comps = Vec::new();
    for &g in elements {
        let d = v.deg_g(g);
        let m = v.mult_g(g, p);
        if d == 0 {
            return Err(format!("D{g} is zero"));
        }
        if m == d {
            if b1.is_some() {
                return Err("more than one curve has full multiplicity at p".into());
            }
            b1 = Some(d);
        } else if m != d - 1 {
            return Err(format!("D{g} has multiplicity {m} at p, degree {d}"));
        }
        degrees.push(d);
        comps.extend(v.comps(g));
    }
    if degrees.iter().any(|d| (d - degrees[0]) % 2 != 0) {
        return Err("degrees have mixed parity".into());
    }
    degrees.sort_unstable();
    Ok(Triple { degrees, b1, comps })
}

fn triple_params(t: &Triple) -> String {
    let mut s = t.degrees.iter().map(|d| d.to_string()).collect::<Vec<_>>().join(",");
    if let Some(b) = t.b1 {
        s.push_str(&format!(";b1={b}"));
    }
    s
}

/// Three lines on V \ 0, each a single line, through a common declared point q != p.
fn concurrent_lines(v: &View, t: &Triple, p: CenterId) -> bool {
    t.degrees == [1, 1, 1]
        && t.comps.len() == 3
        && t.comps.iter().all(|&c| v.is_line(c))
        && v.common_points(&t.comps).into_iter().any(|q| q != p)
}

/// Pencil lines must avoid points off p where two curves of the triple meet.
fn pencil_lines_general(v: &View, t: &Triple, lines: &[CompId], p: CenterId) -> bool {
    v.points().into_iter().filter(|&z| z != p).all(|z| {
        let hits = t.comps.iter().filter(|&&c| v.mult(c, z) > 0).count();
        hits < 2 || lines.iter().all(|&l| v.mult(l, z) == 0)
    })
}

fn single_pencil_line(v: &View, g: GroupElement, p: CenterId) -> Result<CompId, String> {
    match v.comps(g)[..] {
        [c] if v.is_pencil_line(c, p) => Ok(c),
        _ => Err(format!("D{g} is not a single line through p")),
    }
}

fn odd_family(v: &View, k: GroupElement, p: CenterId) -> Result<(i64, bool), String> {
    let d = v.deg_g(k);
    let m = v.mult_g(k, p);
    if d % 2 == 0 {
        return Err(format!("D{k} has even degree {d}"));
    }
    if m == d - 1 {
        Ok((d, true))
    } else if m == d - 2 && d >= 3 {
        Ok((d, false))
    } else {
        Err(format!("D{k} has multiplicity {m} at p, degree {d}"))
    }
}


fn match_cb(cover: &CoverModel, p: CenterId, gp: &GPrimeStructure) -> Result<Match, String> {
    let v = View::new(cover);
    let r = cover.r;
    let nonzero = GroupElement::nonzero(r).map_err(|e| e.to_string())?;
    let gprime = pair_of_nonzero(&gp.subgroup);
    let outside: Vec<GroupElement> = nonzero.iter().copied().filter(|g| !gp.subgroup.contains(g)).collect();
    let normal = |label: CaseLabel| Match { label, form: Form::Normal, point: Some(p) };
    match (r, gp.s) {
        (2, 0) => {
            for &g in &nonzero {
                single_pencil_line(&v, g, p)?;
            }
            Ok(normal(CaseLabel::new("4.2", "P1.221|P1.22.1", None)))
        }
        (2, 1) => {
            let k = gprime[0];
            for &g in &outside {
                single_pencil_line(&v, g, p)?;
            }
            let (d, reducible) = odd_family(&v, k, p)?;
            Ok(normal(if reducible {
                CaseLabel::new("4.4", "0.22", None)
            } else {
                CaseLabel::new("4.4", "C.2,21", Some(format!("d={d}")))
            }))
        }
        (2, 2) => {
            let t = three_curves(&v, &nonzero, p)?;
            if t.degrees.iter().sum::<i64>() == 3 {
                return Err("three lines: the plane itself, not a conic bundle normal form".into());
            }
            Ok(normal(CaseLabel::new("4.6", "C.22", Some(triple_params(&t)))))
        }
        (3, 1) => {
            let k = gprime[0];
            let mut lines = Vec::new();
            for &g in &nonzero {
                if g == k || v.comps(g).is_empty() {
                    continue;
                }
                single_pencil_line(&v, g, p)?;
                lines.push(g);
            }
            if lines.len() != 3 || group::span(r, &lines).map_err(|e| e.to_string())?.len() != 8 {
                return Err("expected three pencil lines at independent elements".into());
            }
            if lines[0].add(lines[1]).and_then(|x| x.add(lines[2])).map_err(|e| e.to_string())? != k {
                return Err("the odd curve does not sit at the sum of the line elements".into());
            }
            let (d, reducible) = odd_family(&v, k, p)?;
            Ok(normal(if reducible {
                CaseLabel::new("4.8", "P1.222|P1.2221", None)
            } else {
                CaseLabel::new("4.8", "C.2,22", Some(format!("d={d}")))
            }))
        }
        (3, 2) => match match_410_normal(&v, p, &gprime, &outside) {
            Ok(m) => Ok(m),
            Err(e) => match_410_four_lines(&v, p).map_err(|e2| format!("{e}; four-line form: {e2}")),
        },
        (4, 2) => {
            let t = three_curves(&v, &gprime, p)?;
            let carrying: Vec<GroupElement> = outside.iter().copied().filter(|&g| !v.comps(g).is_empty()).collect();
            if carrying.len() != 3 {
                return Err(format!("expected three pencil lines outside G', found {} nonzero data", carrying.len()));
            }
            let mut lines = Vec::new();
            for &g in &carrying {
                lines.push(single_pencil_line(&v, g, p)?);
            }
            let w = group::span(r, &carrying).map_err(|e| e.to_string())?;
            if w.len() != 4 || w.iter().any(|x| !x.is_zero() && gp.subgroup.contains(x)) {
                return Err("pencil line elements do not span a complement of G'".into());
            }
            if !pencil_lines_general(&v, &t, &lines, p) {
                return Err("a pencil line passes through a singular point of the other curves".into());
            }
            Ok(normal(if concurrent_lines(&v, &t, p) {
                CaseLabel::new("4.12", "P1.2222", None)
            } else {
                CaseLabel::new("4.12", "C.22,22", Some(triple_params(&t)))
            }))
        }
        (r, s) => Err(format!("no conic bundle family with r={r}, dim G'={s}")),
    }
}

fn match_410_normal(
    v: &View,
    p: CenterId,
    gprime: &[GroupElement],
    outside: &[GroupElement],
) -> Result<Match, String> {
    let t = three_curves(v, gprime, p)?;
    let carrying: Vec<GroupElement> = outside.iter().copied().filter(|&g| !v.comps(g).is_empty()).collect();
    let [k] = carrying[..] else {
        return Err(format!("expected one nonzero datum outside G', found {}", carrying.len()));
    };
    let lines = v.comps(k);
    if lines.len() != 2 || !lines.iter().all(|&c| v.is_pencil_line(c, p)) {
        return Err(format!("D{k} is not two lines through p"));
    }
    if !pencil_lines_general(v, &t, &lines, p) {
        return Err("a pencil line passes through a singular point of the other curves".into());
    }
    let label = if concurrent_lines(v, &t, p) {
        CaseLabel::new("4.10", "P1s.222", None)
    } else {
        CaseLabel::new("4.10", "C.221", Some(triple_params(&t)))
    };
    Ok(Match { label, form: Form::Normal, point: Some(p) })
}

/// Four lines at distinct elements summing to zero: two through p, the
/// other two meeting at a declared q that exactly one of the p-lines also passes.
fn match_410_four_lines(v: &View, p: CenterId) -> Result<Match, String> {
    let comps = v.all();
    if comps.len() != 4 || !comps.iter().all(|&c| v.is_line(c)) {
        return Err("not four lines".into());
    }
    let els: BTreeSet<GroupElement> = comps.iter().map(|c| v.el[c]).collect();
    if els.len() != 4 {
        return Err("lines do not sit at distinct elements".into());
    }
    let sum = els.iter().try_fold(GroupElement::zero(v.m.r).map_err(|e| e.to_string())?, |acc, &g| {
        acc.add(g).map_err(|e| e.to_string())
    })?;
    if !sum.is_zero() {
        return Err("line elements do not sum to zero".into());
    }
    let (at_p, off_p): (Vec<CompId>, Vec<CompId>) = comps.iter().partition(|&&c| v.mult(c, p) > 0);
    if at_p.len() != 2 {
        return Err("expected exactly two lines through p".into());
    }
    let ok = v.common_points(&off_p).into_iter().any(|q| q != p && at_p.iter().filter(|&&c| v.mult(c, q) > 0).count() == 1);
    if !ok {
        return Err("the two lines off p do not meet a p-line at a declared point".into());
    }
    Ok(Match { label: CaseLabel::new("4.10", "P1s.222", None), form: Form::Alternative, point: Some(p) })
}

/// Conic-bundle label at the pencil point p.
pub fn match_conic_bundle(cover: &CoverModel, p: CenterId) -> Result<CaseLabel, ClassifyError> {
    conic_bundle_match(cover, p).map(|m| m.label)
}

fn conic_bundle_match(cover: &CoverModel, p: CenterId) -> Result<Match, ClassifyError> {
    check_input(cover)?;
    let gp = infer_g_prime(cover, p)?;
    match_cb(cover, p, &gp).map_err(|e| ClassifyError::NoMatch(vec![e]))
}

// ---------------------------------------------------------------------------
// Del Pezzo case

type DpMatcher = fn(&View) -> Result<Match, String>;

const DEL_PEZZO: &[(&str, DpMatcher)] = &[
    ("5.1", match_51),
    ("5.3", match_53),
    ("5.5", match_55),
    ("5.7", match_57),
    ("5.9", match_59),
];

fn dp(prop: &str, symbol: &str, form: Form) -> Match {
    Match { label: CaseLabel::new(prop, symbol, None), form, point: None }
}

fn single(v: &View, g: GroupElement) -> Option<CompId> {
    match v.comps(g)[..] {
        [c] => Some(c),
        _ => None,
    }
}

fn match_51(v: &View) -> Result<Match, String> {
    if v.m.r != 2 {
        return Err("rank is not 2".into());
    }
    let els = GroupElement::nonzero(2).map_err(|e| e.to_string())?;
    let pending = &v.m.pending;
    // quartic + conic
    for &a in &els {
        for &b in &els {
            if a == b {
                continue;
            }
            let (Some(q), Some(c)) = (single(v, a), single(v, b)) else { continue };
            let ab = a.add(b).map_err(|e| e.to_string())?;
            if !v.comps(ab).is_empty() || !v.irreducible(q) || v.deg(q) != 4 || !v.is_conic(c) {
                continue;
            }
            let tacnode = pending.iter().any(|y| {
                y.parent.is_some_and(|x| {
                    v.m.is_proper(x)
                        && v.mult(q, x) == 2
                        && v.mult(q, y.id) == 2
                        && v.mult(c, x) == 1
                        && v.mult(c, y.id) == 1
                })
            });
            if tacnode {
                return Ok(dp("5.1", "2.G2", Form::Normal));
            }
        }
    }
    // cubic + line + tangent line
    for &a in &els {
        for &b in &els {
            if a == b {
                continue;
            }
            let ab = a.add(b).map_err(|e| e.to_string())?;
            let (Some(k), Some(l1), Some(l2)) = (single(v, a), single(v, b), single(v, ab)) else { continue };
            if !(v.irreducible(k) && v.deg(k) == 3 && v.smooth(k) && v.is_line(l1) && v.is_line(l2)) {
                continue;
            }
            let tangent = pending.iter().any(|y| {
                y.parent.is_some_and(|x| {
                    v.m.is_proper(x)
                        && v.mult(k, x) == 1
                        && v.mult(k, y.id) == 1
                        && v.mult(l2, x) == 1
                        && v.mult(l2, y.id) == 1
                        && v.mult(l1, x) == 0
                })
            });
            if tangent {
                return Ok(dp("5.1", "2.G2", Form::Alternative));
            }
        }
    }
    Err("no tacnodal quartic with a tangent conic, nor a cubic with a tangent line".into())
}

fn match_53(v: &View) -> Result<Match, String> {
    if v.m.r != 2 {
        return Err("rank is not 2".into());
    }
    for g in GroupElement::nonzero(2).map_err(|e| e.to_string())? {
        let Some(c) = single(v, g) else { continue };
        if !(v.irreducible(c) && v.deg(c) == 3 && v.smooth(c)) {
            continue;
        }
        let lines: Vec<CompId> = v.all().into_iter().filter(|&x| x != c).collect();
        if lines.len() != 2 || !lines.iter().all(|&l| v.is_line(l)) {
            return Err("expected two lines besides the cubic".into());
        }
        if v.el[&lines[0]] == v.el[&lines[1]] {
            return Err("the two lines carry the same element".into());
        }
        if v.common_points(&lines).iter().any(|&z| v.mult(c, z) > 0) {
            return Err("the cubic passes through the intersection of the lines".into());
        }
        if lines.iter().any(|&l| v.tangent(c, l)) {
            return Err("the cubic is tangent to a line".into());
        }
        return Ok(dp("5.3", "1.B2.1", Form::Normal));
    }
    Err("no smooth cubic".into())
}

/// Three lines at the nonzero elements of a plane V, plus the rest.
fn v_lines(v: &View) -> Option<(Vec<CompId>, BTreeSet<GroupElement>)> {
    for (a, b) in pairs(&GroupElement::nonzero(v.m.r).ok()?) {
        let ab = a.add(b).ok()?;
        let trio = [a, b, ab];
        let lines: Option<Vec<CompId>> = trio.iter().map(|&g| single(v, g).filter(|&c| v.is_line(c))).collect();
        if let Some(lines) = lines {
            return Some((lines, group::span(v.m.r, &trio).ok()?));
        }
    }
    None
}

fn pairs(xs: &[GroupElement]) -> Vec<(GroupElement, GroupElement)> {
    let mut out = Vec::new();
    for (i, &a) in xs.iter().enumerate() {
        for &b in &xs[i + 1..] {
            out.push((a, b));
        }
    }
    out
}

fn conic_against_triangle(v: &View) -> Result<(usize, CompId, Vec<CompId>), String> {
    if v.m.r != 3 {
        return Err("rank is not 3".into());
    }
    if v.all().len() != 4 {
        return Err("expected three lines and a conic".into());
    }
    let (lines, vv) = v_lines(v).ok_or("no three lines on a plane of G")?;
    let rest: Vec<CompId> = v.all().into_iter().filter(|c| !lines.contains(c)).collect();
    let [conic] = rest[..] else { return Err("expected one more component".into()) };
    if vv.contains(&v.el[&conic]) || !v.is_conic(conic) {
        return Err("the fourth component is not a smooth conic off the plane".into());
    }
    if !v.common_points(&lines).is_empty() {
        return Err("the three lines are concurrent".into());
    }
    if lines.iter().any(|&l| v.tangent(conic, l)) {
        return Err("the conic is tangent to a line".into());
    }
    let vertices: Vec<CenterId> = v
        .points()
        .into_iter()
        .filter(|&z| lines.iter().filter(|&&l| v.mult(l, z) > 0).count() == 2)
        .collect();
    let on_conic = vertices.iter().filter(|&&z| v.mult(conic, z) > 0).count();
    Ok((on_conic, conic, lines))
}

fn match_55(v: &View) -> Result<Match, String> {
    match conic_against_triangle(v) {
        Ok((2, ..)) => return Ok(dp("5.5", "4.222", Form::Normal)),
        Ok((n, ..)) => {
            if v.all().len() == 4 {
                return Err(format!("the conic passes through {n} vertices, not 2"));
            }
        }
        Err(e) if v.all().len() != 5 => return Err(e),
        Err(_) => {}
    }
    // five lines: V \ 0 once each, two at w outside V
    if v.m.r != 3 || v.all().len() != 5 || !v.all().iter().all(|&c| v.is_line(c)) {
        return Err("neither a conic with a triangle nor five lines".into());
    }
    let (lines, vv) = v_lines(v).ok_or("no three lines on a plane of G")?;
    let rest: Vec<CompId> = v.all().into_iter().filter(|c| !lines.contains(c)).collect();
    if rest.len() != 2 || v.el[&rest[0]] != v.el[&rest[1]] || vv.contains(&v.el[&rest[0]]) {
        return Err("the two remaining lines do not share an element off V".into());
    }
    if !v.common_points(&lines).is_empty() {
        return Err("the three V-lines are concurrent".into());
    }
    let triples: Vec<CenterId> = v.points().into_iter().filter(|&z| v.through(z).len() >= 3).collect();
    let [t] = triples[..] else { return Err(format!("{} triple points, expected 1", triples.len())) };
    let through = v.through(t);
    let nv = through.iter().filter(|c| lines.contains(c)).count();
    if through.len() != 3 || nv != 2 {
        return Err("the triple point is not two V-lines and one other line".into());
    }
    Ok(dp("5.5", "4.222", Form::Alternative))
}

fn match_57(v: &View) -> Result<Match, String> {
    match conic_against_triangle(v)? {
        (0, ..) => Ok(dp("5.7", "2.G22", Form::Normal)),
        (n, ..) => Err(format!("the conic passes through {n} vertices")),
    }
}

fn match_59(v: &View) -> Result<Match, String> {
    if v.m.r != 4 {
        return Err("rank is not 4".into());
    }
    let comps = v.all();
    if comps.len() != 5 || !comps.iter().all(|&c| v.is_line(c)) {
        return Err("expected five lines".into());
    }
    let els: Vec<GroupElement> = comps.iter().map(|c| v.el[c]).collect();
    for skip in 0..5 {
        let four: Vec<GroupElement> = (0..5).filter(|&i| i != skip).map(|i| els[i]).collect();
        if group::span(4, &four).map_err(|e| e.to_string())?.len() != 16 {
            return Err("four of the elements are dependent".into());
        }
    }
    if v.points().into_iter().any(|z| v.through(z).len() >= 3) {
        return Err("three lines meet at a declared point".into());
    }
    Ok(dp("5.9", "4.2222", Form::Normal))
}

pub fn match_del_pezzo(cover: &CoverModel) -> Result<CaseLabel, ClassifyError> {
    check_input(cover)?;
    let v = View::new(cover);
    let mut found = Vec::new();
    let mut reasons = Vec::new();
    for (prop, f) in DEL_PEZZO {
        match f(&v) {
            Ok(m) => found.push(m.label),
            Err(e) => reasons.push(format!("Prop{prop}: {e}")),
        }
    }
    match found.len() {
        0 => Err(ClassifyError::NoMatch(reasons)),
        1 => Ok(found.remove(0)),
        _ => Err(ClassifyError::Ambiguous(found.iter().map(|l| l.to_string()).collect())),
    }
}

// ---------------------------------------------------------------------------
// combined

/// All matches: Del Pezzo forms, and conic bundles at the declared pencil
/// (or at every declared plane point when none is declared).
pub fn all_matches(cover: &CoverModel) -> Result<(Vec<Match>, Vec<String>), ClassifyError> {
    check_input(cover)?;
    let v = View::new(cover);
    let mut found = Vec::new();
    let mut reasons = Vec::new();
    for (prop, f) in DEL_PEZZO {
        match f(&v) {
            Ok(m) => found.push(m),
            Err(e) => reasons.push(format!("Prop{prop}: {e}")),
        }
    }
    let points = match cover.pencil {
        Some(p) => vec![p],
        None => v.points(),
    };
    for p in points {
        let pname = cover.center(p).map_or("?", |c| c.name.as_str()).to_string();
        match infer_g_prime(cover, p) {
            Ok(gp) => match match_cb(cover, p, &gp) {
                Ok(m) => found.push(m),
                Err(e) => reasons.push(format!("pencil at {pname}: {e}")),
            },
            Err(e) => reasons.push(format!("pencil at {pname}: {e}")),
        }
    }
    Ok((found, reasons))
}

fn unique_match(cover: &CoverModel) -> Result<Match, ClassifyError> {
    let (found, reasons) = all_matches(cover)?;
    let labels: BTreeSet<CaseLabel> = found.iter().map(|m| m.label.clone()).collect();
    match labels.len() {
        0 => Err(ClassifyError::NoMatch(reasons)),
        1 => Ok(found.into_iter().next().expect("one match")),
        _ => Err(ClassifyError::Ambiguous(labels.iter().map(|l| l.to_string()).collect())),
    }
}

/// The unique label of a normalized plane model.
pub fn classify(cover: &CoverModel) -> Result<CaseLabel, ClassifyError> {
    unique_match(cover).map(|m| m.label)
}

// ---------------------------------------------------------------------------
// Cremona reduction

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MoveRecord {
    pub base: [String; 3],
    pub contracted: Vec<String>,
    pub created: Vec<String>,
}

impl fmt::Display for MoveRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "quadratic move at {}: contracted [{}]; new points [{}]",
            self.base.join(","),
            self.contracted.join(","),
            self.created.join(",")
        )
    }
}

fn reduction(msg: impl Into<String>) -> ClassifyError {
    ClassifyError::Reduction(msg.into())
}

fn primed(m: &CoverModel, name: &str, taken: &BTreeSet<String>) -> String {
    let mut n = format!("{name}'");
    while m.center_by_name(&n).is_some() || m.component_by_name(&n).is_some() || taken.contains(&n) {
        n.push('\'');
    }
    n
}

/// The quadratic transformation based at three declared points of a plane
/// model. Returns the new plane model, normalized.
pub fn quadratic_move(
    cover: &CoverModel,
    p: CenterId,
    q: CenterId,
    r: CenterId,
) -> Result<(CoverModel, MoveRecord), ClassifyError> {
    if cover.surface.rank() != 1 {
        return Err(ClassifyError::NotPlaneModel);
    }
    let base = [p, q, r];
    let names: Vec<String> = base
        .iter()
        .map(|&x| cover.center(x).map(|c| c.name.clone()).ok_or_else(|| reduction("unknown base point")))
        .collect::<Result<_, _>>()?;
    // blow up parents first
    let depth = |x: CenterId| {
        let mut d = 0;
        let mut cur = cover.center(x).and_then(|c| c.parent);
        while let Some(pp) = cur {
            d += 1;
            cur = cover.center(pp).and_then(|c| c.parent);
        }
        d
    };
    let mut order = base.to_vec();
    order.sort_by_key(|&x| depth(x));
    let mut blown = normalize(cover)?;
    for &x in &order {
        blown = normalize(&pull_back(&blown, x)?)?;
    }
    let coords = lattice::cremona_coordinates(&blown.surface, p, q, r)?;

    let mut out = CoverModel::new(cover.r)?;
    out.pencil = None;
    let mut taken = BTreeSet::new();
    let new_names: Vec<String> = names
        .iter()
        .map(|n| {
            let x = primed(&blown, n, &taken);
            taken.insert(x.clone());
            x
        })
        .collect();
    // the new base points keep the parent structure of the old ones
    let mut id_map: BTreeMap<CenterId, CenterId> = BTreeMap::new();
    for &x in &order {
        let i = base.iter().position(|&b| b == x).expect("base");
        let parent = cover.center(x).and_then(|c| c.parent).map(|pp| id_map[&pp]);
        let id = out.add_center(&new_names[i], parent)?;
        id_map.insert(x, id);
    }
    // other declared points; children of a base point become plane points
    let mut rest: Vec<_> = blown.pending.clone();
    let mut placed = BTreeSet::new();
    while !rest.is_empty() {
        let before = rest.len();
        let mut keep = Vec::new();
        for c in rest {
            let parent = match c.parent {
                None => Some(None),
                Some(pp) if base.contains(&pp) => Some(None),
                Some(pp) if placed.contains(&pp) => Some(Some(id_map[&pp])),
                Some(_) => None,
            };
            match parent {
                Some(par) => {
                    let id = out.add_center(&c.name, par)?;
                    id_map.insert(c.id, id);
                    placed.insert(c.id);
                }
                None => keep.push(c),
            }
        }
        if keep.len() == before {
            return Err(reduction("cyclic point declarations"));
        }
        rest = keep;
    }

    let mut contracted = Vec::new();
    for (&g, d) in &blown.branch {
        for (&c, &k) in d {
            let comp = blown.component(c).expect("component");
            let refl = lattice::reflect_at(&comp.class, coords);
            if refl.contracted {
                contracted.push(comp.name.clone());
                continue;
            }
            let mut mults: Vec<(CenterId, i64)> = Vec::new();
            for (i, &b) in base.iter().enumerate() {
                let m = -refl.class.coeff(coords[i]);
                if m < 0 {
                    return Err(reduction(format!("{} gets negative multiplicity at {}", comp.name, new_names[i])));
                }
                mults.push((id_map[&b], m));
            }
            for (&z, &m) in &comp.mults {
                mults.push((id_map[&z], m as i64));
            }
            let id = out.add_curve(&comp.name, refl.class.degree(), &mults, comp.irreducible)?;
            out.assign(g, id, k)?;
        }
    }
    // a declared point on a contracted curve has no image
    for comp_name in &contracted {
        let comp = blown.component_by_name(comp_name).expect("component");
        if let Some(z) = comp.mults.keys().next() {
            let zn = blown.center(*z).map_or("?", |c| c.name.as_str());
            return Err(reduction(format!("declared point {zn} lies on the contracted curve {comp_name}")));
        }
    }
    if let Some(pc) = cover.pencil {
        out.pencil = if base.contains(&pc) { Some(id_map[&pc]) } else { id_map.get(&pc).copied() };
    }
    garbage_collect(&mut out);
    let out = normalize(&out)?;
    contracted.sort();
    Ok((out, MoveRecord { base: [names[0].clone(), names[1].clone(), names[2].clone()], contracted, created: new_names }))
}

/// Drop declared points that carry no information: no children, not the
/// pencil, and at most one simple branch point there.
fn garbage_collect(m: &mut CoverModel) {
    loop {
        let branch = m.branch_components();
        let victim = m.pending.iter().map(|c| c.id).find(|&z| {
            if Some(z) == m.pencil || !m.children(z).is_empty() {
                return false;
            }
            let through: Vec<u32> = branch.iter().map(|&c| m.mult(c, z)).filter(|&k| k > 0).collect();
            through.len() <= 1 && through.iter().all(|&k| k <= 1)
        });
        let Some(z) = victim else { break };
        m.pending.retain(|c| c.id != z);
        for comp in m.components.iter_mut() {
            comp.mults.remove(&z);
        }
    }
}

#[derive(Default)]
struct Namer {
    serial: BTreeMap<String, u32>,
}

impl Namer {
    fn fresh(&mut self, m: &CoverModel, stem: &str) -> String {
        loop {
            let k = self.serial.entry(stem.to_string()).or_insert(0);
            *k += 1;
            let n = format!("{stem}{k}");
            if m.center_by_name(&n).is_none() && m.component_by_name(&n).is_none() {
                return n;
            }
        }
    }
}

fn declare(m: &mut CoverModel, name: &str, parent: Option<CenterId>, on: &[CompId]) -> Result<CenterId, ClassifyError> {
    let z = m.add_center(name, parent)?;
    for &c in on {
        m.component_mut(c).expect("component").mults.insert(z, 1);
    }
    Ok(z)
}

/// A declared plane point (not p) shared by the given components, or a new one.
fn meet_or_new(
    m: &mut CoverModel,
    namer: &mut Namer,
    stem: &str,
    comps: &[CompId],
    avoid: &[CenterId],
) -> Result<CenterId, ClassifyError> {
    let v = View::new(m);
    if let Some(z) = v.common_points(comps).into_iter().find(|z| !avoid.contains(z)) {
        return Ok(z);
    }
    let name = namer.fresh(m, stem);
    declare(m, &name, None, comps)
}

/// Apply the reduction recipe of the matched family.
pub fn cremona_reduce(cover: &CoverModel) -> Result<(CoverModel, Vec<MoveRecord>), ClassifyError> {
    let start = unique_match(cover)?;
    let mut m = cover.clone();
    let mut trail = Vec::new();
    let mut namer = Namer::default();
    let prop = start.label.prop.as_str();
    match (prop, start.form) {
        ("4.4", Form::Normal) | ("4.8", Form::Normal)
            if start.label.symbol.contains("0.22") || start.label.symbol.contains("P1.222") =>
        {
            let mut p = start.point.expect("pencil point");
            m.pencil = Some(p);
            reduce_odd_family(&mut m, &mut p, &mut namer, &mut trail)?;
        }
        ("4.10", Form::Normal) if start.label.symbol == "P1s.222" => {
            let p = start.point.expect("pencil point");
            m.pencil = Some(p);
            let gp = infer_g_prime(&m, p)?;
            let v = View::new(&m);
            let mut vcomps: Vec<CompId> =
                pair_of_nonzero(&gp.subgroup).iter().flat_map(|&g| v.comps(g)).collect();
            vcomps.sort();
            let q = v
                .common_points(&vcomps)
                .into_iter()
                .find(|&z| z != p)
                .ok_or_else(|| reduction("no common point of the three lines"))?;
            let pencil_lines: Vec<CompId> =
                v.all().into_iter().filter(|c| !vcomps.contains(c)).collect();
            let (a, l1) = (vcomps[0], pencil_lines[0]);
            let r = meet_or_new(&mut m, &mut namer, "r", &[a, l1], &[p, q])?;
            let (next, rec) = quadratic_move(&m, p, q, r)?;
            m = next;
            trail.push(rec);
        }
        ("5.5", Form::Normal) => {
            let v = View::new(&m);
            let (_, conic, lines) = conic_against_triangle(&v).map_err(reduction)?;
            let on: Vec<CenterId> = v
                .points()
                .into_iter()
                .filter(|&z| lines.iter().filter(|&&l| v.mult(l, z) > 0).count() == 2 && v.mult(conic, z) > 0)
                .collect();
            let [xi, eta] = on[..] else { return Err(reduction("expected two vertices on the conic")) };
            let common = *lines
                .iter()
                .find(|&&l| v.mult(l, xi) > 0 && v.mult(l, eta) > 0)
                .ok_or_else(|| reduction("no line through both vertices"))?;
            let other = *lines
                .iter()
                .find(|&&l| l != common && v.mult(l, eta) > 0)
                .ok_or_else(|| reduction("no second line through the vertex"))?;
            let zeta = meet_or_new(&mut m, &mut namer, "z", &[conic, other], &[xi, eta])?;
            let (next, rec) = quadratic_move(&m, xi, eta, zeta)?;
            m = next;
            trail.push(rec);
        }
        ("5.1", Form::Normal) => {
            let v = View::new(&m);
            let quartic = *v.all().iter().find(|&&c| v.deg(c) == 4).ok_or_else(|| reduction("no quartic"))?;
            let conic = *v.all().iter().find(|&&c| v.deg(c) == 2).ok_or_else(|| reduction("no conic"))?;
            let (x, y) = m
                .pending
                .iter()
                .find_map(|y| {
                    y.parent.filter(|&x| v.mult(quartic, x) == 2 && v.mult(quartic, y.id) == 2).map(|x| (x, y.id))
                })
                .ok_or_else(|| reduction("no tacnode"))?;
            let z = meet_or_new(&mut m, &mut namer, "z", &[quartic, conic], &[x, y])?;
            let (next, rec) = quadratic_move(&m, x, y, z)?;
            m = next;
            trail.push(rec);
        }
        _ => {}
    }
    Ok((m, trail))
}

/// D_k = C + R_1 + ... with C of degree e and multiplicity e - 1 at p, the
/// R_i lines through p. Lower e to 1, then remove the R_i in pairs.
fn reduce_odd_family(
    m: &mut CoverModel,
    p: &mut CenterId,
    namer: &mut Namer,
    trail: &mut Vec<MoveRecord>,
) -> Result<(), ClassifyError> {
    let k = {
        let gp = infer_g_prime(m, *p)?;
        let v = View::new(m);
        let ks: Vec<GroupElement> = gp.subgroup.iter().copied().filter(|g| !g.is_zero()).collect();
        let [k] = ks[..] else { return Err(reduction("G' is not of order 2")) };
        if v.comps(k).is_empty() {
            return Err(reduction("the odd curve is missing"));
        }
        k
    };
    for _ in 0..64 {
        let v = View::new(m);
        let moving: Vec<CompId> = v.comps(k).into_iter().filter(|&c| v.deg(c) > v.mult(c, *p)).collect();
        let [c] = moving[..] else { return Err(reduction("expected a single curve off the pencil")) };
        let e = v.deg(c);
        if e == 1 {
            break;
        }
        if v.mult(c, *p) != e - 1 {
            return Err(reduction("the curve does not have multiplicity e - 1 at p"));
        }
        let qn = namer.fresh(m, "q");
        let q = declare(m, &qn, None, &[c])?;
        let rn = namer.fresh(m, "r");
        let r = declare(m, &rn, Some(*p), &[c])?;
        let (next, rec) = quadratic_move(m, *p, q, r)?;
        *m = next;
        *p = m.pencil.expect("pencil follows the move");
        trail.push(rec);
    }
    for _ in 0..64 {
        let v = View::new(m);
        let comps = v.comps(k);
        let rline: Vec<CompId> = comps.iter().copied().filter(|&c| v.mult(c, *p) == 0).collect();
        let pencil: Vec<CompId> = comps.iter().copied().filter(|&c| v.mult(c, *p) > 0).collect();
        if pencil.is_empty() {
            break;
        }
        if pencil.len() == 1 {
            return Err(reduction("odd number of residual pencil lines"));
        }
        let [rl] = rline[..] else { return Err(reduction("expected one line off p")) };
        let last = pencil[pencil.len() - 1];
        let second = pencil[pencil.len() - 2];
        let q = meet_or_new(m, namer, "q", &[rl, last], &[*p])?;
        let existing = m.children(*p).into_iter().find(|&y| m.mult(second, y) > 0);
        let r = match existing {
            Some(y) => y,
            None => {
                let rn = namer.fresh(m, "r");
                declare(m, &rn, Some(*p), &[second])?
            }
        };
        let (next, rec) = quadratic_move(m, *p, q, r)?;
        *m = next;
        *p = m.pencil.expect("pencil follows the move");
        trail.push(rec);
    }
    Ok(())
}
