//! Picard lattice of an iterated blow-up of the plane.
//!
//! Classes are integer vectors in the basis (H, E1, ..., Ek) where Ei is the
//! total transform of the i-th exceptional curve. The form is diag(1, -1, ..., -1).

use std::fmt;
use std::ops::{Add, Neg, Sub};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LatticeError {
    #[error("dimension mismatch: {left} vs {right}")]
    Dimension { left: usize, right: usize },
    #[error("domain error: {0}")]
    Domain(String),
    #[error("reference error: {0}")]
    Reference(String),
    #[error("geometry error: {0}")]
    Geometry(String),
    #[error("cannot parse class {0:?}")]
    Parse(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CenterId(pub u32);

impl fmt::Display for CenterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// A point of the plane, or a point infinitely near to `parent`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Center {
    pub id: CenterId,
    pub name: String,
    pub parent: Option<CenterId>,
}

impl Center {
    pub fn new(id: u32, name: impl Into<String>, parent: Option<CenterId>) -> Self {
        Self { id: CenterId(id), name: name.into(), parent }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlownPlane {
    centers: Vec<Center>,
}

impl BlownPlane {
    pub fn plane() -> Self {
        Self::default()
    }

    pub fn centers(&self) -> &[Center] {
        &self.centers
    }

    /// 1 + number of centers.
    pub fn rank(&self) -> usize {
        1 + self.centers.len()
    }

    pub fn contains(&self, id: CenterId) -> bool {
        self.centers.iter().any(|c| c.id == id)
    }

    pub fn center(&self, id: CenterId) -> Option<&Center> {
        self.centers.iter().find(|c| c.id == id)
    }

    /// Coordinate of the exceptional class of `id` (1-based, H is 0).
    pub fn coordinate(&self, id: CenterId) -> Result<usize, LatticeError> {
        self.centers
            .iter()
            .position(|c| c.id == id)
            .map(|i| i + 1)
            .ok_or_else(|| LatticeError::Reference(format!("center {id} is not blown up")))
    }

    pub fn hyperplane(&self) -> DivisorClass {
        DivisorClass::basis(self.rank(), 0)
    }

    pub fn exceptional(&self, id: CenterId) -> Result<DivisorClass, LatticeError> {
        Ok(DivisorClass::basis(self.rank(), self.coordinate(id)?))
    }

    pub fn zero_class(&self) -> DivisorClass {
        DivisorClass::zero(self.rank())
    }

    pub fn check(&self, cls: &DivisorClass) -> Result<(), LatticeError> {
        if cls.len() != self.rank() {
            return Err(LatticeError::Dimension { left: self.rank(), right: cls.len() });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DivisorClass {
    coeffs: Vec<i64>,
}

impl DivisorClass {
    pub fn new(coeffs: Vec<i64>) -> Self {
        assert!(!coeffs.is_empty(), "a class needs at least the H coordinate");
        Self { coeffs }
    }

    pub fn zero(rank: usize) -> Self {
        Self::new(vec![0; rank])
    }

    pub fn basis(rank: usize, i: usize) -> Self {
        let mut c = vec![0; rank];
        c[i] = 1;
        Self::new(c)
    }

    pub fn coeffs(&self) -> &[i64] {
        &self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn degree(&self) -> i64 {
        self.coeffs[0]
    }

    pub fn coeff(&self, i: usize) -> i64 {
        self.coeffs[i]
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }

    pub fn scale(&self, k: i64) -> Self {
        Self::new(self.coeffs.iter().map(|c| c * k).collect())
    }

    /// Halve every coordinate, or None if some coordinate is odd.
    pub fn halve(&self) -> Option<Self> {
        if self.coeffs.iter().any(|c| c % 2 != 0) {
            return None;
        }
        Some(Self::new(self.coeffs.iter().map(|c| c / 2).collect()))
    }

    /// Pad with zeros up to `rank` (the total transform under further blow-ups).
    pub fn extend(&self, rank: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(rank.max(c.len()), 0);
        Self::new(c)
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, LatticeError> {
        same_len(self, other)?;
        Ok(Self::new(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect()))
    }

    pub fn dot(&self, other: &Self) -> i64 {
        let mut s = self.coeffs[0] * other.coeffs[0];
        for (a, b) in self.coeffs[1..].iter().zip(&other.coeffs[1..]) {
            s -= a * b;
        }
        s
    }

    /// Parse with a fixed ambient rank.
    pub fn parse(s: &str, rank: usize) -> Result<Self, LatticeError> {
        let cls: DivisorClass = s.parse()?;
        if cls.len() > rank {
            return Err(LatticeError::Dimension { left: rank, right: cls.len() });
        }
        Ok(cls.extend(rank))
    }
}

fn same_len(a: &DivisorClass, b: &DivisorClass) -> Result<(), LatticeError> {
    if a.len() != b.len() {
        return Err(LatticeError::Dimension { left: a.len(), right: b.len() });
    }
    Ok(())
}

impl Add for &DivisorClass {
    type Output = DivisorClass;
    fn add(self, rhs: &DivisorClass) -> DivisorClass {
        self.checked_add(rhs).expect("class rank mismatch")
    }
}

impl Sub for &DivisorClass {
    type Output = DivisorClass;
    fn sub(self, rhs: &DivisorClass) -> DivisorClass {
        self.checked_add(&-rhs).expect("class rank mismatch")
    }
}

impl Neg for &DivisorClass {
    type Output = DivisorClass;
    fn neg(self) -> DivisorClass {
        self.scale(-1)
    }
}

impl fmt::Display for DivisorClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let sign = if c < 0 { "-" } else if first { "" } else { "+" };
            let mag = c.unsigned_abs();
            let num = if mag == 1 { String::new() } else { mag.to_string() };
            let sym = if i == 0 { "H".to_string() } else { format!("E{i}") };
            write!(f, "{sign}{num}{sym}")?;
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for DivisorClass {
    type Err = LatticeError;

    /// Accepts the printed form, e.g. "4H-2E1-4E2" or "0". The result has
    /// the smallest rank covering every mentioned coordinate.
    fn from_str(s: &str) -> Result<Self, LatticeError> {
        let bad = || LatticeError::Parse(s.to_string());
        let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if t.is_empty() {
            return Err(bad());
        }
        if t == "0" {
            return Ok(Self::zero(1));
        }
        let mut terms: Vec<(usize, i64)> = Vec::new();
        let b = t.as_bytes();
        let mut i = 0;
        while i < b.len() {
            let mut sign = 1;
            if b[i] == b'+' || b[i] == b'-' {
                if b[i] == b'-' {
                    sign = -1;
                }
                i += 1;
            } else if i > 0 {
                return Err(bad());
            }
            let start = i;
            while i < b.len() && b[i].is_ascii_digit() {
                i += 1;
            }
            let mag: i64 = if start == i { 1 } else { t[start..i].parse().map_err(|_| bad())? };
            let idx = match b.get(i) {
                Some(b'H') => {
                    i += 1;
                    0
                }
                Some(b'E') => {
                    i += 1;
                    let s2 = i;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                    let n: usize = t[s2..i].parse().map_err(|_| bad())?;
                    if n == 0 {
                        return Err(bad());
                    }
                    n
                }
                _ => return Err(bad()),
            };
            terms.push((idx, sign * mag));
        }
        let rank = terms.iter().map(|t| t.0 + 1).max().unwrap_or(1);
        let mut c = vec![0; rank];
        for (idx, v) in terms {
            c[idx] += v;
        }
        Ok(Self::new(c))
    }
}

pub fn intersect(a: &DivisorClass, b: &DivisorClass) -> Result<i64, LatticeError> {
    same_len(a, b)?;
    Ok(a.dot(b))
}

pub fn canonical(surface: &BlownPlane) -> DivisorClass {
    let mut c = vec![1; surface.rank()];
    c[0] = -3;
    DivisorClass::new(c)
}

pub fn blow_up(surface: &BlownPlane, center: Center) -> Result<BlownPlane, LatticeError> {
    if surface.contains(center.id) {
        return Err(LatticeError::Reference(format!("center {} is already blown up", center.id)));
    }
    if let Some(p) = center.parent {
        if !surface.contains(p) {
            return Err(LatticeError::Reference(format!("dangling parent {p} for center {}", center.name)));
        }
    }
    let mut out = surface.clone();
    out.centers.push(center);
    Ok(out)
}

pub fn strict_transform(
    surface: &BlownPlane,
    class: &DivisorClass,
    center: CenterId,
    mult: i64,
) -> Result<DivisorClass, LatticeError> {
    if mult < 0 {
        return Err(LatticeError::Domain(format!("negative multiplicity {mult}")));
    }
    surface.check(class)?;
    let e = surface.exceptional(center)?;
    Ok(class - &e.scale(mult))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Reflected {
    pub class: DivisorClass,
    /// The class has degree 0 after the move: its curve is contracted.
    pub contracted: bool,
}

/// Checks the base triple of a quadratic transformation and returns the
/// three coordinates.
pub fn cremona_coordinates(
    surface: &BlownPlane,
    p: CenterId,
    q: CenterId,
    r: CenterId,
) -> Result<[usize; 3], LatticeError> {
    if p == q || q == r || p == r {
        return Err(LatticeError::Geometry("base points must be distinct".into()));
    }
    let ids = [p, q, r];
    for &id in &ids {
        let c = surface
            .center(id)
            .ok_or_else(|| LatticeError::Geometry(format!("base point {id} is not blown up")))?;
        if let Some(par) = c.parent {
            if !ids.contains(&par) {
                return Err(LatticeError::Geometry(format!(
                    "base point {} is infinitely near a point outside the base",
                    c.name
                )));
            }
        }
    }
    Ok([surface.coordinate(p)?, surface.coordinate(q)?, surface.coordinate(r)?])
}

pub fn cremona_reflect(
    surface: &BlownPlane,
    class: &DivisorClass,
    p: CenterId,
    q: CenterId,
    r: CenterId,
) -> Result<Reflected, LatticeError> {
    surface.check(class)?;
    let [ip, iq, ir] = cremona_coordinates(surface, p, q, r)?;
    Ok(reflect_at(class, [ip, iq, ir]))
}

/// The reflection in H - Ep - Eq - Er at fixed coordinates, no checks.
pub fn reflect_at(class: &DivisorClass, [ip, iq, ir]: [usize; 3]) -> Reflected {
    let d = class.coeff(0);
    let (mp, mq, mr) = (-class.coeff(ip), -class.coeff(iq), -class.coeff(ir));
    let mut c = class.coeffs().to_vec();
    c[0] = 2 * d - mp - mq - mr;
    c[ip] = -(d - mq - mr);
    c[iq] = -(d - mp - mr);
    c[ir] = -(d - mp - mq);
    let contracted = c[0] == 0;
    Reflected { class: DivisorClass::new(c), contracted }
}

/// Contract the exceptional curve of the last center.
pub fn contract(surface: &BlownPlane, cls: &DivisorClass) -> Result<BlownPlane, LatticeError> {
    surface.check(cls)?;
    let Some(last) = surface.centers.last() else {
        return Err(LatticeError::Geometry("nothing to contract on the plane".into()));
    };
    let e = surface.exceptional(last.id)?;
    let k = canonical(surface);
    if cls.dot(cls) != -1 || cls.dot(&k) != -1 {
        return Err(LatticeError::Geometry(format!("{cls} is not a (-1)-class")));
    }
    if *cls != e {
        return Err(LatticeError::Geometry(format!(
            "{cls} is not the exceptional class of the last center"
        )));
    }
    let mut out = surface.clone();
    out.centers.pop();
    Ok(out)
}

/// Push a class forward along the contraction of the last center.
pub fn push_forward(cls: &DivisorClass) -> Result<DivisorClass, LatticeError> {
    if cls.len() < 2 {
        return Err(LatticeError::Domain("no exceptional coordinate to drop".into()));
    }
    Ok(DivisorClass::new(cls.coeffs()[..cls.len() - 1].to_vec()))
}
