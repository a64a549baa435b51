//! Cover models: branch data on a blown-up plane, derived building data,
//! the product relations and quotient covers.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::group::{self, Character, GroupElement, GroupError, QuotientMap};
use crate::lattice::{BlownPlane, Center, CenterId, DivisorClass, LatticeError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverError {
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error("parity error: the branch classes weighted by character {chi} have an odd coordinate")]
    Parity { chi: Character },
    #[error("invalid model: {0}")]
    Invalid(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("inconsistent data: {0}")]
    Inconsistent(String),
    #[error("resolution did not finish within {max_rounds} rounds")]
    NonTermination { max_rounds: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CompId(pub u32);

/// An irreducible (or declared reducible) curve on the surface.
///
/// `class` already accounts for the blown-up centers. `mults` records
/// multiplicities at centers that are declared but not blown up yet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CurveComponent {
    pub id: CompId,
    pub name: String,
    pub class: DivisorClass,
    pub irreducible: bool,
    pub mults: BTreeMap<CenterId, u32>,
}

/// g -> (component -> multiplicity). Zero multiplicities are never stored.
pub type BranchData = BTreeMap<GroupElement, BTreeMap<CompId, u32>>;

/// chi -> L_chi, including chi = 0.
pub type BuildingData = BTreeMap<Character, DivisorClass>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverModel {
    pub r: u8,
    pub surface: BlownPlane,
    /// Declared points that are not blown up. Parents are pending or blown.
    pub pending: Vec<Center>,
    pub components: Vec<CurveComponent>,
    pub branch: BranchData,
    /// Base point of the invariant pencil, when known.
    pub pencil: Option<CenterId>,
}

impl CoverModel {
    pub fn new(r: u8) -> Result<Self, CoverError> {
        GroupElement::zero(r)?;
        Ok(Self {
            r,
            surface: BlownPlane::plane(),
            pending: Vec::new(),
            components: Vec::new(),
            branch: BTreeMap::new(),
            pencil: None,
        })
    }

    pub fn all_centers(&self) -> impl Iterator<Item = &Center> {
        self.surface.centers().iter().chain(self.pending.iter())
    }

    pub fn center(&self, id: CenterId) -> Option<&Center> {
        self.all_centers().find(|c| c.id == id)
    }

    pub fn center_by_name(&self, name: &str) -> Option<&Center> {
        self.all_centers().find(|c| c.name == name)
    }

    pub fn is_pending(&self, id: CenterId) -> bool {
        self.pending.iter().any(|c| c.id == id)
    }

    /// Pending with a plane or blown-up parent, i.e. an actual point of the surface.
    pub fn is_proper(&self, id: CenterId) -> bool {
        self.pending
            .iter()
            .find(|c| c.id == id)
            .is_some_and(|c| c.parent.is_none_or(|p| self.surface.contains(p)))
    }

    pub fn children(&self, id: CenterId) -> Vec<CenterId> {
        self.pending.iter().filter(|c| c.parent == Some(id)).map(|c| c.id).collect()
    }

    pub fn component(&self, id: CompId) -> Option<&CurveComponent> {
        self.components.iter().find(|c| c.id == id)
    }

    pub fn component_mut(&mut self, id: CompId) -> Option<&mut CurveComponent> {
        self.components.iter_mut().find(|c| c.id == id)
    }

    pub fn component_by_name(&self, name: &str) -> Option<&CurveComponent> {
        self.components.iter().find(|c| c.name == name)
    }

    pub fn class_of(&self, id: CompId) -> Result<&DivisorClass, CoverError> {
        self.component(id)
            .map(|c| &c.class)
            .ok_or_else(|| CoverError::Invalid(format!("unknown component id {}", id.0)))
    }

    pub fn name_of(&self, id: CompId) -> &str {
        self.component(id).map_or("?", |c| c.name.as_str())
    }

    /// Multiplicity at a pending center (0 if the component misses it).
    pub fn mult(&self, comp: CompId, center: CenterId) -> u32 {
        self.component(comp).and_then(|c| c.mults.get(&center).copied()).unwrap_or(0)
    }

    pub fn next_center_id(&self) -> u32 {
        self.all_centers().map(|c| c.id.0 + 1).max().unwrap_or(0)
    }

    pub fn next_comp_id(&self) -> u32 {
        self.components.iter().map(|c| c.id.0 + 1).max().unwrap_or(0)
    }

    /// A name not used by any center or component: `base`, else `base_2`, ...
    pub fn fresh_name(&self, base: &str) -> String {
        let taken = |n: &str| self.center_by_name(n).is_some() || self.component_by_name(n).is_some();
        if !taken(base) {
            return base.to_string();
        }
        (2..).map(|k| format!("{base}_{k}")).find(|n| !taken(n)).expect("unbounded")
    }

    pub fn add_center(&mut self, name: &str, parent: Option<CenterId>) -> Result<CenterId, CoverError> {
        if self.center_by_name(name).is_some() {
            return Err(CoverError::Invalid(format!("duplicate center {name}")));
        }
        if let Some(p) = parent {
            if self.center(p).is_none() {
                return Err(CoverError::Invalid(format!("unknown parent for {name}")));
            }
        }
        let id = CenterId(self.next_center_id());
        self.pending.push(Center { id, name: name.to_string(), parent });
        Ok(id)
    }

    /// Adds a curve of the given degree with multiplicities at declared centers.
    /// Blown-up centers go into the class, pending ones into `mults`.
    pub fn add_curve(
        &mut self,
        name: &str,
        degree: i64,
        mults: &[(CenterId, i64)],
        irreducible: bool,
    ) -> Result<CompId, CoverError> {
        let mut class = DivisorClass::zero(self.surface.rank());
        let mut pend = BTreeMap::new();
        for &(c, m) in mults {
            if self.surface.contains(c) {
                let i = self.surface.coordinate(c)?;
                let mut v = class.coeffs().to_vec();
                v[i] -= m;
                class = DivisorClass::new(v);
            } else if self.is_pending(c) {
                if m < 0 {
                    return Err(CoverError::Invalid(format!("negative multiplicity at a point for {name}")));
                }
                if m > 0 {
                    *pend.entry(c).or_insert(0) += m as u32;
                }
            } else {
                return Err(CoverError::Invalid(format!("unknown center for {name}")));
            }
        }
        let mut v = class.coeffs().to_vec();
        v[0] += degree;
        self.add_component(name, DivisorClass::new(v), pend, irreducible)
    }

    pub fn add_component(
        &mut self,
        name: &str,
        class: DivisorClass,
        mults: BTreeMap<CenterId, u32>,
        irreducible: bool,
    ) -> Result<CompId, CoverError> {
        if self.component_by_name(name).is_some() {
            return Err(CoverError::Invalid(format!("duplicate component {name}")));
        }
        let id = CompId(self.next_comp_id());
        self.components.push(CurveComponent { id, name: name.to_string(), class, irreducible, mults });
        Ok(id)
    }

    pub fn assign(&mut self, g: GroupElement, comp: CompId, k: u32) -> Result<(), CoverError> {
        if g.rank() != self.r {
            return Err(GroupError::Dimension { left: self.r, right: g.rank() }.into());
        }
        if g.is_zero() {
            return Err(CoverError::Domain("branch data live on nonzero elements".into()));
        }
        if self.component(comp).is_none() {
            return Err(CoverError::Invalid(format!("unknown component id {}", comp.0)));
        }
        if k > 0 {
            *self.branch.entry(g).or_default().entry(comp).or_insert(0) += k;
        }
        Ok(())
    }

    /// Class of D_g counted with multiplicities.
    pub fn branch_class(&self, g: GroupElement) -> Result<DivisorClass, CoverError> {
        let mut acc = self.surface.zero_class();
        if let Some(d) = self.branch.get(&g) {
            for (&c, &k) in d {
                acc = acc.checked_add(&self.class_of(c)?.scale(k as i64))?;
            }
        }
        Ok(acc)
    }

    /// Class of the whole branch curve D = sum D_g.
    pub fn total_branch_class(&self) -> Result<DivisorClass, CoverError> {
        let mut acc = self.surface.zero_class();
        for &g in self.branch.keys() {
            acc = acc.checked_add(&self.branch_class(g)?)?;
        }
        Ok(acc)
    }

    pub fn nonzero_elements(&self) -> Vec<GroupElement> {
        self.branch.iter().filter(|(_, d)| !d.is_empty()).map(|(&g, _)| g).collect()
    }

    /// Group elements under which a component appears.
    pub fn elements_of(&self, comp: CompId) -> Vec<GroupElement> {
        self.branch.iter().filter(|(_, d)| d.contains_key(&comp)).map(|(&g, _)| g).collect()
    }

    /// Components occurring in the branch, in id order.
    pub fn branch_components(&self) -> BTreeSet<CompId> {
        self.branch.values().flat_map(|d| d.keys().copied()).collect()
    }

    /// D_g printed as "Q + 2*E", or "0".
    pub fn describe_branch(&self, g: GroupElement) -> String {
        match self.branch.get(&g) {
            Some(d) if !d.is_empty() => d
                .iter()
                .map(|(&c, &k)| if k == 1 { self.name_of(c).to_string() } else { format!("{k}*{}", self.name_of(c)) })
                .collect::<Vec<_>>()
                .join(" + "),
            _ => "0".to_string(),
        }
    }

    /// Each component reduced and under a single group element.
    pub fn is_normal(&self) -> bool {
        let mut seen = BTreeSet::new();
        for d in self.branch.values() {
            for (&c, &k) in d {
                if k != 1 || !seen.insert(c) {
                    return false;
                }
            }
        }
        true
    }

    /// Structural consistency of references, ranks and classes.
    pub fn validate_structure(&self) -> Result<(), CoverError> {
        GroupElement::zero(self.r)?;
        for (i, c) in self.pending.iter().enumerate() {
            if self.surface.contains(c.id) {
                return Err(CoverError::Invalid(format!("center {} is both pending and blown up", c.name)));
            }
            if self.pending[..i].iter().any(|o| o.id == c.id || o.name == c.name) {
                return Err(CoverError::Invalid(format!("duplicate center {}", c.name)));
            }
            if let Some(p) = c.parent {
                if self.center(p).is_none() {
                    return Err(CoverError::Invalid(format!("center {} has a dangling parent", c.name)));
                }
            }
        }
        for comp in &self.components {
            self.surface.check(&comp.class)?;
            if comp.class.degree() < 0 {
                return Err(CoverError::Invalid(format!("component {} has negative degree", comp.name)));
            }
            if comp.class.degree() == 0 && comp.class.coeffs()[1..].iter().all(|&c| c <= 0) {
                return Err(CoverError::Invalid(format!("degree-0 component {} is not exceptional", comp.name)));
            }
            for (&z, &m) in &comp.mults {
                if !self.is_pending(z) {
                    return Err(CoverError::Invalid(format!("component {} refers to an unknown point", comp.name)));
                }
                if m == 0 {
                    return Err(CoverError::Invalid(format!("component {} stores a zero multiplicity", comp.name)));
                }
            }
        }
        for (g, d) in &self.branch {
            if g.rank() != self.r {
                return Err(GroupError::Dimension { left: self.r, right: g.rank() }.into());
            }
            if g.is_zero() {
                return Err(CoverError::Domain("branch data live on nonzero elements".into()));
            }
            for (&c, &k) in d {
                if self.component(c).is_none() || k == 0 {
                    return Err(CoverError::Invalid(format!("bad branch entry under {g}")));
                }
            }
        }
        if let Some(p) = self.pencil {
            if self.center(p).is_none() {
                return Err(CoverError::Invalid("pencil point is not declared".into()));
            }
        }
        Ok(())
    }
}

pub fn is_totally_ramified(cover: &CoverModel) -> bool {
    let gens = cover.nonzero_elements();
    match group::span(cover.r, &gens) {
        Ok(s) => s.len() == 1usize << cover.r,
        Err(_) => false,
    }
}

/// Structure, total ramification, parity and the product relations.
pub fn validate(cover: &CoverModel) -> Result<BuildingData, CoverError> {
    cover.validate_structure()?;
    if !is_totally_ramified(cover) {
        return Err(CoverError::Precondition("not totally ramified".into()));
    }
    let building = derive_building_data(cover)?;
    let rep = check_prod_relations(cover, &building)?;
    if !rep.is_ok() {
        return Err(CoverError::Inconsistent(format!("product relations fail: {}", rep.failing_rows.join("; "))));
    }
    Ok(building)
}

/// L_chi = 1/2 sum_g eps_chi(g) [D_g], for every chi.
pub fn derive_building_data(cover: &CoverModel) -> Result<BuildingData, CoverError> {
    let classes: BTreeMap<GroupElement, DivisorClass> = cover
        .branch
        .keys()
        .map(|&g| Ok((g, cover.branch_class(g)?)))
        .collect::<Result<_, CoverError>>()?;
    let mut out = BTreeMap::new();
    for chi in Character::all(cover.r)? {
        let mut acc = cover.surface.zero_class();
        for (&g, cls) in &classes {
            if group::epsilon(chi, g)? == 1 {
                acc = acc.checked_add(cls)?;
            }
        }
        let half = acc.halve().ok_or(CoverError::Parity { chi })?;
        out.insert(chi, half);
    }
    Ok(out)
}

/// Outcome of checking the product relations.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ProdReport {
    /// Unordered pairs (chi, chi') with chi <= chi' violating the relation.
    pub failing_pairs: Vec<(Character, Character)>,
    /// Rows of the explicit r = 2, 3, 4 systems that fail, in printed form.
    pub failing_rows: Vec<String>,
}

impl ProdReport {
    pub fn is_ok(&self) -> bool {
        self.failing_pairs.is_empty() && self.failing_rows.is_empty()
    }
}

/// One row of an explicit relation system.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Row {
    /// 2 L_chi = sum of the listed D_g.
    Double(&'static str, &'static [&'static str]),
    /// L_target = L_a + L_b - sum of the listed D_g.
    Sum(&'static str, &'static str, &'static str, &'static [&'static str]),
}

const ROWS_R2: &[Row] = &[
    Row::Double("10", &["10", "11"]),
    Row::Double("01", &["01", "11"]),
    Row::Double("11", &["01", "10"]),
    Row::Sum("11", "10", "01", &["11"]),
    Row::Sum("01", "10", "11", &["10"]),
    Row::Sum("10", "01", "11", &["01"]),
];

const ROWS_R3: &[Row] = &[
    Row::Double("100", &["100", "110", "101", "111"]),
    Row::Double("010", &["010", "110", "011", "111"]),
    Row::Double("001", &["001", "101", "011", "111"]),
    Row::Sum("110", "100", "010", &["110", "111"]),
    Row::Sum("101", "100", "001", &["101", "111"]),
    Row::Sum("011", "010", "001", &["011", "111"]),
    Row::Sum("111", "110", "001", &["011", "101"]),
];

// In the r = 2 system the last two rows subtract D10 and D01 respectively,
// as eps_{chi,chi'} dictates.
// The L1001 and L1110 rows carry the index sets forced by eps_{chi,chi'}:
// D1011 in the first, and 1100, 1010, 1101, 1011 in the second.
const ROWS_R4: &[Row] = &[
    Row::Double("1000", &["1000", "1100", "1010", "1001", "1110", "1101", "1011", "1111"]),
    Row::Double("0100", &["0100", "1100", "0110", "0101", "1110", "1101", "0111", "1111"]),
    Row::Double("0010", &["0010", "1010", "0110", "0011", "1110", "1011", "0111", "1111"]),
    Row::Double("0001", &["0001", "1001", "0101", "0011", "1101", "1011", "0111", "1111"]),
    Row::Sum("1100", "1000", "0100", &["1100", "1110", "1101", "1111"]),
    Row::Sum("1010", "1000", "0010", &["1010", "1110", "1011", "1111"]),
    Row::Sum("1001", "1000", "0001", &["1001", "1101", "1011", "1111"]),
    Row::Sum("0110", "0100", "0010", &["0110", "1110", "0111", "1111"]),
    Row::Sum("0101", "0100", "0001", &["0101", "1101", "0111", "1111"]),
    Row::Sum("0011", "0010", "0001", &["0011", "1011", "0111", "1111"]),
    Row::Sum("1110", "1000", "0110", &["1100", "1010", "1101", "1011"]),
    Row::Sum("1011", "1000", "0011", &["1010", "1001", "1110", "1101"]),
    Row::Sum("0111", "0110", "0001", &["0101", "0011", "1011", "1101"]),
    Row::Sum("1101", "1100", "0001", &["1001", "0101", "0111", "1011"]),
    Row::Sum("1111", "1100", "0011", &["1010", "1001", "0110", "0101"]),
];

/// The explicit relation system for rank r (empty for r = 1).
pub fn explicit_rows(r: u8) -> &'static [Row] {
    match r {
        2 => ROWS_R2,
        3 => ROWS_R3,
        4 => ROWS_R4,
        _ => &[],
    }
}

impl fmt::Display for Row {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Row::Double(chi, gs) => {
                write!(f, "2L{chi} = ")?;
                let parts: Vec<String> = gs.iter().map(|g| format!("D{g}")).collect();
                f.write_str(&parts.join(" + "))
            }
            Row::Sum(t, a, b, gs) => {
                write!(f, "L{t} = L{a} + L{b}")?;
                for g in gs.iter() {
                    write!(f, " - D{g}")?;
                }
                Ok(())
            }
        }
    }
}

pub fn check_prod_relations(cover: &CoverModel, building: &BuildingData) -> Result<ProdReport, CoverError> {
    let mut report = ProdReport::default();
    let zero = cover.surface.zero_class();
    let l = |chi: &Character| building.get(chi).cloned();
    let chars = Character::all(cover.r)?;
    let classes: BTreeMap<GroupElement, DivisorClass> = GroupElement::nonzero(cover.r)?
        .into_iter()
        .map(|g| Ok((g, cover.branch_class(g)?)))
        .collect::<Result<_, CoverError>>()?;
    for (i, &a) in chars.iter().enumerate() {
        for &b in &chars[i..] {
            let ok = (|| -> Result<bool, CoverError> {
                let (Some(la), Some(lb), Some(lab)) = (l(&a), l(&b), l(&a.as_element().add(b.as_element())?.as_character()))
                else {
                    return Ok(false);
                };
                if la.len() != zero.len() || lb.len() != zero.len() || lab.len() != zero.len() {
                    return Ok(false);
                }
                let mut rhs = lab;
                for (&g, cls) in &classes {
                    if group::epsilon2(a, b, g)? == 1 {
                        rhs = &rhs + cls;
                    }
                }
                Ok(&la + &lb == rhs)
            })()?;
            if !ok {
                report.failing_pairs.push((a, b));
            }
        }
    }
    for row in explicit_rows(cover.r) {
        let parse_c = |s: &str| s.parse::<Character>();
        let parse_g = |s: &str| s.parse::<GroupElement>();
        let sum_d = |gs: &[&str]| -> Result<DivisorClass, CoverError> {
            let mut acc = zero.clone();
            for g in gs {
                acc = &acc + &classes[&parse_g(g)?];
            }
            Ok(acc)
        };
        let holds = match row {
            Row::Double(chi, gs) => match l(&parse_c(chi)?) {
                Some(lc) if lc.len() == zero.len() => lc.scale(2) == sum_d(gs)?,
                _ => false,
            },
            Row::Sum(t, a, b, gs) => match (l(&parse_c(t)?), l(&parse_c(a)?), l(&parse_c(b)?)) {
                (Some(lt), Some(la), Some(lb)) if [&lt, &la, &lb].iter().all(|c| c.len() == zero.len()) => {
                    lt == &(&la + &lb) - &sum_d(gs)?
                }
                _ => false,
            },
        };
        if !holds {
            report.failing_rows.push(row.to_string());
        }
    }
    Ok(report)
}

/// The cover S/H -> base, with D'_h = sum of D_g over g mapping to h.
pub fn quotient_cover(cover: &CoverModel, subgroup: &BTreeSet<GroupElement>) -> Result<CoverModel, CoverError> {
    let q = QuotientMap::new(cover.r, subgroup)?;
    if q.target_rank() == 0 {
        return Err(CoverError::Domain("quotient by the whole group".into()));
    }
    let mut out = cover.clone();
    out.r = q.target_rank();
    out.branch = BTreeMap::new();
    for (&g, d) in &cover.branch {
        let h = q.apply(g)?;
        if h.is_zero() {
            continue;
        }
        let slot = out.branch.entry(h).or_default();
        for (&c, &k) in d {
            *slot.entry(c).or_insert(0) += k;
        }
    }
    Ok(out)
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    pub fn g(s: &str) -> GroupElement {
        s.parse().unwrap()
    }
    fn c(s: &str) -> Character {
        s.parse().unwrap()
    }

    /// A plane model with one curve of the given degree per listed element.
    pub fn plane_model(r: u8, curves: &[(&str, i64)]) -> CoverModel {
        let mut m = CoverModel::new(r).unwrap();
        for (i, (el, d)) in curves.iter().enumerate() {
            let id = m.add_curve(&format!("C{i}"), *d, &[], true).unwrap();
            m.assign(g(el), id, 1).unwrap();
        }
        m
    }

    #[test]
    fn total_ramification() {
        assert!(is_totally_ramified(&plane_model(2, &[("10", 1), ("01", 1)])));
        assert!(!is_totally_ramified(&plane_model(2, &[("11", 2)])));
        let p48 = plane_model(3, &[("100", 1), ("010", 1), ("001", 1), ("111", 1)]);
        assert!(is_totally_ramified(&p48));
        assert!(!is_totally_ramified(&plane_model(3, &[("110", 1), ("011", 1), ("101", 1)])));
    }

    #[test]
    fn building_data_two_lines_and_cubic() {
        let m = plane_model(2, &[("10", 1), ("01", 1), ("11", 3)]);
        let l = derive_building_data(&m).unwrap();
        assert_eq!(l[&c("10")].to_string(), "2H");
        assert_eq!(l[&c("01")].to_string(), "2H");
        assert_eq!(l[&c("11")].to_string(), "H");
        assert_eq!(l[&c("00")].to_string(), "0");
    }

    #[test]
    fn building_data_five_lines() {
        let m = plane_model(4, &[("1000", 1), ("0100", 1), ("0010", 1), ("0001", 1), ("1111", 1)]);
        let l = derive_building_data(&m).unwrap();
        let two: BTreeSet<String> =
            l.iter().filter(|(_, v)| v.degree() == 2).map(|(k, _)| k.to_string()).collect();
        let expected: BTreeSet<String> =
            ["1110", "1011", "0111", "1101", "1111"].iter().map(|s| s.to_string()).collect();
        assert_eq!(two, expected);
        assert_eq!(l.values().filter(|v| v.degree() == 1).count(), 10);
    }

    #[test]
    fn parity_error() {
        let m = plane_model(2, &[("10", 1), ("01", 2)]);
        assert_eq!(derive_building_data(&m), Err(CoverError::Parity { chi: c("10") }));
        let m = plane_model(2, &[("10", 1), ("01", 2), ("11", 2)]);
        assert!(matches!(derive_building_data(&m), Err(CoverError::Parity { .. })));
    }

    #[test]
    fn explicit_rows_match_epsilon2() {
        for r in 2..=4u8 {
            for row in explicit_rows(r) {
                let (a, b, gs): (Character, Character, &[&str]) = match row {
                    Row::Double(chi, gs) => (c(chi), c(chi), gs),
                    Row::Sum(_, a, b, gs) => (c(a), c(b), gs),
                };
                let expected: BTreeSet<GroupElement> = GroupElement::nonzero(r)
                    .unwrap()
                    .into_iter()
                    .filter(|&x| group::epsilon2(a, b, x).unwrap() == 1)
                    .collect();
                let listed: BTreeSet<GroupElement> = gs.iter().map(|s| g(s)).collect();
                assert_eq!(listed.len(), gs.len(), "{row}");
                assert_eq!(listed, expected, "{row}");
                if let Row::Sum(t, ..) = row {
                    assert_eq!(c(t).as_element(), a.as_element().add(b.as_element()).unwrap());
                }
            }
        }
    }

    #[test]
    fn prod_relations_detect_perturbation() {
        let m = plane_model(2, &[("10", 1), ("01", 1), ("11", 3)]);
        let mut l = derive_building_data(&m).unwrap();
        assert!(check_prod_relations(&m, &l).unwrap().is_ok());
        let h = m.surface.hyperplane();
        let bumped = &l[&c("11")] + &h;
        l.insert(c("11"), bumped);
        let rep = check_prod_relations(&m, &l).unwrap();
        assert!(!rep.failing_pairs.is_empty());
        assert!(rep.failing_pairs.iter().all(|(a, b)| *a == c("11") || *b == c("11")
            || a.as_element().add(b.as_element()).unwrap() == g("11")));
        assert!(!rep.failing_rows.is_empty());
    }

    #[test]
    fn prod_relations_three_lines_and_conic() {
        let m = plane_model(3, &[("100", 1), ("010", 1), ("110", 1), ("011", 2)]);
        let l = derive_building_data(&m).unwrap();
        let degs: Vec<i64> =
            ["100", "010", "001", "110", "101", "011", "111"].iter().map(|s| l[&c(s)].degree()).collect();
        assert_eq!(degs, vec![1, 2, 1, 2, 2, 1, 1]);
        assert_eq!(Character::all(3).unwrap().len(), l.len());
        assert!(check_prod_relations(&m, &l).unwrap().is_ok());
    }

    #[test]
    fn quotients() {
        let m = plane_model(2, &[("10", 1), ("01", 1), ("11", 3)]);
        let h = group::span(2, &[g("10")]).unwrap();
        let q = quotient_cover(&m, &h).unwrap();
        assert_eq!(q.r, 1);
        let d: Vec<String> = q.branch[&g("1")].keys().map(|&id| q.name_of(id).to_string()).collect();
        assert_eq!(d, vec!["C1", "C2"]);
        let trivial = group::span(2, &[]).unwrap();
        assert_eq!(quotient_cover(&m, &trivial).unwrap(), m);
        let all = group::span(2, &[g("10"), g("01")]).unwrap();
        assert!(matches!(quotient_cover(&m, &all), Err(CoverError::Domain(_))));

        let p48 = plane_model(3, &[("100", 1), ("010", 1), ("001", 1), ("111", 1)]);
        let q = quotient_cover(&p48, &group::span(3, &[g("111")]).unwrap()).unwrap();
        assert_eq!(q.r, 2);
        let names: BTreeSet<&str> =
            q.branch.values().flat_map(|d| d.keys()).map(|&id| q.name_of(id)).collect();
        assert_eq!(names, ["C0", "C1", "C2"].into_iter().collect());
        assert_eq!(q.branch.len(), 3);
        assert!(is_totally_ramified(&q));
    }
}
