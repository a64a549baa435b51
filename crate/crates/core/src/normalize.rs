//! Normalization (steps 1 and 2), blow-up pullback, the smoothness test
//! and the resolution loop.

use std::collections::{BTreeMap, BTreeSet};

use crate::cover::{BranchData, BuildingData, CompId, CoverError, CoverModel, CurveComponent};
use crate::group::{self, Character, GroupElement};
use crate::lattice::{self, CenterId, DivisorClass};

fn class_map(components: &[CurveComponent]) -> BTreeMap<CompId, DivisorClass> {
    components.iter().map(|c| (c.id, c.class.clone())).collect()
}

fn lower_building(
    building: &mut BuildingData,
    delta: &DivisorClass,
    q: i64,
    hit: impl Fn(Character) -> bool,
) -> Result<(), CoverError> {
    for (chi, l) in building.iter_mut() {
        if hit(*chi) {
            *l = l.checked_add(&delta.scale(-q))?;
        }
    }
    Ok(())
}

/// Step 1: a component of multiplicity k = 2q + e in D_g keeps e copies,
/// and every L_chi with chi(g) = 1 loses q times its class.
pub fn step1_reduce(
    branch: &BranchData,
    building: &BuildingData,
    components: &[CurveComponent],
) -> Result<(BranchData, BuildingData), CoverError> {
    let mut b = branch.clone();
    let mut l = building.clone();
    step1_in_place(&mut b, Some(&mut l), &class_map(components))?;
    Ok((b, l))
}

fn step1_in_place(
    branch: &mut BranchData,
    mut building: Option<&mut BuildingData>,
    classes: &BTreeMap<CompId, DivisorClass>,
) -> Result<bool, CoverError> {
    let mut changed = false;
    for (&g, d) in branch.iter_mut() {
        for (c, k) in d.iter_mut() {
            let q = (*k / 2) as i64;
            if q == 0 {
                continue;
            }
            *k %= 2;
            changed = true;
            if let Some(l) = building.as_deref_mut() {
                lower_building(l, &classes[c], q, |chi| group::pair(chi, g) == Ok(1))?;
            }
        }
        d.retain(|_, k| *k > 0);
    }
    branch.retain(|_, d| !d.is_empty());
    Ok(changed)
}

/// Step 2: a component lying in D_g and D_h moves to D_{g+h}, and every
/// L_chi with chi(g) = chi(h) = 1 loses its class. Stops on a component as
/// soon as the move creates a double copy, which step 1 then removes.
pub fn step2_disjoin(
    branch: &BranchData,
    building: &BuildingData,
    components: &[CurveComponent],
) -> Result<(BranchData, BuildingData), CoverError> {
    let mut b = branch.clone();
    let mut l = building.clone();
    let comps: Vec<CompId> = components.iter().map(|c| c.id).collect();
    let gs: Vec<GroupElement> = b.keys().copied().collect();
    step2_in_place(&mut b, Some(&mut l), &class_map(components), &comps, &gs)?;
    Ok((b, l))
}

fn step2_in_place(
    branch: &mut BranchData,
    mut building: Option<&mut BuildingData>,
    classes: &BTreeMap<CompId, DivisorClass>,
    comp_order: &[CompId],
    g_order: &[GroupElement],
) -> Result<bool, CoverError> {
    let mut changed = false;
    let rank_g = |g: &GroupElement| g_order.iter().position(|x| x == g).unwrap_or(usize::MAX);
    for c in comp_order {
        loop {
            let mut hosts: Vec<GroupElement> =
                branch.iter().filter(|(_, d)| d.get(c).is_some_and(|&k| k == 1)).map(|(&g, _)| g).collect();
            if hosts.len() < 2 {
                break;
            }
            hosts.sort_by_key(|g| (rank_g(g), *g));
            let (g, h) = (hosts[0], hosts[1]);
            let k = g.add(h)?;
            for x in [g, h] {
                let d = branch.get_mut(&x).expect("host exists");
                d.remove(c);
            }
            *branch.entry(k).or_default().entry(*c).or_insert(0) += 1;
            changed = true;
            if let Some(l) = building.as_deref_mut() {
                lower_building(l, &classes[c], 1, |chi| {
                    group::pair(chi, g) == Ok(1) && group::pair(chi, h) == Ok(1)
                })?;
            }
            if branch[&k][c] > 1 {
                break;
            }
        }
    }
    branch.retain(|_, d| !d.is_empty());
    Ok(changed)
}

/// Steps 1 and 2 to a fixpoint, with the given processing orders.
/// Returns the normalized branch and, if supplied, the adjusted building data.
pub fn normalize_branch(
    branch: &BranchData,
    building: Option<&BuildingData>,
    components: &[CurveComponent],
    comp_order: &[CompId],
    g_order: &[GroupElement],
) -> Result<(BranchData, Option<BuildingData>), CoverError> {
    let classes = class_map(components);
    let mut b = branch.clone();
    let mut l = building.cloned();
    loop {
        let c1 = step1_in_place(&mut b, l.as_mut(), &classes)?;
        let c2 = step2_in_place(&mut b, l.as_mut(), &classes, comp_order, g_order)?;
        if !c1 && !c2 {
            break;
        }
    }
    Ok((b, l))
}

fn finish(cover: &CoverModel, branch: BranchData) -> CoverModel {
    let mut out = cover.clone();
    out.branch = branch;
    let used = out.branch_components();
    out.components.retain(|c| used.contains(&c.id));
    out
}

/// Normalize in the default order (component id, then group element).
pub fn normalize(cover: &CoverModel) -> Result<CoverModel, CoverError> {
    let comps: Vec<CompId> = cover.components.iter().map(|c| c.id).collect();
    let gs: Vec<GroupElement> = GroupElement::nonzero(cover.r)?;
    normalize_ordered(cover, &comps, &gs)
}

pub fn normalize_ordered(
    cover: &CoverModel,
    comp_order: &[CompId],
    g_order: &[GroupElement],
) -> Result<CoverModel, CoverError> {
    let (b, _) = normalize_branch(&cover.branch, None, &cover.components, comp_order, g_order)?;
    Ok(finish(cover, b))
}

/// Normalize while carrying the building data through the steps.
pub fn normalize_with_building(cover: &CoverModel) -> Result<(CoverModel, BuildingData), CoverError> {
    let l = crate::cover::derive_building_data(cover)?;
    let comps: Vec<CompId> = cover.components.iter().map(|c| c.id).collect();
    let gs = GroupElement::nonzero(cover.r)?;
    let (b, l) = normalize_branch(&cover.branch, Some(&l), &cover.components, &comps, &gs)?;
    Ok((finish(cover, b), l.expect("building data carried")))
}

/// Blow up the pending point `x` and pull the cover back. Each D_g gains
/// mult_x(D_g) copies of the new exceptional curve. Not normalized.
pub fn pull_back(cover: &CoverModel, x: CenterId) -> Result<CoverModel, CoverError> {
    if !cover.is_proper(x) {
        return Err(CoverError::Precondition(format!(
            "center {} is not a point of the current surface",
            cover.center(x).map_or("?".to_string(), |c| c.name.clone())
        )));
    }
    let mut out = cover.clone();
    let pos = out.pending.iter().position(|c| c.id == x).expect("pending");
    let center = out.pending.remove(pos);
    out.surface = lattice::blow_up(&cover.surface, center.clone())?;
    let rank = out.surface.rank();
    let mut mult_of: BTreeMap<CompId, u32> = BTreeMap::new();
    for comp in out.components.iter_mut() {
        let m = comp.mults.remove(&x).unwrap_or(0);
        mult_of.insert(comp.id, m);
        let mut v = comp.class.extend(rank).coeffs().to_vec();
        v[rank - 1] = -(m as i64);
        comp.class = DivisorClass::new(v);
    }
    let gains: BTreeMap<GroupElement, u32> = out
        .branch
        .iter()
        .map(|(&g, d)| (g, d.iter().map(|(c, k)| k * mult_of[c]).sum::<u32>()))
        .filter(|&(_, m)| m > 0)
        .collect();
    if !gains.is_empty() {
        let name = out.fresh_name(&format!("E{}", center.name));
        let mults = out.children(x).into_iter().map(|c| (c, 1)).collect();
        let e = out.add_component(&name, DivisorClass::basis(rank, rank - 1), mults, true)?;
        for (g, m) in gains {
            out.assign(g, e, m)?;
        }
    }
    Ok(out)
}

/// Why a point is (or is not) a smooth point of the cover.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Diagnosis {
    Smooth,
    /// Three or more branch components pass through the point.
    TooMany(Vec<CompId>),
    /// A branch component has a multiple point there.
    ComponentSingular(CompId),
    /// Two components share an infinitely near point.
    Tangent(CompId, CompId),
    /// Two components carry the same group element.
    Dependent(CompId, CompId),
}

impl Diagnosis {
    pub fn is_smooth(&self) -> bool {
        matches!(self, Diagnosis::Smooth)
    }

    pub fn describe(&self, cover: &CoverModel) -> String {
        let n = |c: &CompId| cover.name_of(*c).to_string();
        match self {
            Diagnosis::Smooth => "smooth".into(),
            Diagnosis::TooMany(cs) => {
                format!("{} branch components meet: {}", cs.len(), cs.iter().map(n).collect::<Vec<_>>().join(", "))
            }
            Diagnosis::ComponentSingular(c) => format!("component {} is singular there", n(c)),
            Diagnosis::Tangent(a, b) => format!("components {} and {} are tangent", n(a), n(b)),
            Diagnosis::Dependent(a, b) => format!("components {} and {} carry the same element", n(a), n(b)),
        }
    }
}

pub fn is_smooth_over(cover: &CoverModel, x: CenterId) -> Result<Diagnosis, CoverError> {
    if !cover.is_normal() {
        return Err(CoverError::Precondition("the cover is not normalized".into()));
    }
    if !cover.is_proper(x) {
        return Err(CoverError::Precondition("not a point of the current surface".into()));
    }
    let through: Vec<(CompId, GroupElement)> = cover
        .branch
        .iter()
        .flat_map(|(&g, d)| d.keys().map(move |&c| (c, g)))
        .filter(|&(c, _)| cover.mult(c, x) > 0)
        .collect::<BTreeMap<_, _>>()
        .into_iter()
        .collect();
    if through.len() >= 3 {
        return Ok(Diagnosis::TooMany(through.iter().map(|t| t.0).collect()));
    }
    if let Some(&(c, _)) = through.iter().find(|&&(c, _)| cover.mult(c, x) >= 2) {
        return Ok(Diagnosis::ComponentSingular(c));
    }
    if let [(a, ga), (b, gb)] = through[..] {
        let kids = cover.children(x);
        if kids.iter().any(|&y| cover.mult(a, y) > 0 && cover.mult(b, y) > 0) {
            return Ok(Diagnosis::Tangent(a, b));
        }
        if ga == gb {
            return Ok(Diagnosis::Dependent(a, b));
        }
    }
    Ok(Diagnosis::Smooth)
}

/// Every singular point of the surface among the declared points, by name.
pub fn singular_points(cover: &CoverModel) -> Result<Vec<(CenterId, Diagnosis)>, CoverError> {
    let mut pts: Vec<_> = cover.pending.iter().filter(|c| cover.is_proper(c.id)).collect();
    pts.sort_by(|a, b| a.name.cmp(&b.name));
    let mut out = Vec::new();
    for c in pts {
        let d = is_smooth_over(cover, c.id)?;
        if !d.is_smooth() {
            out.push((c.id, d));
        }
    }
    Ok(out)
}

/// Intersection of two components left over after the declared points.
/// Positive means they meet at points nobody declared.
pub fn residual_intersection(cover: &CoverModel, a: CompId, b: CompId) -> Result<i64, CoverError> {
    let ca = cover.class_of(a)?;
    let cb = cover.class_of(b)?;
    let mut r = lattice::intersect(ca, cb)?;
    for z in &cover.pending {
        r -= cover.mult(a, z.id) as i64 * cover.mult(b, z.id) as i64;
    }
    Ok(r)
}

/// Pairs of components under the same group element meeting off the declared points.
pub fn undeclared_crossings(cover: &CoverModel) -> Result<Vec<(CompId, CompId, i64)>, CoverError> {
    let mut out = Vec::new();
    for d in cover.branch.values() {
        let cs: Vec<CompId> = d.keys().copied().collect();
        for (i, &a) in cs.iter().enumerate() {
            for &b in &cs[i + 1..] {
                let r = residual_intersection(cover, a, b)?;
                if r > 0 {
                    out.push((a, b, r));
                }
            }
        }
    }
    Ok(out)
}

/// Declare each undeclared same-element crossing as a new point n1, n2, ...
pub fn materialize_crossings(cover: &CoverModel) -> Result<(CoverModel, usize), CoverError> {
    let mut out = cover.clone();
    let mut count = 0;
    let mut serial = 1;
    for (a, b, r) in undeclared_crossings(cover)? {
        for _ in 0..r {
            let name = loop {
                let n = format!("n{serial}");
                serial += 1;
                if out.center_by_name(&n).is_none() && out.component_by_name(&n).is_none() {
                    break n;
                }
            };
            let z = out.add_center(&name, None)?;
            for c in [a, b] {
                out.component_mut(c).expect("known").mults.insert(z, 1);
            }
            count += 1;
        }
    }
    Ok((out, count))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrailStep {
    pub round: usize,
    pub center: String,
    /// Changed D_g entries as "g: before -> after".
    pub diff: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Resolution {
    pub model: CoverModel,
    pub rounds: usize,
    pub trail: Vec<TrailStep>,
}

fn branch_diff(before: &CoverModel, after: &CoverModel) -> Vec<String> {
    let mut gs: BTreeSet<GroupElement> = before.branch.keys().copied().collect();
    gs.extend(after.branch.keys().copied());
    gs.into_iter()
        .filter_map(|g| {
            let (x, y) = (before.describe_branch(g), after.describe_branch(g));
            (x != y).then(|| format!("{g}: {x} -> {y}"))
        })
        .collect()
}

/// Normalize, then repeatedly blow up all singular points of the current
/// round (by name), pulling back and normalizing after each.
pub fn resolve(cover: &CoverModel, max_rounds: usize) -> Result<Resolution, CoverError> {
    let mut model = normalize(cover)?;
    let mut trail = Vec::new();
    let mut rounds = 0;
    loop {
        let mut sing = singular_points(&model)?;
        if sing.is_empty() {
            let (m, added) = materialize_crossings(&model)?;
            if added == 0 {
                break;
            }
            model = m;
            sing = singular_points(&model)?;
            if sing.is_empty() {
                return Err(CoverError::Inconsistent("declared crossings did not produce singular points".into()));
            }
        }
        rounds += 1;
        if rounds > max_rounds {
            return Err(CoverError::NonTermination { max_rounds });
        }
        for (x, _) in sing {
            if !model.is_proper(x) || is_smooth_over(&model, x)?.is_smooth() {
                continue;
            }
            let name = model.center(x).map(|c| c.name.clone()).unwrap_or_default();
            let next = normalize(&pull_back(&model, x)?)?;
            trail.push(TrailStep { round: rounds, center: name, diff: branch_diff(&model, &next) });
            model = next;
        }
    }
    Ok(Resolution { model, rounds, trail })
}

/// True when the model is normal with no singular points, declared or not.
pub fn is_smooth(cover: &CoverModel) -> Result<bool, CoverError> {
    Ok(cover.is_normal() && singular_points(cover)?.is_empty() && undeclared_crossings(cover)?.is_empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cover::derive_building_data;

    fn g(s: &str) -> GroupElement {
        s.parse().unwrap()
    }

    /// Quartic with a tacnode at x (y infinitely near) and a conic through x, y.
    fn tacnode_model() -> CoverModel {
        let mut m = CoverModel::new(2).unwrap();
        let x = m.add_center("x", None).unwrap();
        let y = m.add_center("y", Some(x)).unwrap();
        let q = m.add_curve("Q", 4, &[(x, 2), (y, 2)], true).unwrap();
        let c = m.add_curve("C", 2, &[(x, 1), (y, 1)], true).unwrap();
        m.assign(g("10"), q, 1).unwrap();
        m.assign(g("01"), c, 1).unwrap();
        m
    }

    #[test]
    fn step1_examples() {
        let mut m = tacnode_model();
        let x = m.center_by_name("x").unwrap().id;
        m = pull_back(&m, x).unwrap();
        assert_eq!(m.describe_branch(g("10")), "Q + 2*Ex");
        assert_eq!(m.describe_branch(g("01")), "C + Ex");
        let l = derive_building_data(&m).unwrap();
        let (b, l2) = step1_reduce(&m.branch, &l, &m.components).unwrap();
        let e = m.component_by_name("Ex").unwrap().id;
        assert!(!b[&g("10")].contains_key(&e));
        let ex = m.component(e).unwrap().class.clone();
        for (chi, v) in &l2 {
            let expect = if group::pair(*chi, g("10")).unwrap() == 1 { &l[chi] - &ex } else { l[chi].clone() };
            assert_eq!(*v, expect);
        }
        let (b2, l3) = step1_reduce(&b, &l2, &m.components).unwrap();
        assert_eq!((b2, l3), (b.clone(), l2));

        let mut branch = b.clone();
        branch.get_mut(&g("01")).unwrap().insert(e, 3);
        let (b4, _) = step1_reduce(&branch, &l, &m.components).unwrap();
        assert_eq!(b4[&g("01")][&e], 1);
    }

    #[test]
    fn step2_moves_to_sum() {
        let mut m = CoverModel::new(2).unwrap();
        let a = m.add_curve("A", 1, &[], true).unwrap();
        let b = m.add_curve("B", 1, &[], true).unwrap();
        let e = m.add_curve("F", 1, &[], true).unwrap();
        m.assign(g("10"), a, 1).unwrap();
        m.assign(g("11"), b, 1).unwrap();
        m.assign(g("10"), e, 1).unwrap();
        m.assign(g("11"), e, 1).unwrap();
        let l = BuildingData::new();
        let (br, _) = step2_disjoin(&m.branch, &l, &m.components).unwrap();
        assert_eq!(br[&g("01")].keys().copied().collect::<Vec<_>>(), vec![e]);
        assert!(!br[&g("10")].contains_key(&e));
        let (same, _) = step2_disjoin(&br, &l, &m.components).unwrap();
        assert_eq!(same, br);
    }

    #[test]
    fn normalization_tracks_building_data() {
        let mut m = tacnode_model();
        let x = m.center_by_name("x").unwrap().id;
        m = pull_back(&m, x).unwrap();
        let (n, l) = normalize_with_building(&m).unwrap();
        assert_eq!(l, derive_building_data(&n).unwrap());
        assert!(n.is_normal());
        assert_eq!(normalize(&n).unwrap(), n);
    }

    #[test]
    fn three_concurrent_lines_pullback() {
        let mut m = CoverModel::new(2).unwrap();
        let p = m.add_center("p", None).unwrap();
        for (i, el) in ["10", "01", "11"].iter().enumerate() {
            let id = m.add_curve(&format!("L{i}"), 1, &[(p, 1)], true).unwrap();
            m.assign(g(el), id, 1).unwrap();
        }
        assert!(matches!(is_smooth_over(&m, p).unwrap(), Diagnosis::TooMany(_)));
        let pb = pull_back(&m, p).unwrap();
        let e = pb.component_by_name("Ep").unwrap().id;
        assert_eq!(pb.elements_of(e).len(), 3);
        let n = normalize(&pb).unwrap();
        assert!(n.component_by_name("Ep").is_none());
        let res = resolve(&m, 6).unwrap();
        assert_eq!(res.rounds, 1);
        assert!(is_smooth(&res.model).unwrap());
    }

    #[test]
    fn smoothness_diagnosis() {
        let mut m = CoverModel::new(2).unwrap();
        let p = m.add_center("p", None).unwrap();
        let a = m.add_curve("A", 1, &[(p, 1)], true).unwrap();
        let b = m.add_curve("B", 1, &[(p, 1)], true).unwrap();
        m.assign(g("10"), a, 1).unwrap();
        m.assign(g("01"), b, 1).unwrap();
        assert_eq!(is_smooth_over(&m, p).unwrap(), Diagnosis::Smooth);
        let mut same = m.clone();
        same.branch.clear();
        same.assign(g("10"), a, 1).unwrap();
        same.assign(g("10"), b, 1).unwrap();
        assert_eq!(is_smooth_over(&same, p).unwrap(), Diagnosis::Dependent(a, b));

        let t = tacnode_model();
        let x = t.center_by_name("x").unwrap().id;
        let q = t.component_by_name("Q").unwrap().id;
        assert_eq!(is_smooth_over(&t, x).unwrap(), Diagnosis::ComponentSingular(q));
        let y = t.center_by_name("y").unwrap().id;
        assert!(is_smooth_over(&t, y).is_err());
    }

    #[test]
    fn tacnode_resolves_in_two_rounds() {
        let res = resolve(&tacnode_model(), 6).unwrap();
        assert_eq!(res.rounds, 2);
        let m = &res.model;
        assert_eq!(m.branch_class(g("10")).unwrap().to_string(), "4H-2E1-2E2");
        assert_eq!(m.describe_branch(g("01")), "C + Ex");
        assert_eq!(m.component_by_name("Ex").unwrap().class.to_string(), "E1-E2");
        assert_eq!(res.trail.iter().map(|s| s.center.as_str()).collect::<Vec<_>>(), vec!["x", "y"]);
        assert!(is_smooth(m).unwrap());
    }

    #[test]
    fn resolve_reports_non_termination() {
        assert_eq!(resolve(&tacnode_model(), 1), Err(CoverError::NonTermination { max_rounds: 1 }));
    }

    #[test]
    fn undeclared_same_element_crossing() {
        let mut m = CoverModel::new(2).unwrap();
        let a = m.add_curve("A", 1, &[], true).unwrap();
        let b = m.add_curve("B", 1, &[], true).unwrap();
        let c = m.add_curve("C", 2, &[], true).unwrap();
        m.assign(g("10"), a, 1).unwrap();
        m.assign(g("10"), b, 1).unwrap();
        m.assign(g("01"), c, 1).unwrap();
        assert_eq!(undeclared_crossings(&m).unwrap(), vec![(a, b, 1)]);
        let res = resolve(&m, 6).unwrap();
        assert_eq!(res.rounds, 1);
        assert_eq!(res.trail[0].center, "n1");
        assert!(is_smooth(&res.model).unwrap());
    }
}
