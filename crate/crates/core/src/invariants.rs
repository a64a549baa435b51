//! Numerical invariants of a smooth cover model.

use std::fmt;

use crate::cover::{derive_building_data, CoverError, CoverModel};
use crate::lattice::{canonical, BlownPlane, DivisorClass};
use crate::normalize;

/// chi(O_S) = 2^r + 1/2 sum_{chi != 0} L_chi (L_chi + K). Smooth models only.
pub fn euler_characteristic(cover: &CoverModel) -> Result<i64, CoverError> {
    if !normalize::is_smooth(cover)? {
        return Err(CoverError::Precondition("euler characteristic needs a smooth normal model; resolve first".into()));
    }
    let l = derive_building_data(cover)?;
    let k = canonical(&cover.surface);
    let mut sum = 0i64;
    for (chi, lc) in &l {
        if chi.is_zero() {
            continue;
        }
        sum += lc.dot(&(lc + &k));
    }
    if sum % 2 != 0 {
        return Err(CoverError::Inconsistent(format!("odd sum {sum} in the Euler characteristic")));
    }
    Ok((1i64 << cover.r) + sum / 2)
}

/// 2K + sum [D_g], the base class whose pullback is 2K_S.
pub fn bicanonical_pullback(cover: &CoverModel) -> Result<DivisorClass, CoverError> {
    if !cover.is_normal() {
        return Err(CoverError::Precondition("bicanonical class needs a normalized model".into()));
    }
    Ok(&canonical(&cover.surface).scale(2) + &cover.total_branch_class()?)
}

/// K_S^2 = 2^r (K + D/2)^2, evaluated as 2^r (2K + D)^2 / 4.
pub fn canonical_square(cover: &CoverModel) -> Result<i64, CoverError> {
    let m = &canonical(&cover.surface).scale(2) + &cover.total_branch_class()?;
    let v = (1i64 << cover.r) * m.dot(&m);
    if v % 4 != 0 {
        return Err(CoverError::Inconsistent(format!("K^2 = {v}/4 is not an integer")));
    }
    Ok(v / 4)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Rational,
    Inconclusive,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Rational => "rational",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

/// Castelnuovo: chi = 1 and P2 = 0. P2 = 0 is certified when the
/// bicanonical class is negative on H or a negative multiple of one exceptional.
pub fn rationality_verdict(chi: i64, bicanonical: &DivisorClass) -> Verdict {
    if chi != 1 {
        return Verdict::Inconclusive;
    }
    let c = bicanonical.coeffs();
    let negative_on_h = c[0] < 0;
    let nonzero: Vec<i64> = c[1..].iter().copied().filter(|&v| v != 0).collect();
    let neg_exceptional = c[0] == 0 && nonzero.len() == 1 && nonzero[0] < 0;
    if negative_on_h || neg_exceptional {
        Verdict::Rational
    } else {
        Verdict::Inconclusive
    }
}

/// Genus g from 2g - 2 = n(2 g0 - 2) + sum (e - 1) count.
pub fn riemann_hurwitz_genus(sheets: i64, base_genus: i64, ramification: &[(i64, i64)]) -> Result<i64, CoverError> {
    if sheets < 1 || base_genus < 0 {
        return Err(CoverError::Inconsistent("sheets must be positive and base genus non-negative".into()));
    }
    let mut total = sheets * (2 * base_genus - 2);
    for &(e, count) in ramification {
        if e < 1 || e > sheets || count < 0 {
            return Err(CoverError::Inconsistent(format!("bad ramification ({e}, {count})")));
        }
        total += (e - 1) * count;
    }
    if total % 2 != 0 {
        return Err(CoverError::Inconsistent(format!("2g - 2 = {total} is odd")));
    }
    let g = (total + 2) / 2;
    if g < 0 {
        return Err(CoverError::Inconsistent(format!("negative genus {g}")));
    }
    Ok(g)
}

pub fn describe_surface(surface: &BlownPlane) -> String {
    if surface.centers().is_empty() {
        "P2".to_string()
    } else {
        let names: Vec<&str> = surface.centers().iter().map(|c| c.name.as_str()).collect();
        format!("P2 blown up at {}", names.join(","))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvariantReport {
    pub chi: i64,
    pub k_squared: i64,
    pub bicanonical: DivisorClass,
    pub verdict: Verdict,
    pub surface: String,
}

impl fmt::Display for InvariantReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "chi={}", self.chi)?;
        writeln!(f, "k2={}", self.k_squared)?;
        writeln!(f, "bicanonical={}", self.bicanonical)?;
        writeln!(f, "verdict={}", self.verdict)?;
        writeln!(f, "surface={}", self.surface)
    }
}

/// All invariants of a smooth model.
pub fn report(cover: &CoverModel) -> Result<InvariantReport, CoverError> {
    let chi = euler_characteristic(cover)?;
    let bicanonical = bicanonical_pullback(cover)?;
    Ok(InvariantReport {
        chi,
        k_squared: canonical_square(cover)?,
        verdict: rationality_verdict(chi, &bicanonical),
        bicanonical,
        surface: describe_surface(&cover.surface),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::GroupElement;

    fn g(s: &str) -> GroupElement {
        s.parse().unwrap()
    }

    fn lines_and_curves(r: u8, curves: &[(&str, i64)]) -> CoverModel {
        let mut m = CoverModel::new(r).unwrap();
        for (i, (el, d)) in curves.iter().enumerate() {
            let id = m.add_curve(&format!("C{i}"), *d, &[], true).unwrap();
            m.assign(g(el), id, 1).unwrap();
        }
        m
    }

    #[test]
    fn two_lines_and_a_cubic() {
        let m = lines_and_curves(2, &[("10", 1), ("01", 1), ("11", 3)]);
        let rep = report(&m).unwrap();
        assert_eq!((rep.chi, rep.k_squared), (1, 1));
        assert_eq!(rep.bicanonical.to_string(), "-H");
        assert_eq!(rep.verdict, Verdict::Rational);
        assert_eq!(rep.to_string(), "chi=1\nk2=1\nbicanonical=-H\nverdict=rational\nsurface=P2\n");
    }

    #[test]
    fn five_lines() {
        let m = lines_and_curves(4, &[("1000", 1), ("0100", 1), ("0010", 1), ("0001", 1), ("1111", 1)]);
        assert_eq!(euler_characteristic(&m).unwrap(), 1);
        assert_eq!(canonical_square(&m).unwrap(), 4);
    }

    #[test]
    fn three_general_lines() {
        let m = lines_and_curves(2, &[("10", 1), ("01", 1), ("11", 1)]);
        assert_eq!(canonical_square(&m).unwrap(), 9);
        assert_eq!(euler_characteristic(&m).unwrap(), 1);
    }

    #[test]
    fn chi_refuses_singular_models() {
        let mut m = CoverModel::new(2).unwrap();
        let p = m.add_center("p", None).unwrap();
        for (i, el) in ["10", "01", "11"].iter().enumerate() {
            let id = m.add_curve(&format!("L{i}"), 1, &[(p, 1)], true).unwrap();
            m.assign(g(el), id, 1).unwrap();
        }
        assert!(matches!(euler_characteristic(&m), Err(CoverError::Precondition(_))));
        let res = normalize::resolve(&m, 6).unwrap();
        assert_eq!(canonical_square(&res.model).unwrap(), 8);
        assert_eq!(euler_characteristic(&res.model).unwrap(), 1);
    }

    #[test]
    fn verdicts() {
        let neg_e: DivisorClass = "-2E2".parse().unwrap();
        assert_eq!(rationality_verdict(1, &neg_e.extend(3)), Verdict::Rational);
        assert_eq!(rationality_verdict(2, &neg_e.extend(3)), Verdict::Inconclusive);
        let mixed: DivisorClass = "-2E1+E2".parse().unwrap();
        assert_eq!(rationality_verdict(1, &mixed), Verdict::Inconclusive);
        assert_eq!(rationality_verdict(1, &"H".parse().unwrap()), Verdict::Inconclusive);
    }

    #[test]
    fn hurwitz() {
        assert_eq!(riemann_hurwitz_genus(2, 0, &[(2, 6)]).unwrap(), 2);
        assert_eq!(riemann_hurwitz_genus(1, 3, &[]).unwrap(), 3);
        assert!(riemann_hurwitz_genus(2, 0, &[(2, 3)]).is_err());
        assert!(riemann_hurwitz_genus(4, 0, &[]).is_err());
        assert!(riemann_hurwitz_genus(2, 0, &[(3, 1)]).is_err());
    }
}
