#![allow(dead_code)]

use std::path::PathBuf;

use rand::seq::SliceRandom;
use rand::Rng;
use z2cover::config;
use z2cover::cover::CoverModel;
use z2cover::group::GroupElement;
use z2cover::lattice::CenterId;

/// Fixture file and the label it must classify to.
pub const PROPOSITIONS: &[(&str, &str)] = &[
    ("p42", "Prop4.2/P1.221|P1.22.1"),
    ("p44", "Prop4.4/0.22"),
    ("p46", "Prop4.6/C.22[2,2,2]"),
    ("p48", "Prop4.8/P1.222|P1.2221"),
    ("p410", "Prop4.10/P1s.222"),
    ("p412", "Prop4.12/P1.2222"),
    ("p51", "Prop5.1/2.G2"),
    ("p53", "Prop5.3/1.B2.1"),
    ("p55", "Prop5.5/4.222"),
    ("p57", "Prop5.7/2.G22"),
    ("p59", "Prop5.9/4.2222"),
];

pub const EXTRA: &[(&str, &str)] = &[
    ("p44_c221", "Prop4.4/C.2,21[d=3]"),
    ("p410_c221", "Prop4.10/C.221[1,1,1]"),
];

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(format!("{name}.cfg"))
}

pub fn fixture_text(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn fixture(name: &str) -> CoverModel {
    config::parse(&fixture_text(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

pub fn all_fixture_names() -> Vec<String> {
    let dir = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures");
    let mut names: Vec<String> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.ok()?.path();
            (p.extension()? == "cfg").then(|| p.file_stem()?.to_str().map(String::from))?
        })
        .collect();
    names.sort();
    names
}

pub fn center(m: &CoverModel, name: &str) -> CenterId {
    m.center_by_name(name).unwrap_or_else(|| panic!("no center {name}")).id
}

/// A plane model with random points, curves and (possibly non-normal)
/// branch multiplicities. Not necessarily valid.
pub fn random_branch<R: Rng>(rng: &mut R, r: u8) -> CoverModel {
    let mut m = CoverModel::new(r).unwrap();
    let npts = rng.gen_range(0..4);
    let mut pts = Vec::new();
    for i in 0..npts {
        let parent = if !pts.is_empty() && rng.gen_bool(0.3) { Some(*pts.choose(rng).unwrap()) } else { None };
        pts.push(m.add_center(&format!("z{i}"), parent).unwrap());
    }
    let elements = GroupElement::nonzero(r).unwrap();
    for i in 0..rng.gen_range(1..6) {
        let deg = rng.gen_range(1..5);
        let mut mults: Vec<(CenterId, i64)> = Vec::new();
        for &z in &pts {
            if rng.gen_bool(0.4) {
                mults.push((z, rng.gen_range(1..3).min(deg)));
            }
        }
        let id = m.add_curve(&format!("C{i}"), deg, &mults, true).unwrap();
        for _ in 0..rng.gen_range(1..4) {
            m.assign(*elements.choose(rng).unwrap(), id, rng.gen_range(1..4)).unwrap();
        }
    }
    m
}

/// A normalized, totally ramified plane model with consistent parity.
pub fn random_valid<R: Rng>(rng: &mut R, r: u8) -> CoverModel {
    let elements = GroupElement::nonzero(r).unwrap();
    loop {
        let mut m = CoverModel::new(r).unwrap();
        let p = m.add_center("p", None).unwrap();
        let mut odd = GroupElement::zero(r).unwrap();
        for i in 0..rng.gen_range(r as usize..r as usize + 4) {
            let deg = rng.gen_range(1..5);
            let mult = rng.gen_range(0..deg.min(3));
            let g = *elements.choose(rng).unwrap();
            let id = m.add_curve(&format!("C{i}"), deg, &[(p, mult)], true).unwrap();
            m.assign(g, id, 1).unwrap();
            if deg % 2 == 1 {
                odd = odd.add(g).unwrap();
            }
        }
        if !odd.is_zero() {
            let id = m.add_curve("Fix", 1, &[], true).unwrap();
            m.assign(odd, id, 1).unwrap();
        }
        if z2cover::cover::is_totally_ramified(&m) {
            return m;
        }
    }
}
