//! Line-oriented configuration format.
//!
//! ```text
//! [cover]
//! r = 2
//! pencil = p
//!
//! [centers]
//! x = plane
//! y = near(x)
//!
//! [components]
//! Q = degree 4, mult(x)=2, mult(y)=2
//!
//! [branch]
//! 10 = Q
//! ```
//!
//! Centers marked `blown` are already blown up; for them `mult` is the
//! negated exceptional coefficient of the class and may be negative.

use std::collections::BTreeMap;
use std::fmt;

use crate::cover::{CompId, CoverModel};
use crate::group::{GroupElement, GroupError, MAX_RANK};
use crate::lattice::{self, Center, CenterId, DivisorClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCode {
    Syntax,
    UnknownCenter,
    UnknownComponent,
    BadElement,
    BadLength,
    Duplicate,
    Missing,
    Rank,
    Invalid,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Syntax => "E-SYNTAX",
            ErrorCode::UnknownCenter => "E-UNKNOWN-CENTER",
            ErrorCode::UnknownComponent => "E-UNKNOWN-COMPONENT",
            ErrorCode::BadElement => "E-BAD-ELEMENT",
            ErrorCode::BadLength => "E-BAD-LENGTH",
            ErrorCode::Duplicate => "E-DUPLICATE",
            ErrorCode::Missing => "E-MISSING",
            ErrorCode::Rank => "E-RANK",
            ErrorCode::Invalid => "E-INVALID",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: usize,
    pub col: usize,
    pub code: ErrorCode,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}: {}: {}", self.line, self.col, self.code.as_str(), self.message)
    }
}

impl std::error::Error for ConfigError {}

/// All errors of a failed parse, in line order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigErrors(pub Vec<ConfigError>);

impl fmt::Display for ConfigErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigErrors {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Section {
    Cover,
    Centers,
    Components,
    Branch,
}

struct Entry<'a> {
    line: usize,
    key: &'a str,
    key_col: usize,
    value: &'a str,
    value_col: usize,
}

fn err(line: usize, col: usize, code: ErrorCode, message: impl Into<String>) -> ConfigError {
    ConfigError { line, col, code, message: message.into() }
}

fn is_ident(s: &str) -> bool {
    let mut cs = s.chars();
    matches!(cs.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && cs.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '\'')
}

/// Split `s` on commas, keeping the column of each trimmed piece.
fn split_commas(s: &str, base_col: usize) -> Vec<(&str, usize)> {
    let mut out = Vec::new();
    let mut start = 0;
    for (i, ch) in s.char_indices().chain(std::iter::once((s.len(), ','))) {
        if ch == ',' {
            let piece = &s[start..i];
            let lead = piece.len() - piece.trim_start().len();
            out.push((piece.trim(), base_col + start + lead));
            start = i + 1;
        }
    }
    out
}

pub fn parse(text: &str) -> Result<CoverModel, ConfigErrors> {
    let mut errors = Vec::new();
    let mut sections: BTreeMap<Section, Vec<Entry>> = BTreeMap::new();
    let mut seen_sections: BTreeMap<Section, usize> = BTreeMap::new();
    let mut current: Option<Section> = None;

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("");
        let trimmed = content.trim();
        if trimmed.is_empty() {
            continue;
        }
        let lead = content.len() - content.trim_start().len();
        if trimmed.starts_with('[') {
            let sec = match trimmed {
                "[cover]" => Some(Section::Cover),
                "[centers]" => Some(Section::Centers),
                "[components]" => Some(Section::Components),
                "[branch]" => Some(Section::Branch),
                _ => None,
            };
            match sec {
                Some(s) => {
                    if seen_sections.insert(s, line).is_some() {
                        errors.push(err(line, lead + 1, ErrorCode::Duplicate, format!("section {trimmed} repeated")));
                    }
                    current = Some(s);
                }
                None => errors.push(err(line, lead + 1, ErrorCode::Syntax, format!("unknown section {trimmed}"))),
            }
            continue;
        }
        let Some(sec) = current else {
            errors.push(err(line, lead + 1, ErrorCode::Syntax, "entry outside of any section"));
            continue;
        };
        let Some(eq) = content.find('=') else {
            errors.push(err(line, lead + 1, ErrorCode::Syntax, "expected `key = value`"));
            continue;
        };
        let key = content[..eq].trim();
        let after = &content[eq + 1..];
        let vlead = after.len() - after.trim_start().len();
        let value = after.trim();
        if key.is_empty() {
            errors.push(err(line, lead + 1, ErrorCode::Syntax, "missing key"));
            continue;
        }
        sections.entry(sec).or_default().push(Entry {
            line,
            key,
            key_col: lead + 1,
            value,
            value_col: eq + 1 + vlead + 1,
        });
    }

    // [cover]
    let mut r: Option<u8> = None;
    let mut pencil: Option<(String, usize, usize)> = None;
    for e in sections.get(&Section::Cover).map(Vec::as_slice).unwrap_or(&[]) {
        match e.key {
            "r" => {
                if r.is_some() {
                    errors.push(err(e.line, e.key_col, ErrorCode::Duplicate, "r given twice"));
                    continue;
                }
                match e.value.parse::<u8>() {
                    Ok(v) if (1..=MAX_RANK).contains(&v) => r = Some(v),
                    Ok(v) => errors.push(err(e.line, e.value_col, ErrorCode::Rank, format!("rank {v} outside 1..=4"))),
                    Err(_) => errors.push(err(e.line, e.value_col, ErrorCode::Syntax, "r must be an integer")),
                }
            }
            "pencil" => {
                if !is_ident(e.value) {
                    errors.push(err(e.line, e.value_col, ErrorCode::Syntax, "pencil must name a center"));
                } else {
                    pencil = Some((e.value.to_string(), e.line, e.value_col));
                }
            }
            k => errors.push(err(e.line, e.key_col, ErrorCode::Syntax, format!("unknown key {k} in [cover]"))),
        }
    }
    let Some(r) = r else {
        if !errors.iter().any(|e| e.code == ErrorCode::Rank) {
            errors.push(err(1, 1, ErrorCode::Missing, "[cover] must set r"));
        }
        errors.sort_by_key(|e| (e.line, e.col));
        return Err(ConfigErrors(errors));
    };
    let mut model = CoverModel::new(r).expect("rank checked");

    // [centers]
    for e in sections.get(&Section::Centers).map(Vec::as_slice).unwrap_or(&[]) {
        if !is_ident(e.key) {
            errors.push(err(e.line, e.key_col, ErrorCode::Syntax, format!("bad center name {:?}", e.key)));
            continue;
        }
        if model.center_by_name(e.key).is_some() {
            errors.push(err(e.line, e.key_col, ErrorCode::Duplicate, format!("center {} declared twice", e.key)));
            continue;
        }
        let parts = split_commas(e.value, e.value_col);
        let (kind, kcol) = parts[0];
        let parent = if kind == "plane" {
            None
        } else if let Some(inner) = kind.strip_prefix("near(").and_then(|s| s.strip_suffix(')')) {
            match model.center_by_name(inner.trim()) {
                Some(p) => Some(p.id),
                None => {
                    errors.push(err(e.line, kcol + 5, ErrorCode::UnknownCenter, format!("unknown center {}", inner.trim())));
                    continue;
                }
            }
        } else {
            errors.push(err(e.line, kcol, ErrorCode::Syntax, "expected `plane` or `near(NAME)`"));
            continue;
        };
        let mut blown = false;
        let mut bad = false;
        for &(flag, fcol) in &parts[1..] {
            if flag == "blown" && !blown {
                blown = true;
            } else {
                errors.push(err(e.line, fcol, ErrorCode::Syntax, format!("unexpected {flag:?}")));
                bad = true;
            }
        }
        if bad {
            continue;
        }
        let id = CenterId(model.next_center_id());
        let center = Center { id, name: e.key.to_string(), parent };
        if blown {
            if parent.is_some_and(|p| !model.surface.contains(p)) {
                errors.push(err(e.line, kcol, ErrorCode::Invalid, "a blown-up center needs a blown-up parent"));
                continue;
            }
            model.surface = lattice::blow_up(&model.surface, center).expect("parent checked");
        } else {
            model.pending.push(center);
        }
    }

    // [components]
    for e in sections.get(&Section::Components).map(Vec::as_slice).unwrap_or(&[]) {
        if !is_ident(e.key) {
            errors.push(err(e.line, e.key_col, ErrorCode::Syntax, format!("bad component name {:?}", e.key)));
            continue;
        }
        if model.component_by_name(e.key).is_some() || model.center_by_name(e.key).is_some() {
            errors.push(err(e.line, e.key_col, ErrorCode::Duplicate, format!("name {} already used", e.key)));
            continue;
        }
        let parts = split_commas(e.value, e.value_col);
        let (first, fcol) = parts[0];
        let degree = match first.strip_prefix("degree").map(str::trim).map(str::parse::<i64>) {
            Some(Ok(d)) => d,
            _ => {
                errors.push(err(e.line, fcol, ErrorCode::Syntax, "expected `degree N`"));
                continue;
            }
        };
        let mut class = vec![0i64; model.surface.rank()];
        class[0] = degree;
        let mut mults = BTreeMap::new();
        let mut irreducible = true;
        let mut ok = true;
        let mut seen_centers = Vec::new();
        for &(p, pcol) in &parts[1..] {
            if p == "reducible" && irreducible {
                irreducible = false;
                continue;
            }
            let parsed = p.strip_prefix("mult(").and_then(|s| s.split_once(")=").or_else(|| s.split_once(')')));
            let Some((cname, rest)) = parsed else {
                errors.push(err(e.line, pcol, ErrorCode::Syntax, format!("unexpected {p:?}")));
                ok = false;
                continue;
            };
            let rest = rest.trim().trim_start_matches('=').trim();
            let Ok(m) = rest.parse::<i64>() else {
                errors.push(err(e.line, pcol, ErrorCode::Syntax, format!("bad multiplicity in {p:?}")));
                ok = false;
                continue;
            };
            let cname = cname.trim();
            let Some(c) = model.center_by_name(cname).map(|c| c.id) else {
                errors.push(err(e.line, pcol + 5, ErrorCode::UnknownCenter, format!("unknown center {cname}")));
                ok = false;
                continue;
            };
            if seen_centers.contains(&c) {
                errors.push(err(e.line, pcol, ErrorCode::Duplicate, format!("mult({cname}) given twice")));
                ok = false;
                continue;
            }
            seen_centers.push(c);
            if model.surface.contains(c) {
                class[model.surface.coordinate(c).expect("blown")] = -m;
            } else if m < 0 {
                errors.push(err(e.line, pcol, ErrorCode::Invalid, "multiplicity at a point must be non-negative"));
                ok = false;
            } else if m > 0 {
                mults.insert(c, m as u32);
            }
        }
        if ok {
            model
                .add_component(e.key, DivisorClass::new(class), mults, irreducible)
                .expect("name checked");
        }
    }

    // [branch]
    let mut seen_g: Vec<GroupElement> = Vec::new();
    for e in sections.get(&Section::Branch).map(Vec::as_slice).unwrap_or(&[]) {
        let g = match e.key.parse::<GroupElement>() {
            Ok(g) => g,
            Err(GroupError::NonBinary(_)) => {
                errors.push(err(e.line, e.key_col, ErrorCode::BadElement, format!("non-binary group element {:?}", e.key)));
                continue;
            }
            Err(_) => {
                errors.push(err(e.line, e.key_col, ErrorCode::BadLength, format!("group element {} has bad length", e.key)));
                continue;
            }
        };
        if g.rank() != r {
            errors.push(err(e.line, e.key_col, ErrorCode::BadLength, format!("group element {} has length {}, expected {r}", e.key, g.rank())));
            continue;
        }
        if g.is_zero() {
            errors.push(err(e.line, e.key_col, ErrorCode::BadElement, "the zero element carries no branch data"));
            continue;
        }
        if seen_g.contains(&g) {
            errors.push(err(e.line, e.key_col, ErrorCode::Duplicate, format!("{g} assigned twice")));
            continue;
        }
        seen_g.push(g);
        if e.value == "0" {
            continue;
        }
        let mut col = e.value_col;
        for term in e.value.split('+') {
            let lead = term.len() - term.trim_start().len();
            let t = term.trim();
            let tcol = col + lead;
            col += term.len() + 1;
            let (k, name) = match t.split_once('*') {
                Some((k, n)) => match k.trim().parse::<u32>() {
                    Ok(k) if k > 0 => (k, n.trim()),
                    _ => {
                        errors.push(err(e.line, tcol, ErrorCode::Syntax, format!("bad coefficient in {t:?}")));
                        continue;
                    }
                },
                None => (1, t),
            };
            match model.component_by_name(name).map(|c| c.id) {
                Some(id) => model.assign(g, id, k).expect("checked"),
                None => errors.push(err(e.line, tcol, ErrorCode::UnknownComponent, format!("unknown component {name:?}"))),
            }
        }
    }

    if let Some((name, line, col)) = pencil {
        match model.center_by_name(&name) {
            Some(c) => model.pencil = Some(c.id),
            None => errors.push(err(line, col, ErrorCode::UnknownCenter, format!("unknown center {name}"))),
        }
    }

    if errors.is_empty() {
        if let Err(e) = model.validate_structure() {
            errors.push(err(1, 1, ErrorCode::Invalid, e.to_string()));
        }
    }
    if errors.is_empty() {
        Ok(model)
    } else {
        errors.sort_by_key(|e| (e.line, e.col));
        Err(ConfigErrors(errors))
    }
}

/// Canonical text: blown centers first (surface order), then pending ones.
pub fn serialize(model: &CoverModel) -> String {
    let mut out = String::new();
    out.push_str("[cover]\n");
    out.push_str(&format!("r = {}\n", model.r));
    if let Some(p) = model.pencil.and_then(|p| model.center(p)) {
        out.push_str(&format!("pencil = {}\n", p.name));
    }
    let name_of = |id: CenterId| model.center(id).map_or("?".to_string(), |c| c.name.clone());
    if model.all_centers().next().is_some() {
        out.push_str("\n[centers]\n");
        for c in model.surface.centers() {
            let kind = c.parent.map_or("plane".to_string(), |p| format!("near({})", name_of(p)));
            out.push_str(&format!("{} = {kind}, blown\n", c.name));
        }
        for c in &model.pending {
            let kind = c.parent.map_or("plane".to_string(), |p| format!("near({})", name_of(p)));
            out.push_str(&format!("{} = {kind}\n", c.name));
        }
    }
    if !model.components.is_empty() {
        out.push_str("\n[components]\n");
        for comp in &model.components {
            let mut s = format!("{} = degree {}", comp.name, comp.class.degree());
            for (i, c) in model.surface.centers().iter().enumerate() {
                let m = -comp.class.coeff(i + 1);
                if m != 0 {
                    s.push_str(&format!(", mult({})={m}", c.name));
                }
            }
            for c in &model.pending {
                if let Some(m) = comp.mults.get(&c.id) {
                    s.push_str(&format!(", mult({})={m}", c.name));
                }
            }
            if !comp.irreducible {
                s.push_str(", reducible");
            }
            out.push_str(&s);
            out.push('\n');
        }
    }
    let nonempty: Vec<_> = model.branch.iter().filter(|(_, d)| !d.is_empty()).collect();
    if !nonempty.is_empty() {
        out.push_str("\n[branch]\n");
        for (g, _) in nonempty {
            out.push_str(&format!("{g} = {}\n", model.describe_branch(*g)));
        }
    }
    out
}

/// Component ids in a parsed model follow declaration order.
pub fn component_id(model: &CoverModel, name: &str) -> Option<CompId> {
    model.component_by_name(name).map(|c| c.id)
}

#[cfg(test)]
mod tests {
    use super::*;

    const P59: &str = "[cover]\nr = 4\n\n[components]\nL1 = degree 1\nL2 = degree 1\nL3 = degree 1\nL4 = degree 1\nL5 = degree 1\n\n[branch]\n0001 = L4\n0010 = L3\n0100 = L2\n1000 = L1\n1111 = L5\n";

    #[test]
    fn five_lines_document() {
        let m = parse(P59).unwrap();
        assert_eq!(m.r, 4);
        assert_eq!(m.branch.len(), 5);
        assert_eq!(serialize(&m), P59);
    }

    #[test]
    fn round_trip_with_centers() {
        let text = "[cover]\nr = 2\npencil = p\n\n[centers]\nx = plane, blown\ny = near(x), blown\np = plane\nq = near(p)\n\n[components]\nQ = degree 4, mult(x)=2, mult(y)=2\nEx = degree 0, mult(x)=-1, mult(y)=1\nC = degree 3, mult(p)=2, mult(q)=1, reducible\n\n[branch]\n01 = Ex\n10 = Q\n11 = 2*Ex + C\n";
        let m = parse(text).unwrap();
        assert_eq!(m.surface.rank(), 3);
        assert_eq!(m.component_by_name("Ex").unwrap().class.to_string(), "E1-E2");
        assert!(!m.component_by_name("C").unwrap().irreducible);
        assert_eq!(serialize(&m), text);
        assert_eq!(parse(&serialize(&m)).unwrap(), m);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# header\n[cover]\nr = 2   # rank\n\n[components]\nA = degree 1\nB = degree 1\n[branch]\n10 = A\n01 = B\n";
        let m = parse(text).unwrap();
        assert_eq!(m.branch.len(), 2);
    }

    fn codes(text: &str) -> Vec<(usize, &'static str)> {
        parse(text).unwrap_err().0.iter().map(|e| (e.line, e.code.as_str())).collect()
    }

    #[test]
    fn positioned_errors() {
        let e = parse("[cover]\nr = 2\n[components]\nA = degree 1\n[branch]\n112 = A\n").unwrap_err();
        assert_eq!(e.0[0].code, ErrorCode::BadElement);
        assert_eq!((e.0[0].line, e.0[0].col), (6, 1));
        assert!(e.0[0].message.contains("non-binary group element"));

        let e = parse("[cover]\nr = 2\n[components]\nA = degree 1, mult(z)=1\n").unwrap_err();
        assert_eq!(e.0[0].code, ErrorCode::UnknownCenter);
        assert_eq!(e.0[0].line, 4);
        assert_eq!(e.0[0].col, 20);

        assert_eq!(codes("[cover]\nr = 2\n[branch]\n101 = A\n"), vec![(4, "E-BAD-LENGTH")]);
        assert_eq!(codes("[cover]\nr = 5\n"), vec![(2, "E-RANK")]);
        assert_eq!(codes("[components]\nA = degree 1\n"), vec![(1, "E-MISSING")]);
        assert_eq!(codes("[cover]\nr = 2\n[branch]\n10 = B\n"), vec![(4, "E-UNKNOWN-COMPONENT")]);
        assert_eq!(codes("[cover]\nr = 2\n[centers]\np = plane\np = plane\n"), vec![(5, "E-DUPLICATE")]);
        assert_eq!(codes("[cover]\nr 2\n"), vec![(1, "E-MISSING"), (2, "E-SYNTAX")]);
        assert_eq!(codes("[cover]\nr = 2\n[centers]\ny = near(x)\n"), vec![(4, "E-UNKNOWN-CENTER")]);
    }
}
