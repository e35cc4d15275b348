//! Parts library: catalog, tiers, cognate pairs and Hill response parameters.

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::path::Path;

pub const BUILTIN_SOURCE: &str = include_str!("builtin_parts.txt");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartKind {
    Promoter,
    Rbs,
    Cds,
    Terminator,
    Operator,
}

impl PartKind {
    pub fn token(self) -> &'static str {
        match self {
            PartKind::Promoter => "promoter",
            PartKind::Rbs => "rbs",
            PartKind::Cds => "cds",
            PartKind::Terminator => "terminator",
            PartKind::Operator => "operator",
        }
    }

    fn parse(s: &str) -> Option<PartKind> {
        Some(match s {
            "promoter" => PartKind::Promoter,
            "rbs" => PartKind::Rbs,
            "cds" => PartKind::Cds,
            "terminator" => PartKind::Terminator,
            "operator" => PartKind::Operator,
            _ => return None,
        })
    }

    pub fn role(self) -> super::Role {
        use super::Role;
        match self {
            PartKind::Promoter => Role::Promoter,
            PartKind::Rbs => Role::Rbs,
            PartKind::Cds => Role::Cds,
            PartKind::Terminator => Role::Terminator,
            PartKind::Operator => Role::Operator,
        }
    }
}

impl fmt::Display for PartKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.token())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Training,
    HeldOut,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegulationMode {
    Inducible,
    Repressible,
    Activatable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regulation {
    pub mode: RegulationMode,
    pub cognate_id: String,
}

/// Hill response parameters, all in RPU except the dimensionless `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HillParams {
    pub y_min: f64,
    pub y_max: f64,
    pub k: f64,
    pub n: f64,
}

impl HillParams {
    pub fn new(y_min: f64, y_max: f64, k: f64, n: f64) -> Result<Self, String> {
        let p = HillParams { y_min, y_max, k, n };
        p.check()?;
        Ok(p)
    }

    pub fn check(&self) -> Result<(), String> {
        let finite = [self.y_min, self.y_max, self.k, self.n].iter().all(|v| v.is_finite());
        if !finite || !(0.0 < self.y_min && self.y_min < self.y_max) || self.k <= 0.0 || self.n < 1.0 {
            return Err(format!("invalid Hill parameters {self:?}"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Part {
    pub id: String,
    pub name: String,
    pub kind: PartKind,
    pub properties: BTreeSet<String>,
    pub regulation: Option<Regulation>,
    pub tier: Tier,
    pub hill: Option<HillParams>,
    pub synthetic: bool,
}

impl Part {
    pub fn has(&self, prop: &str) -> bool {
        self.properties.contains(prop)
    }

    pub fn is_reporter(&self) -> bool {
        self.kind == PartKind::Cds && self.has("reporter")
    }

    pub fn is_repressor(&self) -> bool {
        self.kind == PartKind::Cds && self.has("repressor")
    }

    pub fn is_activator(&self) -> bool {
        self.kind == PartKind::Cds && self.has("activator")
    }

    pub fn is_constitutive(&self) -> bool {
        self.kind == PartKind::Promoter && self.has("constitutive")
    }

    pub fn is_inducible(&self) -> bool {
        self.kind == PartKind::Promoter && self.has("inducible")
    }

    pub fn is_repressible(&self) -> bool {
        self.kind == PartKind::Promoter && self.has("repressible")
    }

    pub fn inducer(&self) -> Option<&str> {
        self.properties.iter().find_map(|p| p.strip_prefix("inducer:"))
    }

    /// Relative strength derived from the strength tag.
    pub fn strength(&self) -> f64 {
        let tag = |t: &str| self.has(t);
        match self.kind {
            PartKind::Rbs => {
                if tag("very-strong") {
                    1.0
                } else if tag("strong") {
                    0.6
                } else if tag("medium") {
                    0.3
                } else if tag("weak") {
                    0.1
                } else {
                    0.3
                }
            }
            PartKind::Promoter => {
                if tag("strong") {
                    1.0
                } else if tag("medium") {
                    0.5
                } else if tag("med-weak") {
                    0.25
                } else if tag("weak") {
                    0.1
                } else {
                    0.5
                }
            }
            _ => 1.0,
        }
    }

    /// Ids of parts listed with `prefix` in properties (hybrid promoters).
    pub fn listed(&self, prefix: &str) -> Vec<&str> {
        self.properties.iter().filter_map(|p| p.strip_prefix(prefix)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LibraryError {
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("integrity error between `{a}` and `{b}`: {message}")]
    Integrity { a: String, b: String, message: String },
    #[error("cannot read parts file: {0}")]
    Io(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartsLibrary {
    /// Core catalog (48 parts for the builtin library).
    pub parts: BTreeMap<String, Part>,
    /// Synthetic entries (hybrid promoters, LuxR) kept outside the core count.
    pub extras: BTreeMap<String, Part>,
    /// (repressor CDS id, promoter id)
    pub cognate_pairs: Vec<(String, String)>,
    by_name: BTreeMap<String, String>,
}

pub enum LibrarySource<'a> {
    Builtin,
    File(&'a Path),
}

pub fn load_parts_library(source: LibrarySource<'_>) -> Result<PartsLibrary, LibraryError> {
    match source {
        LibrarySource::Builtin => PartsLibrary::parse(BUILTIN_SOURCE),
        LibrarySource::File(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| LibraryError::Io(format!("{}: {e}", p.display())))?;
            PartsLibrary::parse(&text)
        }
    }
}

impl PartsLibrary {
    pub fn builtin() -> PartsLibrary {
        PartsLibrary::parse(BUILTIN_SOURCE).expect("builtin library is valid")
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    pub fn all(&self) -> impl Iterator<Item = &Part> {
        self.parts.values().chain(self.extras.values())
    }

    pub fn get(&self, id: &str) -> Option<&Part> {
        self.parts.get(id).or_else(|| self.extras.get(id))
    }

    pub fn by_name(&self, name: &str) -> Option<&Part> {
        self.by_name.get(name).and_then(|id| self.get(id))
    }

    pub fn name_of<'a>(&'a self, id: &'a str) -> &'a str {
        self.get(id).map(|p| p.name.as_str()).unwrap_or(id)
    }

    pub fn of_kind(&self, kind: PartKind) -> Vec<&Part> {
        self.parts.values().filter(|p| p.kind == kind).collect()
    }

    /// Core library restricted to one tier; pairs whose parts leave the tier are dropped.
    pub fn filter_tier(&self, tier: Tier) -> PartsLibrary {
        let parts: BTreeMap<_, _> = self.parts.iter().filter(|(_, p)| p.tier == tier).map(|(k, v)| (k.clone(), v.clone())).collect();
        let extras: BTreeMap<_, _> = self.extras.iter().filter(|(_, p)| p.tier == tier).map(|(k, v)| (k.clone(), v.clone())).collect();
        let cognate_pairs = self
            .cognate_pairs
            .iter()
            .filter(|(r, p)| parts.contains_key(r) && parts.contains_key(p))
            .cloned()
            .collect();
        let by_name = parts.values().chain(extras.values()).map(|p| (p.name.clone(), p.id.clone())).collect();
        PartsLibrary { parts, extras, cognate_pairs, by_name }
    }

    /// Repressor CDS parts with Hill parameters, in cognate-pair order.
    pub fn repressors(&self) -> Vec<&Part> {
        self.cognate_pairs.iter().filter_map(|(r, _)| self.get(r)).collect()
    }

    pub fn cognate_promoter(&self, repressor_id: &str) -> Option<&Part> {
        self.cognate_pairs.iter().find(|(r, _)| r == repressor_id).and_then(|(_, p)| self.get(p))
    }

    /// True if the named regulator is a cognate regulator of the named promoter.
    pub fn regulates(&self, regulator_name: &str, promoter_name: &str) -> bool {
        let (Some(reg), Some(prom)) = (self.by_name(regulator_name), self.by_name(promoter_name)) else {
            return false;
        };
        if let Some(r) = &prom.regulation {
            if r.cognate_id == reg.id {
                return true;
            }
        }
        prom.listed("activatable-by:").contains(&reg.id.as_str()) || prom.listed("repressible-by:").contains(&reg.id.as_str())
    }

    /// True if the named promoter is known to the library and has any cognate regulator.
    pub fn has_cognate_regulators(&self, promoter_name: &str) -> bool {
        match self.by_name(promoter_name) {
            Some(p) => p.regulation.is_some() || p.has("synthetic_hybrid"),
            None => false,
        }
    }

    pub fn parse(text: &str) -> Result<PartsLibrary, LibraryError> {
        let mut parts: BTreeMap<String, Part> = BTreeMap::new();
        let mut extras: BTreeMap<String, Part> = BTreeMap::new();
        let mut hills: Vec<(usize, String, HillParams)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let perr = |message: String| LibraryError::Parse { line, message };
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let toks: Vec<&str> = body.split_whitespace().collect();
            match toks[0] {
                "part-def" => {
                    if toks.len() < 6 {
                        return Err(perr(format!("part-def expects at least 6 fields, found {}", toks.len())));
                    }
                    let id = toks[1].to_string();
                    let kind = PartKind::parse(toks[2]).ok_or_else(|| perr(format!("unknown kind `{}`", toks[2])))?;
                    let mut tier = None;
                    let mut props = BTreeSet::new();
                    let mut cognate = None;
                    let mut name = None;
                    let mut synthetic = false;
                    for t in &toks[3..] {
                        if let Some(v) = t.strip_prefix("tier=") {
                            tier = Some(match v {
                                "training" => Tier::Training,
                                "held_out" | "held-out" => Tier::HeldOut,
                                _ => return Err(perr(format!("unknown tier `{v}`"))),
                            });
                        } else if let Some(v) = t.strip_prefix("props=") {
                            props = v.split(';').filter(|s| !s.is_empty() && *s != "-").map(String::from).collect();
                        } else if let Some(v) = t.strip_prefix("cognate=") {
                            cognate = (v != "-").then(|| v.to_string());
                        } else if let Some(v) = t.strip_prefix("name=") {
                            name = Some(v.to_string());
                        } else if *t == "synthetic" {
                            synthetic = true;
                        } else {
                            return Err(perr(format!("unexpected field `{t}`")));
                        }
                    }
                    let tier = tier.ok_or_else(|| perr("missing tier=".into()))?;
                    let mode = if props.contains("repressible") || props.contains("repressor") || kind == PartKind::Operator {
                        RegulationMode::Repressible
                    } else if props.contains("activatable") || props.contains("activator") {
                        RegulationMode::Activatable
                    } else {
                        RegulationMode::Inducible
                    };
                    let regulation = cognate.map(|c| Regulation { mode, cognate_id: c });
                    let part = Part {
                        name: name.unwrap_or_else(|| id.clone()),
                        id: id.clone(),
                        kind,
                        properties: props,
                        regulation,
                        tier,
                        hill: None,
                        synthetic,
                    };
                    if parts.contains_key(&id) || extras.contains_key(&id) {
                        return Err(LibraryError::Integrity { a: id.clone(), b: id, message: "duplicate part id".into() });
                    }
                    if synthetic {
                        extras.insert(id, part);
                    } else {
                        parts.insert(id, part);
                    }
                }
                "hill" => {
                    if toks.len() != 6 {
                        return Err(perr(format!("hill expects 6 fields, found {}", toks.len())));
                    }
                    let mut v = [0.0; 4];
                    for (i, t) in toks[2..].iter().enumerate() {
                        v[i] = t.parse().map_err(|_| perr(format!("bad number `{t}`")))?;
                    }
                    let h = HillParams::new(v[0], v[1], v[2], v[3]).map_err(perr)?;
                    hills.push((line, toks[1].to_string(), h));
                }
                other => return Err(perr(format!("unknown record `{other}`"))),
            }
        }
        for (line, id, h) in hills {
            let p = parts
                .get_mut(&id)
                .or_else(|| extras.get_mut(&id))
                .ok_or_else(|| LibraryError::Parse { line, message: format!("hill for unknown part `{id}`") })?;
            p.hill = Some(h);
        }
        let mut lib = PartsLibrary { parts, extras, cognate_pairs: Vec::new(), by_name: BTreeMap::new() };
        lib.link()?;
        Ok(lib)
    }

    fn link(&mut self) -> Result<(), LibraryError> {
        let integrity = |a: &str, b: &str, m: &str| LibraryError::Integrity { a: a.into(), b: b.into(), message: m.into() };
        let mut by_name = BTreeMap::new();
        for p in self.all() {
            if let Some(prev) = by_name.insert(p.name.clone(), p.id.clone()) {
                return Err(integrity(&prev, &p.id, "duplicate part name"));
            }
        }
        self.by_name = by_name;
        let mut pairs = Vec::new();
        for p in self.all() {
            for listed in p.listed("activatable-by:").into_iter().chain(p.listed("repressible-by:")) {
                if self.get(listed).is_none() {
                    return Err(integrity(&p.id, listed, "hybrid regulator missing from library"));
                }
            }
            let Some(reg) = &p.regulation else {
                if p.is_repressible() || p.is_repressor() {
                    return Err(integrity(&p.id, "-", "repressible part without cognate"));
                }
                continue;
            };
            let other = self.get(&reg.cognate_id).ok_or_else(|| integrity(&p.id, &reg.cognate_id, "cognate part missing from library"))?;
            match (p.kind, reg.mode) {
                (PartKind::Promoter, RegulationMode::Repressible) => {
                    let back = other.regulation.as_ref().map(|r| r.cognate_id.as_str());
                    if !other.is_repressor() || back != Some(p.id.as_str()) {
                        return Err(integrity(&p.id, &other.id, "repressible promoter and repressor are not mutual cognates"));
                    }
                    pairs.push((other.id.clone(), p.id.clone()));
                }
                (PartKind::Cds, RegulationMode::Repressible) => {
                    let back = other.regulation.as_ref().map(|r| r.cognate_id.as_str());
                    if !other.is_repressible() || back != Some(p.id.as_str()) {
                        return Err(integrity(&p.id, &other.id, "repressor and promoter are not mutual cognates"));
                    }
                }
                (PartKind::Operator, _) => {
                    if !other.is_repressor() {
                        return Err(integrity(&p.id, &other.id, "operator cognate is not a repressor"));
                    }
                }
                (_, RegulationMode::Activatable) => {
                    let back = other.regulation.as_ref().map(|r| r.cognate_id.as_str());
                    if back != Some(p.id.as_str()) {
                        return Err(integrity(&p.id, &other.id, "activator pair is not mutual"));
                    }
                }
                _ => {}
            }
        }
        // Order pairs by repressor appearance in the source table order of ids.
        pairs.sort_by_key(|(r, _)| REPRESSOR_ORDER.iter().position(|x| x == r).unwrap_or(usize::MAX));
        self.cognate_pairs = pairs;
        Ok(())
    }
}

/// Table order of the repressors; fixes iteration order for sampling.
const REPRESSOR_ORDER: [&str; 10] =
    ["BBa_C0012", "BBa_C0040", "BBa_C0051", "PhlF", "SrpR", "BM3R1", "AmtR", "QacR", "BetI", "AmeR"];

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SplitMix64;

    #[test]
    fn builtin_counts() {
        let lib = PartsLibrary::builtin();
        assert_eq!(lib.len(), 48);
        assert_eq!(lib.of_kind(PartKind::Promoter).len(), 17);
        assert_eq!(lib.of_kind(PartKind::Rbs).len(), 4);
        assert_eq!(lib.of_kind(PartKind::Cds).len(), 14);
        assert_eq!(lib.of_kind(PartKind::Terminator).len(), 3);
        assert_eq!(lib.of_kind(PartKind::Operator).len(), 10);
        assert_eq!(lib.cognate_pairs.len(), 10);
        assert_eq!(lib.extras.len(), 4);
        assert!(lib.extras.values().filter(|p| p.has("synthetic_hybrid")).count() == 3);
    }

    #[test]
    fn training_tier_pairs() {
        let lib = PartsLibrary::builtin().filter_tier(Tier::Training);
        let names: Vec<(&str, &str)> =
            lib.cognate_pairs.iter().map(|(r, p)| (lib.name_of(r), lib.name_of(p))).collect();
        assert_eq!(
            names,
            vec![("LacI", "pLac"), ("TetR", "pTet"), ("cI", "pLambda"), ("PhlF", "pPhlF"), ("SrpR", "pSrpR")]
        );
    }

    #[test]
    fn tiers_partition_core() {
        let lib = PartsLibrary::builtin();
        let t = lib.filter_tier(Tier::Training);
        let h = lib.filter_tier(Tier::HeldOut);
        assert_eq!(t.len() + h.len(), lib.len());
        assert!(t.parts.keys().all(|k| !h.parts.contains_key(k)));
    }

    #[test]
    fn pairs_are_symmetric() {
        let lib = PartsLibrary::builtin();
        for (r, p) in &lib.cognate_pairs {
            assert_eq!(lib.get(r).unwrap().regulation.as_ref().unwrap().cognate_id, *p);
            assert_eq!(lib.get(p).unwrap().regulation.as_ref().unwrap().cognate_id, *r);
        }
        for p in lib.of_kind(PartKind::Promoter) {
            if p.is_repressible() {
                let n = lib.cognate_pairs.iter().filter(|(_, q)| *q == p.id).count();
                assert_eq!(n, 1, "{}", p.id);
            }
        }
    }

    #[test]
    fn missing_cognate_is_integrity_error() {
        let text = "part-def pX promoter tier=training props=repressible cognate=RepX name=pX\n";
        match PartsLibrary::parse(text) {
            Err(LibraryError::Integrity { a, b, .. }) => {
                assert_eq!(a, "pX");
                assert_eq!(b, "RepX");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn malformed_line_reports_number() {
        let text = "\n\npart-def a bogus tier=training props=- cognate=- name=a\n";
        assert!(matches!(PartsLibrary::parse(text), Err(LibraryError::Parse { line: 3, .. })));
    }

    #[test]
    fn regulation_lookup_by_name() {
        let lib = PartsLibrary::builtin();
        assert!(lib.regulates("TetR", "pTet"));
        assert!(!lib.regulates("LacI", "pTet"));
        assert!(lib.regulates("AraC", "pBad"));
        assert!(lib.regulates("LuxR", "pLuxAra"));
        assert!(lib.regulates("TetR", "pAraTet"));
        assert!(!lib.regulates("PhlF", "J23100"));
    }

    #[test]
    fn hill_fixtures_regenerate_from_seed_zero() {
        let lib = PartsLibrary::builtin();
        let mut rng = SplitMix64::new(0);
        for rep in lib.repressors() {
            let y_min = 0.01 + rng.next_f64() * 0.09;
            let y_max = 1.0 + rng.next_f64() * 4.0;
            let k = 0.1 + rng.next_f64() * 0.9;
            let n = 1.5 + rng.next_f64() * 2.5;
            let h = rep.hill.expect("repressor has Hill parameters");
            for (a, b) in [(h.y_min, y_min), (h.y_max, y_max), (h.k, k), (h.n, n)] {
                assert!((a - b).abs() < 1e-6, "{} {a} vs {b}", rep.name);
            }
        }
    }
}
