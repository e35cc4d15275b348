//! Line-oriented canonical serialization of [`CircuitDocument`].

use super::document::*;
use super::ontology::{EntityType, InteractionType, ParticipationRole, Role};
use std::fmt::Write as _;

pub const HEADER: &str = "gencircuit-doc v1";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DocError {
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax { line: usize, column: usize, message: String },
    #[error("dangling reference to `{0}`")]
    Dangling(String),
    #[error("duplicate id `{0}`")]
    Duplicate(String),
}

impl From<RefError> for DocError {
    fn from(e: RefError) -> Self {
        match e {
            RefError::Dangling(id) => DocError::Dangling(id),
            RefError::Duplicate(id) => DocError::Duplicate(id),
            RefError::BadConstraint { parent, .. } => DocError::Dangling(parent),
        }
    }
}

/// Escapes whitespace and `%` so a value fits in one token; `-` is reserved for "absent".
pub fn escape(s: &str) -> String {
    if s == "-" {
        return "%2D".into();
    }
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '%' => out.push_str("%25"),
            ' ' => out.push_str("%20"),
            '\t' => out.push_str("%09"),
            '\n' => out.push_str("%0A"),
            '\r' => out.push_str("%0D"),
            c => out.push(c),
        }
    }
    out
}

pub fn unescape(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let hex = s.get(i + 1..i + 3).ok_or_else(|| format!("truncated escape in `{s}`"))?;
            let v = u8::from_str_radix(hex, 16).map_err(|_| format!("bad escape in `{s}`"))?;
            out.push(v as char);
            i += 3;
        } else {
            let ch = s[i..].chars().next().unwrap();
            out.push(ch);
            i += ch.len_utf8();
        }
    }
    Ok(out)
}

fn opt(v: &Option<String>) -> String {
    v.as_deref().map(escape).unwrap_or_else(|| "-".into())
}

pub fn serialize_document(doc: &CircuitDocument) -> Vec<u8> {
    let mut s = String::new();
    writeln!(s, "{HEADER}").unwrap();
    writeln!(s, "namespace {}", escape(&doc.namespace)).unwrap();
    for c in doc.components.values() {
        let roles = if c.roles.is_empty() {
            "-".to_string()
        } else {
            c.roles.iter().map(|r| r.token()).collect::<Vec<_>>().join(",")
        };
        writeln!(s, "component {} {} roles={} name={}", c.id, c.entity_type, roles, opt(&c.name)).unwrap();
    }
    for c in doc.components.values() {
        for f in &c.features {
            match f.orientation {
                Orientation::Forward => writeln!(s, "sub {} {}", c.id, f.child).unwrap(),
                Orientation::Reverse => writeln!(s, "sub {} {} reverse", c.id, f.child).unwrap(),
            }
        }
        for k in &c.constraints {
            writeln!(s, "constraint {} precedes {} {}", c.id, k.subject, k.object).unwrap();
        }
    }
    for c in doc.components.values() {
        for i in &c.interactions {
            writeln!(s, "interaction {} {} {} coop={}", c.id, i.id, i.itype, opt(&i.cooperative_group)).unwrap();
            for p in &i.participations {
                writeln!(s, "part {} {} {}", i.id, p.role, p.target).unwrap();
            }
        }
    }
    s.into_bytes()
}

fn kv<'a>(tok: &'a str, key: &str, line: usize, column: usize) -> Result<&'a str, DocError> {
    tok.strip_prefix(key).and_then(|r| r.strip_prefix('=')).ok_or_else(|| DocError::Syntax {
        line,
        column,
        message: format!("expected `{key}=`, found `{tok}`"),
    })
}

pub fn deserialize_document(bytes: &[u8]) -> Result<CircuitDocument, DocError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| DocError::Syntax { line: 0, column: 0, message: format!("invalid utf-8: {e}") })?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == HEADER => {}
        _ => return Err(DocError::Syntax { line: 1, column: 1, message: format!("missing header `{HEADER}`") }),
    }
    let mut doc = CircuitDocument::new("");
    let mut namespace_seen = false;
    // Interaction id -> owning component, for `part` records.
    let mut owner: std::collections::BTreeMap<String, String> = Default::default();
    for (idx, raw) in lines {
        let line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let toks: Vec<&str> = raw.split_whitespace().collect();
        let syn = |column: usize, message: String| DocError::Syntax { line, column, message };
        let col = |n: usize| -> usize {
            // 1-based column of the n-th token
            let mut seen = 0;
            let mut in_tok = false;
            for (i, ch) in raw.char_indices() {
                if !ch.is_whitespace() && !in_tok {
                    if seen == n {
                        return i + 1;
                    }
                    seen += 1;
                    in_tok = true;
                } else if ch.is_whitespace() {
                    in_tok = false;
                }
            }
            raw.len() + 1
        };
        let arity = |n: usize| -> Result<(), DocError> {
            if toks.len() == n {
                Ok(())
            } else {
                Err(DocError::Syntax { line, column: 1, message: format!("`{}` expects {} fields, found {}", toks[0], n, toks.len()) })
            }
        };
        match toks[0] {
            "namespace" => {
                arity(2)?;
                if namespace_seen {
                    return Err(syn(1, "repeated namespace record".into()));
                }
                doc.namespace = unescape(toks[1]).map_err(|m| syn(col(1), m))?;
                namespace_seen = true;
            }
            "component" => {
                arity(5)?;
                let et: EntityType = toks[2].parse().map_err(|m| syn(col(2), m))?;
                let mut c = Component::new(toks[1], et);
                let roles = kv(toks[3], "roles", line, col(3))?;
                if roles != "-" {
                    for r in roles.split(',') {
                        c.roles.push(r.parse::<Role>().map_err(|m| syn(col(3), m))?);
                    }
                }
                let name = kv(toks[4], "name", line, col(4))?;
                if name != "-" {
                    c.name = Some(unescape(name).map_err(|m| syn(col(4), m))?);
                }
                if doc.components.contains_key(&c.id) {
                    return Err(DocError::Duplicate(c.id));
                }
                doc.components.insert(c.id.clone(), c);
            }
            "sub" => {
                if toks.len() != 3 && toks.len() != 4 {
                    arity(3)?;
                }
                let orientation = match toks.get(3) {
                    None => Orientation::Forward,
                    Some(&"reverse") => Orientation::Reverse,
                    Some(t) => return Err(syn(col(3), format!("unexpected `{t}`"))),
                };
                let parent = doc.components.get_mut(toks[1]).ok_or_else(|| DocError::Dangling(toks[1].into()))?;
                parent.features.push(SubComponent { child: toks[2].into(), orientation });
            }
            "constraint" => {
                arity(5)?;
                if toks[2] != "precedes" {
                    return Err(syn(col(2), format!("unknown relation `{}`", toks[2])));
                }
                let subject = toks[3].parse().map_err(|_| syn(col(3), format!("bad index `{}`", toks[3])))?;
                let object = toks[4].parse().map_err(|_| syn(col(4), format!("bad index `{}`", toks[4])))?;
                let parent = doc.components.get_mut(toks[1]).ok_or_else(|| DocError::Dangling(toks[1].into()))?;
                parent.constraints.push(Constraint { subject, object });
            }
            "interaction" => {
                arity(5)?;
                let itype: InteractionType = toks[3].parse().map_err(|m| syn(col(3), m))?;
                let coop = kv(toks[4], "coop", line, col(4))?;
                let mut i = Interaction::new(toks[2], itype);
                if coop != "-" {
                    i.cooperative_group = Some(unescape(coop).map_err(|m| syn(col(4), m))?);
                }
                if owner.contains_key(toks[2]) {
                    return Err(DocError::Duplicate(toks[2].into()));
                }
                let parent = doc.components.get_mut(toks[1]).ok_or_else(|| DocError::Dangling(toks[1].into()))?;
                parent.interactions.push(i);
                owner.insert(toks[2].into(), toks[1].into());
            }
            "part" => {
                arity(4)?;
                let role: ParticipationRole = toks[2].parse().map_err(|m| syn(col(2), m))?;
                let parent_id = owner.get(toks[1]).ok_or_else(|| DocError::Dangling(toks[1].into()))?;
                let parent = doc.components.get_mut(parent_id).expect("owner recorded");
                let inter = parent.interactions.iter_mut().find(|i| i.id == toks[1]).expect("interaction recorded");
                inter.participations.push(Participation { role, target: toks[3].into() });
            }
            other => return Err(syn(1, format!("unknown record `{other}`"))),
        }
    }
    if !namespace_seen {
        return Err(DocError::Syntax { line: 2, column: 1, message: "missing namespace record".into() });
    }
    doc.check_references()?;
    Ok(doc)
}
