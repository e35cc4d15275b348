//! The construction language: a flat list of declarative statements that
//! build a [`CircuitDocument`]. Successful execution is verification level 1.
//!
//! ```text
//! namespace https://gencircuit.example/
//! component cas dna
//! roles cas engineered_region
//! component cas_p dna
//! roles cas_p promoter
//! name cas_p J23100
//! sub cas cas_p
//! # constraints need two subcomponents
//! ```

use crate::model::{
    CircuitDocument, Component, Constraint, EntityType, Interaction, InteractionType, Orientation, Participation,
    ParticipationRole, Role, SubComponent,
};
use std::collections::BTreeMap;
use std::fmt::Write as _;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Statement {
    Namespace(String),
    Component { id: String, entity: EntityType },
    Roles { id: String, roles: Vec<Role> },
    Name { id: String, name: String },
    Sub { parent: String, child: String, orientation: Orientation },
    Precedes { parent: String, subject: String, object: String },
    Interaction { parent: String, id: String, itype: InteractionType, coop: Option<String> },
    Participation { interaction: String, role: ParticipationRole, target: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Script {
    pub statements: Vec<Statement>,
    /// 1-based (first, last) source line of each statement.
    pub spans: Vec<(usize, usize)>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecErrorKind {
    Parse,
    UndefinedRef,
    DuplicateId,
    Arity,
    Dangling,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{kind:?} error at line {line}: {message}")]
pub struct ExecError {
    pub kind: ExecErrorKind,
    pub line: usize,
    pub message: String,
}

pub type ExecOutcome = Result<CircuitDocument, ExecError>;

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

/// Splits a line into (column, token) pairs. Double-quoted strings are one
/// token with `\"` and `\\` escapes; `#` outside quotes starts a comment.
fn tokenize(line: &str, lineno: usize) -> Result<Vec<(usize, String, bool)>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<(usize, char)> = line.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c == '#' {
            break;
        } else if c == '"' {
            let mut s = String::new();
            i += 1;
            loop {
                match chars.get(i) {
                    None => {
                        return Err(ParseError { line: lineno, column: pos + 1, message: "unterminated string".into() })
                    }
                    Some((_, '"')) => {
                        i += 1;
                        break;
                    }
                    Some((_, '\\')) => {
                        match chars.get(i + 1) {
                            Some((_, e @ ('"' | '\\'))) => s.push(*e),
                            Some((_, 'n')) => s.push('\n'),
                            Some((_, 't')) => s.push('\t'),
                            _ => {
                                return Err(ParseError {
                                    line: lineno,
                                    column: chars[i].0 + 1,
                                    message: "bad escape in string".into(),
                                })
                            }
                        }
                        i += 2;
                    }
                    Some((_, ch)) => {
                        s.push(*ch);
                        i += 1;
                    }
                }
            }
            out.push((pos + 1, s, true));
        } else {
            let start = i;
            while i < chars.len() && !chars[i].1.is_whitespace() && chars[i].1 != '#' {
                i += 1;
            }
            let end = chars.get(i).map(|c| c.0).unwrap_or(line.len());
            out.push((chars[start].0 + 1, line[pos..end].to_string(), false));
        }
    }
    Ok(out)
}

pub fn parse_script(text: &str) -> Result<Script, ParseError> {
    let mut statements = Vec::new();
    let mut spans = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let toks = tokenize(raw, line)?;
        if toks.is_empty() {
            continue;
        }
        let err = |column: usize, message: String| ParseError { line, column, message };
        let (kcol, keyword, quoted) = &toks[0];
        if *quoted {
            return Err(err(*kcol, "expected a statement keyword".into()));
        }
        let args = &toks[1..];
        let ident = |k: usize| -> Result<String, ParseError> {
            let (col, t, q) = &args[k];
            if *q || !is_ident(t) {
                return Err(err(*col, format!("malformed identifier `{t}`")));
            }
            Ok(t.clone())
        };
        let arity = |lo: usize, hi: usize| -> Result<(), ParseError> {
            if args.len() < lo || args.len() > hi {
                let want = if lo == hi { format!("{lo}") } else { format!("{lo} to {hi}") };
                return Err(err(*kcol, format!("`{keyword}` takes {want} arguments, found {}", args.len())));
            }
            Ok(())
        };
        let stmt = match keyword.as_str() {
            "namespace" => {
                arity(1, 1)?;
                Statement::Namespace(args[0].1.clone())
            }
            "component" => {
                arity(2, 2)?;
                let entity = args[1].1.parse::<EntityType>().map_err(|m| err(args[1].0, m))?;
                Statement::Component { id: ident(0)?, entity }
            }
            "roles" => {
                if args.len() < 2 {
                    arity(2, usize::MAX)?;
                }
                let joined: String = args[1..].iter().map(|a| a.1.as_str()).collect();
                let mut roles = Vec::new();
                for r in joined.split(',') {
                    roles.push(r.parse::<Role>().map_err(|m| err(args[1].0, m))?);
                }
                Statement::Roles { id: ident(0)?, roles }
            }
            "name" => {
                arity(2, 2)?;
                Statement::Name { id: ident(0)?, name: args[1].1.clone() }
            }
            "sub" => {
                arity(2, 3)?;
                let orientation = match args.get(2) {
                    None => Orientation::Forward,
                    Some((_, t, false)) if t == "reverse" => Orientation::Reverse,
                    Some((c, t, _)) => return Err(err(*c, format!("expected `reverse`, found `{t}`"))),
                };
                Statement::Sub { parent: ident(0)?, child: ident(1)?, orientation }
            }
            "precedes" => {
                arity(3, 3)?;
                Statement::Precedes { parent: ident(0)?, subject: ident(1)?, object: ident(2)? }
            }
            "interaction" => {
                if args.len() != 3 && args.len() != 5 {
                    return Err(err(*kcol, format!("`interaction` takes 3 or 5 arguments, found {}", args.len())));
                }
                let itype = args[2].1.parse::<InteractionType>().map_err(|m| err(args[2].0, m))?;
                let coop = if args.len() == 5 {
                    if args[3].1 != "coop" || args[3].2 {
                        return Err(err(args[3].0, format!("expected `coop`, found `{}`", args[3].1)));
                    }
                    Some(args[4].1.clone())
                } else {
                    None
                };
                Statement::Interaction { parent: ident(0)?, id: ident(1)?, itype, coop }
            }
            "participation" => {
                arity(3, 3)?;
                let role = args[1].1.parse::<ParticipationRole>().map_err(|m| err(args[1].0, m))?;
                Statement::Participation { interaction: ident(0)?, role, target: ident(2)? }
            }
            other => return Err(err(*kcol, format!("unknown statement `{other}`"))),
        };
        statements.push(stmt);
        spans.push((line, line));
    }
    if statements.is_empty() {
        return Err(ParseError { line: 1, column: 1, message: "empty script".into() });
    }
    Ok(Script { statements, spans })
}

fn role_limit(itype: InteractionType, role: ParticipationRole) -> Option<usize> {
    use ParticipationRole::*;
    match (itype, role) {
        (InteractionType::Inhibition, Inhibited) | (InteractionType::Stimulation, Stimulated) => Some(1),
        (InteractionType::GeneticProduction, Template | Product) => Some(1),
        _ => None,
    }
}

pub fn execute_script(script: &Script) -> ExecOutcome {
    let mut doc = CircuitDocument::default();
    let mut owner: BTreeMap<String, String> = BTreeMap::new();
    for (stmt, span) in script.statements.iter().zip(&script.spans) {
        let line = span.0;
        let fail = |kind: ExecErrorKind, message: String| ExecError { kind, line, message };
        let undefined = |id: &str| fail(ExecErrorKind::UndefinedRef, format!("`{id}` is not declared"));
        match stmt {
            Statement::Namespace(ns) => doc.namespace = ns.clone(),
            Statement::Component { id, entity } => {
                if doc.components.contains_key(id) || owner.contains_key(id) {
                    return Err(fail(ExecErrorKind::DuplicateId, format!("`{id}` is already declared")));
                }
                doc.components.insert(id.clone(), Component::new(id.clone(), *entity));
            }
            Statement::Roles { id, roles } => {
                let c = doc.components.get_mut(id).ok_or_else(|| undefined(id))?;
                c.roles = roles.clone();
            }
            Statement::Name { id, name } => {
                let c = doc.components.get_mut(id).ok_or_else(|| undefined(id))?;
                c.name = Some(name.clone());
            }
            Statement::Sub { parent, child, orientation } => {
                if !doc.components.contains_key(child) {
                    return Err(undefined(child));
                }
                let p = doc.components.get_mut(parent).ok_or_else(|| undefined(parent))?;
                if p.feature_index(child).is_some() {
                    return Err(fail(ExecErrorKind::DuplicateId, format!("`{child}` is already a feature of `{parent}`")));
                }
                p.features.push(SubComponent { child: child.clone(), orientation: *orientation });
            }
            Statement::Precedes { parent, subject, object } => {
                for id in [parent, subject, object] {
                    if !doc.components.contains_key(id) {
                        return Err(undefined(id));
                    }
                }
                if subject == object {
                    return Err(fail(ExecErrorKind::Arity, format!("`{subject}` cannot precede itself")));
                }
                let p = doc.components.get_mut(parent).expect("checked");
                let idx = |c: &str| {
                    p.feature_index(c).ok_or_else(|| {
                        fail(ExecErrorKind::Dangling, format!("`{c}` is not a feature of `{parent}`"))
                    })
                };
                let (s, o) = (idx(subject)?, idx(object)?);
                p.constraints.push(Constraint { subject: s, object: o });
            }
            Statement::Interaction { parent, id, itype, coop } => {
                if doc.components.contains_key(id) || owner.contains_key(id) {
                    return Err(fail(ExecErrorKind::DuplicateId, format!("`{id}` is already declared")));
                }
                let p = doc.components.get_mut(parent).ok_or_else(|| undefined(parent))?;
                let mut i = Interaction::new(id.clone(), *itype);
                i.cooperative_group = coop.clone();
                p.interactions.push(i);
                owner.insert(id.clone(), parent.clone());
            }
            Statement::Participation { interaction, role, target } => {
                let parent = owner.get(interaction).ok_or_else(|| undefined(interaction))?.clone();
                if !doc.components.contains_key(target) {
                    return Err(undefined(target));
                }
                let p = doc.components.get_mut(&parent).expect("owner recorded");
                let inter = p.interactions.iter_mut().find(|i| &i.id == interaction).expect("recorded");
                if let Some(limit) = role_limit(inter.itype, *role) {
                    if inter.targets(*role).count() >= limit {
                        return Err(fail(
                            ExecErrorKind::Arity,
                            format!("`{interaction}` already has {limit} {role} participant"),
                        ));
                    }
                }
                inter.participations.push(Participation { role: *role, target: target.clone() });
            }
        }
    }
    Ok(doc)
}

/// Parses and executes; parse failures become `ExecErrorKind::Parse`.
pub fn run_script(text: &str) -> ExecOutcome {
    let script = parse_script(text)
        .map_err(|e| ExecError { kind: ExecErrorKind::Parse, line: e.line, message: e.message })?;
    execute_script(&script)
}

fn quote_if_needed(s: &str) -> String {
    let plain = !s.is_empty() && !s.starts_with('"') && s.chars().all(|c| !c.is_whitespace() && c != '#' && c != '"');
    if plain {
        s.to_string()
    } else {
        let mut q = String::from("\"");
        for c in s.chars() {
            match c {
                '"' => q.push_str("\\\""),
                '\\' => q.push_str("\\\\"),
                '\n' => q.push_str("\\n"),
                '\t' => q.push_str("\\t"),
                c => q.push(c),
            }
        }
        q.push('"');
        q
    }
}

/// Emits a script that rebuilds `doc`: declarations, then containment, then
/// ordering constraints, then interactions.
pub fn emit_script(doc: &CircuitDocument) -> String {
    let mut s = String::new();
    writeln!(s, "namespace {}", quote_if_needed(&doc.namespace)).unwrap();
    for c in doc.components.values() {
        writeln!(s, "component {} {}", c.id, c.entity_type).unwrap();
        if !c.roles.is_empty() {
            let roles: Vec<&str> = c.roles.iter().map(|r| r.token()).collect();
            writeln!(s, "roles {} {}", c.id, roles.join(",")).unwrap();
        }
        if let Some(n) = &c.name {
            writeln!(s, "name {} {}", c.id, quote_if_needed(n)).unwrap();
        }
    }
    for c in doc.components.values() {
        for f in &c.features {
            match f.orientation {
                Orientation::Forward => writeln!(s, "sub {} {}", c.id, f.child).unwrap(),
                Orientation::Reverse => writeln!(s, "sub {} {} reverse", c.id, f.child).unwrap(),
            }
        }
    }
    for c in doc.components.values() {
        for k in &c.constraints {
            let (a, b) = (&c.features[k.subject].child, &c.features[k.object].child);
            writeln!(s, "precedes {} {} {}", c.id, a, b).unwrap();
        }
    }
    for c in doc.components.values() {
        for i in &c.interactions {
            match &i.cooperative_group {
                Some(g) => writeln!(s, "interaction {} {} {} coop {}", c.id, i.id, i.itype, quote_if_needed(g)).unwrap(),
                None => writeln!(s, "interaction {} {} {}", c.id, i.id, i.itype).unwrap(),
            }
            for p in &i.participations {
                writeln!(s, "participation {} {} {}", i.id, p.role, p.target).unwrap();
            }
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const GFP_CASSETTE: &str = "\
namespace https://gencircuit.example/
component gfp_cassette dna
roles gfp_cassette engineered_region
component p dna
roles p promoter
name p J23100
component rbs dna
roles rbs rbs
name rbs B0034
component cds dna
roles cds cds
name cds GFP
component t dna
roles t terminator
name t DT
sub gfp_cassette p
sub gfp_cassette rbs
sub gfp_cassette cds
sub gfp_cassette t
precedes gfp_cassette p rbs
precedes gfp_cassette rbs cds
precedes gfp_cassette cds t
";

    #[test]
    fn gfp_cassette_executes() {
        let doc = run_script(GFP_CASSETTE).unwrap();
        assert_eq!(doc.components.len(), 5);
        let cas = doc.get("gfp_cassette").unwrap();
        assert_eq!(cas.constraints.len(), 3);
        assert_eq!(cas.features.len(), 4);
    }

    #[test]
    fn eight_statement_example() {
        let text = "\
namespace https://gencircuit.example/
component cas dna
roles cas engineered_region
component cas_p dna
roles cas_p promoter
name cas_p J23100  # strong constitutive
component cas_rbs dna
roles cas_rbs rbs
";
        let s = parse_script(text).unwrap();
        assert_eq!(s.statements.len(), 8);
        assert_eq!(s.spans[5], (6, 6));
    }

    #[test]
    fn empty_script_rejected() {
        let e = parse_script("  \n# only a comment\n").unwrap_err();
        assert_eq!(e.message, "empty script");
    }

    #[test]
    fn typo_names_line() {
        let e = parse_script("component a dna\nconstrant a b c\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(e.message.contains("constrant"));
    }

    #[test]
    fn cross_cassette_constraint_is_dangling() {
        let text = "\
component input_cassette dna
component output_cassette dna
component sc_term_in dna
component sc_p_out dna
sub input_cassette sc_term_in
sub output_cassette sc_p_out
precedes output_cassette sc_p_out sc_term_in
";
        let e = run_script(text).unwrap_err();
        assert_eq!(e.kind, ExecErrorKind::Dangling);
        assert_eq!(e.line, 7);
        assert!(e.message.contains("is not a feature of `output_cassette`"));
    }

    #[test]
    fn redeclaration_is_duplicate() {
        let e = run_script("component a dna\ncomponent a protein\n").unwrap_err();
        assert_eq!(e.kind, ExecErrorKind::DuplicateId);
    }

    #[test]
    fn arity_limit_on_inhibited() {
        let text = "\
component c dna
component r dna
component p dna
component q dna
interaction c i1 inhibition
participation i1 inhibitor r
participation i1 inhibited p
participation i1 inhibited q
";
        assert_eq!(run_script(text).unwrap_err().kind, ExecErrorKind::Arity);
    }

    #[test]
    fn emit_round_trip() {
        let doc = run_script(GFP_CASSETTE).unwrap();
        let again = run_script(&emit_script(&doc)).unwrap();
        assert_eq!(doc, again);
    }

    #[test]
    fn empty_document_emits_namespace_only() {
        let doc = CircuitDocument::new("https://example.org/");
        let s = emit_script(&doc);
        assert_eq!(s, "namespace https://example.org/\n");
        assert_eq!(run_script(&s).unwrap(), doc);
    }

    #[test]
    fn quoted_names_survive() {
        let text = "component a dna\nname a \"two words \\\"quoted\\\"\"\n";
        let doc = run_script(text).unwrap();
        assert_eq!(doc.get("a").unwrap().name.as_deref(), Some("two words \"quoted\""));
        assert_eq!(run_script(&emit_script(&doc)).unwrap(), doc);
    }

    #[test]
    fn every_prefix_executes() {
        let lines: Vec<&str> = GFP_CASSETTE.lines().collect();
        for n in 1..=lines.len() {
            let prefix = lines[..n].join("\n");
            assert!(run_script(&prefix).is_ok(), "prefix of {n} lines failed");
        }
    }
}
