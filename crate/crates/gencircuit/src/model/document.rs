//! Circuit document: components, subcomponents, ordering constraints, interactions.

use super::ontology::{EntityType, InteractionType, ParticipationRole, Role};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Orientation {
    #[default]
    Forward,
    Reverse,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubComponent {
    pub child: String,
    pub orientation: Orientation,
}

impl SubComponent {
    pub fn new(child: impl Into<String>) -> Self {
        SubComponent { child: child.into(), orientation: Orientation::Forward }
    }
}

/// `subject` precedes `object`; both index into the parent's features.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Constraint {
    pub subject: usize,
    pub object: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Participation {
    pub role: ParticipationRole,
    pub target: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interaction {
    pub id: String,
    pub itype: InteractionType,
    pub participations: Vec<Participation>,
    pub cooperative_group: Option<String>,
}

impl Interaction {
    pub fn new(id: impl Into<String>, itype: InteractionType) -> Self {
        Interaction { id: id.into(), itype, participations: Vec::new(), cooperative_group: None }
    }

    pub fn with(mut self, role: ParticipationRole, target: impl Into<String>) -> Self {
        self.participations.push(Participation { role, target: target.into() });
        self
    }

    pub fn targets(&self, role: ParticipationRole) -> impl Iterator<Item = &str> {
        self.participations.iter().filter(move |p| p.role == role).map(|p| p.target.as_str())
    }

    pub fn regulators(&self) -> impl Iterator<Item = &str> {
        self.participations.iter().filter(|p| p.role.is_regulator()).map(|p| p.target.as_str())
    }

    pub fn regulated(&self) -> impl Iterator<Item = &str> {
        self.participations.iter().filter(|p| p.role.is_regulated()).map(|p| p.target.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Component {
    pub id: String,
    pub entity_type: EntityType,
    pub roles: Vec<Role>,
    pub name: Option<String>,
    pub features: Vec<SubComponent>,
    pub constraints: Vec<Constraint>,
    pub interactions: Vec<Interaction>,
}

impl Component {
    pub fn new(id: impl Into<String>, entity_type: EntityType) -> Self {
        Component {
            id: id.into(),
            entity_type,
            roles: Vec::new(),
            name: None,
            features: Vec::new(),
            constraints: Vec::new(),
            interactions: Vec::new(),
        }
    }

    pub fn has_role(&self, role: Role) -> bool {
        self.roles.contains(&role)
    }

    pub fn is_region(&self) -> bool {
        self.has_role(Role::EngineeredRegion)
    }

    pub fn feature_index(&self, child: &str) -> Option<usize> {
        self.features.iter().position(|f| f.child == child)
    }

    pub fn display_name(&self) -> &str {
        self.name.as_deref().unwrap_or(&self.id)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RefError {
    #[error("dangling reference to `{0}`")]
    Dangling(String),
    #[error("duplicate id `{0}`")]
    Duplicate(String),
    #[error("constraint in `{parent}` has invalid indices {subject}->{object}")]
    BadConstraint { parent: String, subject: usize, object: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CircuitDocument {
    pub namespace: String,
    pub components: BTreeMap<String, Component>,
}

impl Default for CircuitDocument {
    fn default() -> Self {
        CircuitDocument::new("https://gencircuit.example/")
    }
}

impl CircuitDocument {
    pub fn new(namespace: impl Into<String>) -> Self {
        CircuitDocument { namespace: namespace.into(), components: BTreeMap::new() }
    }

    pub fn get(&self, id: &str) -> Option<&Component> {
        self.components.get(id)
    }

    pub fn add(&mut self, c: Component) -> Result<(), RefError> {
        if self.components.contains_key(&c.id) || self.interaction(&c.id).is_some() {
            return Err(RefError::Duplicate(c.id));
        }
        self.components.insert(c.id.clone(), c);
        Ok(())
    }

    /// Finds an interaction anywhere in the document, with its owning component.
    pub fn interaction(&self, id: &str) -> Option<(&Component, &Interaction)> {
        self.components
            .values()
            .find_map(|c| c.interactions.iter().find(|i| i.id == id).map(|i| (c, i)))
    }

    pub fn interactions(&self) -> impl Iterator<Item = (&Component, &Interaction)> {
        self.components.values().flat_map(|c| c.interactions.iter().map(move |i| (c, i)))
    }

    /// Components referenced as a feature by at least one other component.
    pub fn contained_ids(&self) -> BTreeSet<&str> {
        self.components
            .values()
            .flat_map(|c| c.features.iter().map(|f| f.child.as_str()))
            .collect()
    }

    /// Parents that list `child` among their features.
    pub fn parents_of<'a>(&'a self, child: &'a str) -> impl Iterator<Item = &'a Component> + 'a {
        self.components.values().filter(move |c| c.features.iter().any(|f| f.child == child))
    }

    /// Engineered regions whose features contain no other engineered region.
    pub fn leaf_regions(&self) -> Vec<&Component> {
        self.components
            .values()
            .filter(|c| c.is_region())
            .filter(|c| {
                c.features
                    .iter()
                    .all(|f| self.get(&f.child).map(|k| !k.is_region()).unwrap_or(true))
            })
            .collect()
    }

    pub fn regions(&self) -> impl Iterator<Item = &Component> {
        self.components.values().filter(|c| c.is_region())
    }

    /// Checks reference closure: every sub, constraint and participation resolves.
    pub fn check_references(&self) -> Result<(), RefError> {
        let mut interaction_ids = BTreeSet::new();
        for c in self.components.values() {
            for f in &c.features {
                if !self.components.contains_key(&f.child) {
                    return Err(RefError::Dangling(f.child.clone()));
                }
            }
            for k in &c.constraints {
                if k.subject >= c.features.len() || k.object >= c.features.len() || k.subject == k.object {
                    return Err(RefError::BadConstraint {
                        parent: c.id.clone(),
                        subject: k.subject,
                        object: k.object,
                    });
                }
            }
            for i in &c.interactions {
                if self.components.contains_key(&i.id) || !interaction_ids.insert(i.id.as_str()) {
                    return Err(RefError::Duplicate(i.id.clone()));
                }
                for p in &i.participations {
                    if !self.components.contains_key(&p.target) {
                        return Err(RefError::Dangling(p.target.clone()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Renames every id through `f`, keeping structure. Used for isomorphism fixtures.
    pub fn renamed(&self, f: impl Fn(&str) -> String) -> CircuitDocument {
        let mut out = CircuitDocument::new(self.namespace.clone());
        for c in self.components.values() {
            let mut n = c.clone();
            n.id = f(&c.id);
            for sc in &mut n.features {
                sc.child = f(&sc.child);
            }
            for i in &mut n.interactions {
                i.id = f(&i.id);
                for p in &mut i.participations {
                    p.target = f(&p.target);
                }
            }
            out.components.insert(n.id.clone(), n);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn part(id: &str, role: Role) -> Component {
        let mut c = Component::new(id, EntityType::Dna);
        c.roles.push(role);
        c
    }

    #[test]
    fn dangling_feature_detected() {
        let mut d = CircuitDocument::default();
        let mut r = part("cas", Role::EngineeredRegion);
        r.features.push(SubComponent::new("missing"));
        d.add(r).unwrap();
        assert_eq!(d.check_references(), Err(RefError::Dangling("missing".into())));
    }

    #[test]
    fn duplicate_rejected() {
        let mut d = CircuitDocument::default();
        d.add(part("p", Role::Promoter)).unwrap();
        assert!(matches!(d.add(part("p", Role::Rbs)), Err(RefError::Duplicate(_))));
    }

    #[test]
    fn leaf_regions_skip_composites() {
        let mut d = CircuitDocument::default();
        d.add(part("p", Role::Promoter)).unwrap();
        let mut cas = part("cas", Role::EngineeredRegion);
        cas.features.push(SubComponent::new("p"));
        d.add(cas).unwrap();
        let mut top = part("top", Role::EngineeredRegion);
        top.features.push(SubComponent::new("cas"));
        d.add(top).unwrap();
        let leaves: Vec<_> = d.leaf_regions().iter().map(|c| c.id.clone()).collect();
        assert_eq!(leaves, vec!["cas".to_string()]);
    }
}
