//! Closed ontology enums and their mapping to Sequence Ontology / SBO term ids.

use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

macro_rules! term_enum {
    ($(#[$m:meta])* $name:ident { $($var:ident => $tok:literal, $term:literal;)+ }) => {
        $(#[$m])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(rename_all = "snake_case")]
        pub enum $name { $($var),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$var),+];

            pub fn token(self) -> &'static str {
                match self { $($name::$var => $tok),+ }
            }

            /// Ontology term id this variant stands for.
            pub fn term(self) -> &'static str {
                match self { $($name::$var => $term),+ }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.token())
            }
        }

        impl FromStr for $name {
            type Err = String;
            fn from_str(s: &str) -> Result<Self, String> {
                match s {
                    $($tok => Ok($name::$var),)+
                    _ => Err(format!("unknown {} `{}`", stringify!($name), s)),
                }
            }
        }
    };
}

term_enum!(
    /// Sequence Ontology roles a DNA component may carry.
    Role {
        Promoter => "promoter", "SO:0000167";
        Rbs => "rbs", "SO:0000139";
        Cds => "cds", "SO:0000316";
        Terminator => "terminator", "SO:0000141";
        Operator => "operator", "SO:0000057";
        EngineeredRegion => "engineered_region", "SO:0000804";
    }
);

term_enum!(
    EntityType {
        Dna => "dna", "SBO:0000251";
        Protein => "protein", "SBO:0000252";
    }
);

term_enum!(
    InteractionType {
        Inhibition => "inhibition", "SBO:0000169";
        Stimulation => "stimulation", "SBO:0000170";
        GeneticProduction => "genetic_production", "SBO:0000589";
    }
);

term_enum!(
    ParticipationRole {
        Inhibitor => "inhibitor", "SBO:0000020";
        Inhibited => "inhibited", "SBO:0000642";
        Stimulator => "stimulator", "SBO:0000459";
        Stimulated => "stimulated", "SBO:0000643";
        Template => "template", "SBO:0000645";
        Product => "product", "SBO:0000011";
    }
);

impl Role {
    /// Roles accepted by the semantic role check (containers excluded).
    pub fn is_part_role(self) -> bool {
        self != Role::EngineeredRegion
    }
}

impl InteractionType {
    /// Participation roles that belong to this interaction type.
    pub fn allowed_roles(self) -> [ParticipationRole; 2] {
        match self {
            InteractionType::Inhibition => [ParticipationRole::Inhibitor, ParticipationRole::Inhibited],
            InteractionType::Stimulation => [ParticipationRole::Stimulator, ParticipationRole::Stimulated],
            InteractionType::GeneticProduction => [ParticipationRole::Template, ParticipationRole::Product],
        }
    }

    pub fn is_regulatory(self) -> bool {
        self != InteractionType::GeneticProduction
    }
}

impl ParticipationRole {
    /// True for the acting side of a regulatory interaction.
    pub fn is_regulator(self) -> bool {
        matches!(self, ParticipationRole::Inhibitor | ParticipationRole::Stimulator)
    }

    pub fn is_regulated(self) -> bool {
        matches!(self, ParticipationRole::Inhibited | ParticipationRole::Stimulated)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn term_table() {
        assert_eq!(Role::Promoter.term(), "SO:0000167");
        assert_eq!(Role::Rbs.term(), "SO:0000139");
        assert_eq!(Role::Cds.term(), "SO:0000316");
        assert_eq!(Role::Terminator.term(), "SO:0000141");
        assert_eq!(Role::Operator.term(), "SO:0000057");
        assert_eq!(Role::EngineeredRegion.term(), "SO:0000804");
        assert_eq!(InteractionType::Inhibition.term(), "SBO:0000169");
        assert_eq!(InteractionType::Stimulation.term(), "SBO:0000170");
        assert_eq!(InteractionType::GeneticProduction.term(), "SBO:0000589");
        assert_eq!(ParticipationRole::Inhibitor.term(), "SBO:0000020");
        assert_eq!(ParticipationRole::Inhibited.term(), "SBO:0000642");
        assert_eq!(ParticipationRole::Stimulator.term(), "SBO:0000459");
        assert_eq!(ParticipationRole::Stimulated.term(), "SBO:0000643");
        assert_eq!(ParticipationRole::Template.term(), "SBO:0000645");
        assert_eq!(ParticipationRole::Product.term(), "SBO:0000011");
    }

    #[test]
    fn tokens_round_trip() {
        for r in Role::ALL {
            assert_eq!(r.token().parse::<Role>().unwrap(), *r);
        }
        for p in ParticipationRole::ALL {
            assert_eq!(p.token().parse::<ParticipationRole>().unwrap(), *p);
        }
        assert!("promotor".parse::<Role>().is_err());
    }
}
