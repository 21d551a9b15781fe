//! Operator command parsing into the task tuple (object, action, λ).
//!
//! Matching is keyword based over a lexicon: the text is lowercased and
//! split on anything that is not alphanumeric, then every lexicon phrase is
//! searched as a contiguous token run. Longer phrases claim their tokens
//! first, so "plastic cup" wins over "cup".

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObjectId {
    PaperCup,
    PlasticCup,
    GlassGoblet,
}

impl ObjectId {
    pub const ALL: [ObjectId; 3] = [ObjectId::PaperCup, ObjectId::PlasticCup, ObjectId::GlassGoblet];

    pub fn as_str(self) -> &'static str {
        match self {
            ObjectId::PaperCup => "paper_cup",
            ObjectId::PlasticCup => "plastic_cup",
            ObjectId::GlassGoblet => "glass_goblet",
        }
    }

    pub fn from_name(s: &str) -> Option<ObjectId> {
        ObjectId::ALL.into_iter().find(|o| o.as_str() == s)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Action {
    PickUp,
    PickAndPlace,
    HandOver,
}

/// Interaction mode; each mode carries one fixed force scaling λ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InteractionMode {
    Gently,
    Default,
    Firmly,
}

impl InteractionMode {
    pub fn lambda(self) -> f64 {
        match self {
            InteractionMode::Gently => 0.3,
            InteractionMode::Default => 0.7,
            InteractionMode::Firmly => 1.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaskCommand {
    pub object_id: ObjectId,
    pub action: Action,
    pub mode: InteractionMode,
    pub lambda: f64,
}

impl TaskCommand {
    pub fn new(object_id: ObjectId, action: Action, mode: InteractionMode) -> Self {
        TaskCommand { object_id, action, mode, lambda: mode.lambda() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("empty command")]
    Empty,
    #[error("no known object named in `{0}`")]
    UnknownObject(String),
    #[error("command names more than one object: {0:?}")]
    AmbiguousObject(Vec<ObjectId>),
    #[error("command names conflicting actions: {0:?}")]
    AmbiguousAction(Vec<Action>),
    #[error("command names conflicting interaction modes: {0:?}")]
    AmbiguousMode(Vec<InteractionMode>),
}

/// Phrase tables. A phrase may resolve to several objects, in which case
/// matching it alone is ambiguous.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Lexicon {
    pub objects: BTreeMap<String, Vec<ObjectId>>,
    pub actions: BTreeMap<String, Action>,
    pub modes: BTreeMap<String, InteractionMode>,
}

impl Lexicon {
    /// The built-in vocabulary; identical to the shipped `lexicon.json`.
    pub fn standard() -> Lexicon {
        use InteractionMode::*;
        use ObjectId::*;
        let objects: &[(&str, &[ObjectId])] = &[
            ("paper cup", &[PaperCup]),
            ("paper", &[PaperCup]),
            ("coffee cup", &[PaperCup]),
            ("disposable cup", &[PaperCup]),
            ("plastic cup", &[PlasticCup]),
            ("plastic", &[PlasticCup]),
            ("plastic tumbler", &[PlasticCup]),
            ("tumbler", &[PlasticCup]),
            ("glass goblet", &[GlassGoblet]),
            ("goblet", &[GlassGoblet]),
            ("wine glass", &[GlassGoblet]),
            ("glass", &[GlassGoblet]),
            ("stemware", &[GlassGoblet]),
            ("cup", &[PaperCup, PlasticCup]),
        ];
        let actions: &[(&str, Action)] = &[
            ("pick up", Action::PickUp),
            ("pick", Action::PickUp),
            ("grab", Action::PickUp),
            ("grasp", Action::PickUp),
            ("lift", Action::PickUp),
            ("take", Action::PickUp),
            ("pick and place", Action::PickAndPlace),
            ("place", Action::PickAndPlace),
            ("put", Action::PickAndPlace),
            ("move", Action::PickAndPlace),
            ("relocate", Action::PickAndPlace),
            ("hand over", Action::HandOver),
            ("hand", Action::HandOver),
            ("give", Action::HandOver),
            ("pass", Action::HandOver),
        ];
        let modes: &[(&str, InteractionMode)] = &[
            ("gently", Gently),
            ("gentle", Gently),
            ("carefully", Gently),
            ("softly", Gently),
            ("delicately", Gently),
            ("lightly", Gently),
            ("normally", Default),
            ("firmly", Firmly),
            ("firm", Firmly),
            ("tightly", Firmly),
            ("securely", Firmly),
            ("strongly", Firmly),
        ];
        Lexicon {
            objects: objects.iter().map(|(k, v)| (k.to_string(), v.to_vec())).collect(),
            actions: actions.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
            modes: modes.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }
}

impl Default for Lexicon {
    fn default() -> Self {
        Lexicon::standard()
    }
}

/// Lowercase alphanumeric tokens.
pub fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_alphanumeric() {
            cur.extend(ch.to_lowercase());
        } else if !cur.is_empty() {
            tokens.push(core::mem::take(&mut cur));
        }
    }
    if !cur.is_empty() {
        tokens.push(cur);
    }
    tokens
}

/// Non-overlapping phrase matches, longest first then leftmost.
fn matches<'a, V>(tokens: &[String], table: &'a BTreeMap<String, V>) -> Vec<&'a V> {
    let mut found: Vec<(usize, usize, &V)> = Vec::new();
    for (phrase, value) in table {
        let pt = tokenize(phrase);
        if pt.is_empty() || pt.len() > tokens.len() {
            continue;
        }
        for start in 0..=tokens.len() - pt.len() {
            if tokens[start..start + pt.len()] == pt[..] {
                found.push((start, pt.len(), value));
            }
        }
    }
    found.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let mut taken = vec![false; tokens.len()];
    let mut out = Vec::new();
    for (start, len, value) in found {
        if taken[start..start + len].iter().any(|&t| t) {
            continue;
        }
        taken[start..start + len].iter_mut().for_each(|t| *t = true);
        out.push(value);
    }
    out
}

pub fn parse_command(text: &str, lexicon: &Lexicon) -> Result<TaskCommand, ParseError> {
    let tokens = tokenize(text);
    if tokens.is_empty() {
        return Err(ParseError::Empty);
    }
    // Object and mode words are claimed before actions so that a verb table
    // entry can never swallow part of an object name.
    let objects: BTreeSet<ObjectId> = matches(&tokens, &lexicon.objects).into_iter().flatten().copied().collect();
    let object_id = match objects.len() {
        0 => return Err(ParseError::UnknownObject(text.to_string())),
        1 => *objects.iter().next().unwrap(),
        _ => return Err(ParseError::AmbiguousObject(objects.into_iter().collect())),
    };

    let mut actions: BTreeSet<Action> = matches(&tokens, &lexicon.actions).into_iter().copied().collect();
    // "pick up X and hand it over" is a hand-over; composite actions
    // absorb the plain pick.
    if actions.len() > 1 {
        actions.remove(&Action::PickUp);
    }
    let action = match actions.len() {
        0 => Action::PickUp,
        1 => *actions.iter().next().unwrap(),
        _ => return Err(ParseError::AmbiguousAction(actions.into_iter().collect())),
    };

    let modes: BTreeSet<InteractionMode> = matches(&tokens, &lexicon.modes).into_iter().copied().collect();
    let mode = match modes.len() {
        0 => InteractionMode::Default,
        1 => *modes.iter().next().unwrap(),
        _ => return Err(ParseError::AmbiguousMode(modes.into_iter().collect())),
    };

    Ok(TaskCommand::new(object_id, action, mode))
}
