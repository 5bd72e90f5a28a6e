//! Evaluation aspects: the builtin registry, per-task definition variants,
//! and composition of several aspect definitions into one question.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::task::{Task, TaskFamily};

const BUILTIN_JSON: &str = include_str!("../data/aspects.json");

/// A human-phrased composed definition for one exact set of extras.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionOverride {
    pub extras: Vec<String>,
    pub definition: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectSpec {
    pub key: String,
    pub name: String,
    pub definition: String,
    /// Used only by the mechanical composition fallback.
    pub adjective_form: String,
    pub tasks: Vec<TaskFamily>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub per_task_definitions: BTreeMap<TaskFamily, String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub overrides: Vec<CompositionOverride>,
}

impl AspectSpec {
    pub fn applies_to(&self, family: TaskFamily) -> bool {
        self.tasks.contains(&family)
    }

    /// Definition to use for `family`; task-specific variants win.
    pub fn definition_for(&self, family: TaskFamily) -> &str {
        self.per_task_definitions
            .get(&family)
            .map(String::as_str)
            .unwrap_or(&self.definition)
    }

    fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidRegistry(format!("{}: {msg}", self.key)));
        let len = self.key.chars().count();
        if !(2..=4).contains(&len) || !self.key.chars().all(|c| c.is_ascii_uppercase()) {
            return bad("key must be 2-4 uppercase ASCII letters");
        }
        for def in std::iter::once(&self.definition).chain(self.per_task_definitions.values()) {
            if !(def.ends_with('?') || def.ends_with('.')) {
                return bad("definition must end with `?` or `.`");
            }
        }
        if self.tasks.is_empty() {
            return bad("tasks must be non-empty");
        }
        if self.tasks.iter().collect::<BTreeSet<_>>().len() != self.tasks.len() {
            return bad("duplicate task kind");
        }
        if self.adjective_form.trim().is_empty() {
            return bad("adjective_form must be non-empty");
        }
        Ok(())
    }
}

/// A target aspect with extra aspects merged into its definition.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectChain {
    pub target: String,
    pub extras: Vec<String>,
    pub composed_definition: String,
}

/// Immutable collection of aspects, keyed by their short identifier.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AspectRegistry {
    aspects: Vec<AspectSpec>,
    index: HashMap<String, usize>,
}

pub fn builtin_registry() -> AspectRegistry {
    AspectRegistry::from_json(BUILTIN_JSON).expect("builtin aspect registry is valid")
}

impl AspectRegistry {
    pub fn new(aspects: Vec<AspectSpec>) -> Result<Self> {
        let mut index = HashMap::with_capacity(aspects.len());
        for (i, a) in aspects.iter().enumerate() {
            a.validate()?;
            if index.insert(a.key.clone(), i).is_some() {
                return Err(Error::InvalidRegistry(format!("duplicate key {}", a.key)));
            }
        }
        let registry = AspectRegistry { aspects, index };
        for a in &registry.aspects {
            for o in &a.overrides {
                check_chain(&registry, &a.key, &o.extras)?;
            }
        }
        Ok(registry)
    }

    pub fn from_json(json: &str) -> Result<Self> {
        Self::new(serde_json::from_str(json)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.aspects).expect("aspects serialize")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_json() + "\n")?;
        Ok(())
    }

    pub fn lookup(&self, key: &str) -> Result<&AspectSpec> {
        self.index
            .get(key)
            .map(|&i| &self.aspects[i])
            .ok_or_else(|| Error::UnknownAspect(key.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = &AspectSpec> {
        self.aspects.iter()
    }

    pub fn len(&self) -> usize {
        self.aspects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.aspects.is_empty()
    }

    /// Definition of `key` as it reads for `task`.
    pub fn definition_for(&self, key: &str, task: Task) -> Result<&str> {
        Ok(self.lookup(key)?.definition_for(task.family()))
    }

    /// Merge the definitions of `extras` into the definition of `target`.
    ///
    /// Shipped overrides match on the set of extras, so the order in which a
    /// caller accumulates extras does not change which override applies.
    /// Unseen combinations use the form
    /// `Is this a/an {adj} response that is {adj1}, {adj2}, and {adj3}?`.
    pub fn compose_definition(&self, target: &str, extras: &[impl AsRef<str>]) -> Result<String> {
        let extras: Vec<&str> = extras.iter().map(AsRef::as_ref).collect();
        let families = check_chain(self, target, &extras)?;
        let spec = self.lookup(target)?;

        let wanted: BTreeSet<&str> = extras.iter().copied().collect();
        if let Some(o) = spec.overrides.iter().find(|o| {
            o.extras.len() == wanted.len() && o.extras.iter().all(|e| wanted.contains(e.as_str()))
        }) {
            return Ok(o.definition.clone());
        }

        if extras.is_empty() {
            return Ok(match families.as_slice() {
                [only] => spec.definition_for(*only).to_string(),
                _ => spec.definition.clone(),
            });
        }

        let adjectives = extras
            .iter()
            .map(|k| self.lookup(k).map(|a| a.adjective_form.as_str()))
            .collect::<Result<Vec<_>>>()?;
        let head = &spec.adjective_form;
        Ok(format!(
            "Is this {} {head} response that is {}?",
            indefinite_article(head),
            join_oxford(&adjectives)
        ))
    }

    pub fn chain(&self, target: &str, extras: &[impl AsRef<str>]) -> Result<AspectChain> {
        Ok(AspectChain {
            target: target.to_string(),
            extras: extras.iter().map(|e| e.as_ref().to_string()).collect(),
            composed_definition: self.compose_definition(target, extras)?,
        })
    }
}

/// Validates a (target, extras) chain and returns the task families shared by
/// every aspect in it.
fn check_chain(
    registry: &AspectRegistry,
    target: &str,
    extras: &[impl AsRef<str>],
) -> Result<Vec<TaskFamily>> {
    let spec = registry.lookup(target)?;
    let mut common: BTreeSet<TaskFamily> = spec.tasks.iter().copied().collect();
    let mut seen = BTreeSet::new();
    for e in extras {
        let e = e.as_ref();
        if e == target {
            return Err(Error::Invalid(format!(
                "target {target} repeated in extras"
            )));
        }
        if !seen.insert(e) {
            return Err(Error::Invalid(format!("duplicate extra aspect {e}")));
        }
        let other = registry.lookup(e)?;
        common.retain(|f| other.tasks.contains(f));
    }
    if common.is_empty() {
        let mut keys = vec![target.to_string()];
        keys.extend(extras.iter().map(|e| e.as_ref().to_string()));
        return Err(Error::MixedTasks(keys));
    }
    Ok(common.into_iter().collect())
}

fn indefinite_article(word: &str) -> &'static str {
    match word.chars().next().map(|c| c.to_ascii_lowercase()) {
        Some('a' | 'e' | 'i' | 'o' | 'u') => "an",
        _ => "a",
    }
}

fn join_oxford(items: &[&str]) -> String {
    match items {
        [] => String::new(),
        [one] => one.to_string(),
        [a, b] => format!("{a} and {b}"),
        [init @ .., last] => format!("{}, and {last}", init.join(", ")),
    }
}
