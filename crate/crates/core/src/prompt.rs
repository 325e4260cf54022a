//! Subject tokens and per-object positive/negative pair sets.
//!
//! A prompt is supplied as a structured list of objects, each with the
//! attribute labels bound to it. Every label becomes one subject token; ids
//! are assigned in input order (object first, then its attributes).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SubjectId(pub usize);

impl fmt::Display for SubjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SubjectKind {
    Object,
    /// An attribute bound to the given object.
    Attribute {
        object: SubjectId,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubjectToken {
    pub id: SubjectId,
    pub kind: SubjectKind,
    pub label: String,
}

/// One entry of the structured prompt description.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ObjectEntry {
    pub label: String,
    #[serde(default)]
    pub attributes: Vec<String>,
}

impl ObjectEntry {
    pub fn new(label: impl Into<String>, attributes: &[&str]) -> Self {
        Self {
            label: label.into(),
            attributes: attributes.iter().map(|s| s.to_string()).collect(),
        }
    }
}

/// JSON form: `{"objects":[{"label":"apple","attributes":["pink"]}, ...]}`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptDescription {
    pub objects: Vec<ObjectEntry>,
}

impl PromptDescription {
    pub fn build(&self) -> Result<PromptSpec> {
        build_prompt_spec(&self.objects)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptSpec {
    pub subjects: Vec<SubjectToken>,
    pub objects: Vec<SubjectId>,
    pub attributes: Vec<SubjectId>,
    pub positive_pairs: BTreeMap<SubjectId, BTreeSet<SubjectId>>,
    pub negative_pairs: BTreeMap<SubjectId, BTreeSet<SubjectId>>,
}

/// Builds the subject sets for a structured prompt.
///
/// For every object `o`, the positive set is `o` plus its own attributes and
/// the negative set is every other subject.
pub fn build_prompt_spec(objects: &[ObjectEntry]) -> Result<PromptSpec> {
    if objects.is_empty() {
        return Err(Error::Prompt("at least one object is required".into()));
    }

    let mut subjects = Vec::new();
    let mut object_ids = Vec::new();
    let mut attribute_ids = Vec::new();
    let mut seen = BTreeSet::new();
    let mut own: Vec<(SubjectId, Vec<SubjectId>)> = Vec::new();

    let push_label = |label: &str, seen: &mut BTreeSet<String>| -> Result<()> {
        if label.trim().is_empty() {
            return Err(Error::Prompt("labels must be nonempty".into()));
        }
        if !seen.insert(label.to_string()) {
            return Err(Error::Prompt(format!("duplicate label `{label}`")));
        }
        Ok(())
    };

    for entry in objects {
        push_label(&entry.label, &mut seen)?;
        let oid = SubjectId(subjects.len());
        subjects.push(SubjectToken {
            id: oid,
            kind: SubjectKind::Object,
            label: entry.label.clone(),
        });
        object_ids.push(oid);

        let mut attrs = Vec::with_capacity(entry.attributes.len());
        for attr in &entry.attributes {
            push_label(attr, &mut seen)?;
            let aid = SubjectId(subjects.len());
            subjects.push(SubjectToken {
                id: aid,
                kind: SubjectKind::Attribute { object: oid },
                label: attr.clone(),
            });
            attribute_ids.push(aid);
            attrs.push(aid);
        }
        own.push((oid, attrs));
    }

    let all: BTreeSet<SubjectId> = subjects.iter().map(|s| s.id).collect();
    let mut positive_pairs = BTreeMap::new();
    let mut negative_pairs = BTreeMap::new();
    for (oid, attrs) in own {
        let pos: BTreeSet<SubjectId> = std::iter::once(oid).chain(attrs).collect();
        let neg: BTreeSet<SubjectId> = all.difference(&pos).copied().collect();
        positive_pairs.insert(oid, pos);
        negative_pairs.insert(oid, neg);
    }

    Ok(PromptSpec {
        subjects,
        objects: object_ids,
        attributes: attribute_ids,
        positive_pairs,
        negative_pairs,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    DuplicateId(SubjectId),
    /// Subject listed in neither the object nor the attribute set.
    Unclassified(SubjectId),
    ObjectAndAttribute(SubjectId),
    /// Id used in a set but absent from the subject list.
    UnknownId(SubjectId),
    KindMismatch(SubjectId),
    UnboundAttribute(SubjectId),
    MissingPairSets(SubjectId),
    PositiveMissingSelf(SubjectId),
    PairOverlap {
        object: SubjectId,
        shared: SubjectId,
    },
    /// Subject covered by neither the positive nor the negative set of `object`.
    Uncovered {
        object: SubjectId,
        subject: SubjectId,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::DuplicateId(id) => write!(f, "duplicate subject id {id}"),
            Violation::Unclassified(id) => {
                write!(f, "subject {id} is neither an object nor an attribute")
            }
            Violation::ObjectAndAttribute(id) => {
                write!(f, "subject {id} is both an object and an attribute")
            }
            Violation::UnknownId(id) => write!(f, "unknown subject id {id}"),
            Violation::KindMismatch(id) => {
                write!(f, "subject {id} kind disagrees with its set membership")
            }
            Violation::UnboundAttribute(id) => {
                write!(f, "attribute {id} is not bound to an object")
            }
            Violation::MissingPairSets(id) => write!(f, "object {id} has no pair sets"),
            Violation::PositiveMissingSelf(id) => {
                write!(f, "positive set missing self for object {id}")
            }
            Violation::PairOverlap { object, shared } => write!(
                f,
                "positive and negative sets of object {object} share subject {shared}"
            ),
            Violation::Uncovered { object, subject } => write!(
                f,
                "subject {subject} is in neither pair set of object {object}"
            ),
        }
    }
}

impl PromptSpec {
    pub fn subject(&self, id: SubjectId) -> Option<&SubjectToken> {
        self.subjects.iter().find(|s| s.id == id)
    }

    pub fn subject_by_label(&self, label: &str) -> Option<&SubjectToken> {
        self.subjects.iter().find(|s| s.label == label)
    }

    pub fn positives(&self, object: SubjectId) -> Option<&BTreeSet<SubjectId>> {
        self.positive_pairs.get(&object)
    }

    pub fn negatives(&self, object: SubjectId) -> Option<&BTreeSet<SubjectId>> {
        self.negative_pairs.get(&object)
    }

    /// Attributes bound to `object`, in id order.
    pub fn attributes_of(&self, object: SubjectId) -> Vec<SubjectId> {
        self.subjects
            .iter()
            .filter(|s| s.kind == SubjectKind::Attribute { object })
            .map(|s| s.id)
            .collect()
    }

    /// Checks every structural invariant; an empty list means the spec is valid.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();

        let mut ids = BTreeSet::new();
        for s in &self.subjects {
            if !ids.insert(s.id) {
                out.push(Violation::DuplicateId(s.id));
            }
        }

        let objects: BTreeSet<SubjectId> = self.objects.iter().copied().collect();
        let attributes: BTreeSet<SubjectId> = self.attributes.iter().copied().collect();
        for id in objects.union(&attributes) {
            if !ids.contains(id) {
                out.push(Violation::UnknownId(*id));
            }
        }
        for id in objects.intersection(&attributes) {
            out.push(Violation::ObjectAndAttribute(*id));
        }

        for s in &self.subjects {
            match s.kind {
                SubjectKind::Object => {
                    if !objects.contains(&s.id) && !attributes.contains(&s.id) {
                        out.push(Violation::Unclassified(s.id));
                    } else if !objects.contains(&s.id) {
                        out.push(Violation::KindMismatch(s.id));
                    }
                }
                SubjectKind::Attribute { object } => {
                    if !objects.contains(&s.id) && !attributes.contains(&s.id) {
                        out.push(Violation::Unclassified(s.id));
                    } else if !attributes.contains(&s.id) {
                        out.push(Violation::KindMismatch(s.id));
                    }
                    if !objects.contains(&object) {
                        out.push(Violation::UnboundAttribute(s.id));
                    }
                }
            }
        }

        let empty = BTreeSet::new();
        for &o in &self.objects {
            let (pos, neg) = match (self.positive_pairs.get(&o), self.negative_pairs.get(&o)) {
                (Some(p), Some(n)) => (p, n),
                (p, n) => {
                    out.push(Violation::MissingPairSets(o));
                    (p.unwrap_or(&empty), n.unwrap_or(&empty))
                }
            };
            if !pos.contains(&o) {
                out.push(Violation::PositiveMissingSelf(o));
            }
            for shared in pos.intersection(neg) {
                out.push(Violation::PairOverlap {
                    object: o,
                    shared: *shared,
                });
            }
            for id in pos.union(neg) {
                if !ids.contains(id) {
                    out.push(Violation::UnknownId(*id));
                }
            }
            for &subject in &ids {
                if !pos.contains(&subject) && !neg.contains(&subject) {
                    out.push(Violation::Uncovered { object: o, subject });
                }
            }
        }

        out
    }

    pub fn is_valid(&self) -> bool {
        self.validate().is_empty()
    }
}
