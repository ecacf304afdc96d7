//! Exemplar vocabulary shared by corpora, networks and models.

use std::collections::HashMap;
use std::fmt;

/// Index of an exemplar inside a [`Lexicon`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExemplarId(pub u32);

impl ExemplarId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for ExemplarId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

/// Canonical surface form: trimmed, lowercase, single-spaced.
///
/// Idempotent; no stemming or synonym merging is attempted.
pub fn normalize(surface: &str) -> String {
    let mut out = String::with_capacity(surface.len());
    for word in surface.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.extend(word.chars().flat_map(char::to_lowercase));
    }
    out
}

/// Bidirectional mapping between exemplar surfaces and dense ids.
///
/// Ids are assigned in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Lexicon {
    surfaces: Vec<String>,
    index: HashMap<String, ExemplarId>,
}

impl Lexicon {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a lexicon from surfaces, normalizing and skipping duplicates.
    pub fn from_surfaces<I, S>(surfaces: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut lex = Self::new();
        for s in surfaces {
            lex.intern(s.as_ref());
        }
        lex
    }

    /// Returns the id for `surface`, inserting it if absent.
    ///
    /// Panics if the normalized surface is empty.
    pub fn intern(&mut self, surface: &str) -> ExemplarId {
        let norm = normalize(surface);
        assert!(!norm.is_empty(), "empty exemplar surface");
        if let Some(&id) = self.index.get(&norm) {
            return id;
        }
        let id = ExemplarId(self.surfaces.len() as u32);
        self.index.insert(norm.clone(), id);
        self.surfaces.push(norm);
        id
    }

    /// Looks up a surface after normalization.
    pub fn get(&self, surface: &str) -> Option<ExemplarId> {
        match self.index.get(surface) {
            Some(&id) => Some(id),
            None => self.index.get(&normalize(surface)).copied(),
        }
    }

    pub fn surface(&self, id: ExemplarId) -> &str {
        &self.surfaces[id.index()]
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn contains(&self, surface: &str) -> bool {
        self.get(surface).is_some()
    }

    pub fn ids(&self) -> impl ExactSizeIterator<Item = ExemplarId> {
        (0..self.surfaces.len() as u32).map(ExemplarId)
    }

    pub fn surfaces(&self) -> &[String] {
        &self.surfaces
    }

    pub fn iter(&self) -> impl Iterator<Item = (ExemplarId, &str)> {
        self.surfaces
            .iter()
            .enumerate()
            .map(|(i, s)| (ExemplarId(i as u32), s.as_str()))
    }

    /// Maps ids back to owned surfaces.
    pub fn render(&self, items: &[ExemplarId]) -> Vec<String> {
        items
            .iter()
            .map(|&id| self.surface(id).to_owned())
            .collect()
    }
}
