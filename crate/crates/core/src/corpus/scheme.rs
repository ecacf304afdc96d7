use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufReader, Read};
use std::path::Path;

use log::warn;

use super::{csv_line, CorpusError};
use crate::lexicon::{normalize, ExemplarId, Lexicon};

#[derive(Debug, Clone, PartialEq, Eq)]
struct Membership {
    /// Category indices in the order they were listed (deduplicated).
    listed: Vec<usize>,
    /// Same indices, ascending.
    sorted: Vec<usize>,
}

/// Exemplar to subcategory mapping. An exemplar may belong to several categories.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryScheme {
    categories: Vec<String>,
    membership: BTreeMap<String, Membership>,
}

impl CategoryScheme {
    /// Builds a scheme from category names and per-exemplar listed index sets.
    pub fn new<I>(categories: Vec<String>, membership: I) -> Result<Self, CorpusError>
    where
        I: IntoIterator<Item = (String, Vec<usize>)>,
    {
        if categories.is_empty() {
            return Err(CorpusError::Empty("category list"));
        }
        let mut map: BTreeMap<String, Membership> = BTreeMap::new();
        for (exemplar, listed) in membership {
            let exemplar = normalize(&exemplar);
            if listed.is_empty() {
                return Err(CorpusError::parse(
                    0,
                    format!("exemplar {exemplar:?} has no category"),
                ));
            }
            if let Some(bad) = listed.iter().find(|&&c| c >= categories.len()) {
                return Err(CorpusError::parse(
                    0,
                    format!("exemplar {exemplar:?} references unknown category {bad}"),
                ));
            }
            let entry = map.entry(exemplar).or_insert_with(|| Membership {
                listed: Vec::new(),
                sorted: Vec::new(),
            });
            for c in listed {
                if !entry.listed.contains(&c) {
                    entry.listed.push(c);
                }
            }
            entry.sorted = entry.listed.clone();
            entry.sorted.sort_unstable();
        }
        Ok(Self {
            categories,
            membership: map,
        })
    }

    pub fn categories(&self) -> &[String] {
        &self.categories
    }

    pub fn num_categories(&self) -> usize {
        self.categories.len()
    }

    pub fn category_index(&self, name: &str) -> Option<usize> {
        self.categories.iter().position(|c| c == name)
    }

    /// Ascending category indices of an exemplar, or `None` if unmapped.
    pub fn membership(&self, exemplar: &str) -> Option<&[usize]> {
        self.lookup(exemplar).map(|m| m.sorted.as_slice())
    }

    /// First category listed for the exemplar in the norms file.
    pub fn first_listed(&self, exemplar: &str) -> Option<usize> {
        self.lookup(exemplar).map(|m| m.listed[0])
    }

    pub fn len(&self) -> usize {
        self.membership.len()
    }

    pub fn is_empty(&self) -> bool {
        self.membership.is_empty()
    }

    pub fn exemplars(&self) -> impl Iterator<Item = &str> {
        self.membership.keys().map(String::as_str)
    }

    fn lookup(&self, exemplar: &str) -> Option<&Membership> {
        self.membership
            .get(exemplar)
            .or_else(|| self.membership.get(&normalize(exemplar)))
    }
}

pub fn load_scheme(path: impl AsRef<Path>) -> Result<CategoryScheme, CorpusError> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| CorpusError::io(path, e))?;
    read_scheme(BufReader::new(file))
}

/// Parses `exemplar,categories` rows, categories `;`-separated.
///
/// Category indices follow first appearance. Repeated exemplar rows are
/// merged by union.
pub fn read_scheme<R: Read>(reader: R) -> Result<CategoryScheme, CorpusError> {
    let mut rdr = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CorpusError::parse(csv_line(&e), e.to_string()))?
        .clone();
    let col = |name: &str| headers.iter().position(|h| h.eq_ignore_ascii_case(name));
    let (Some(c_ex), Some(c_cat)) = (col("exemplar"), col("categories")) else {
        return Err(CorpusError::parse(1, "header must be exemplar,categories"));
    };

    let mut categories: Vec<String> = Vec::new();
    let mut cat_index: HashMap<String, usize> = HashMap::new();
    let mut rows: Vec<(String, Vec<usize>)> = Vec::new();
    let mut seen: HashMap<String, Vec<usize>> = HashMap::new();
    for record in rdr.records() {
        let record = record.map_err(|e| CorpusError::parse(csv_line(&e), e.to_string()))?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.iter().all(str::is_empty) {
            continue;
        }
        let exemplar = normalize(record.get(c_ex).unwrap_or(""));
        if exemplar.is_empty() {
            return Err(CorpusError::parse(line, "empty exemplar field"));
        }
        let mut listed = Vec::new();
        for name in record.get(c_cat).unwrap_or("").split(';') {
            let name = name.trim();
            if name.is_empty() {
                continue;
            }
            let next = categories.len();
            let idx = *cat_index.entry(name.to_owned()).or_insert_with(|| {
                categories.push(name.to_owned());
                next
            });
            if !listed.contains(&idx) {
                listed.push(idx);
            }
        }
        if listed.is_empty() {
            return Err(CorpusError::parse(
                line,
                format!("exemplar {exemplar:?} has no categories"),
            ));
        }
        if let Some(prev) = seen.get(&exemplar) {
            let mut a = prev.clone();
            let mut b = listed.clone();
            a.sort_unstable();
            b.sort_unstable();
            if a != b {
                warn!("line {line}: conflicting categories for {exemplar:?}; merging by union");
            }
        }
        seen.entry(exemplar.clone()).or_default().extend(&listed);
        rows.push((exemplar, listed));
    }
    if rows.is_empty() {
        return Err(CorpusError::Empty("scheme file"));
    }
    CategoryScheme::new(categories, rows)
}

/// Category sets resolved once for every id of a lexicon.
///
/// Unmapped exemplars have an empty set and behave as a singleton category of
/// their own.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CategoryIndex {
    sets: Vec<Vec<usize>>,
    first: Vec<Option<usize>>,
    num_categories: usize,
}

impl CategoryIndex {
    pub fn new(lexicon: &Lexicon, scheme: &CategoryScheme) -> Self {
        let mut sets = Vec::with_capacity(lexicon.len());
        let mut first = Vec::with_capacity(lexicon.len());
        for (_, surface) in lexicon.iter() {
            sets.push(
                scheme
                    .membership(surface)
                    .map(<[usize]>::to_vec)
                    .unwrap_or_default(),
            );
            first.push(scheme.first_listed(surface));
        }
        Self {
            sets,
            first,
            num_categories: scheme.num_categories(),
        }
    }

    pub fn categories(&self, id: ExemplarId) -> &[usize] {
        self.sets.get(id.index()).map(Vec::as_slice).unwrap_or(&[])
    }

    pub fn first_listed(&self, id: ExemplarId) -> Option<usize> {
        self.first.get(id.index()).copied().flatten()
    }

    pub fn is_mapped(&self, id: ExemplarId) -> bool {
        !self.categories(id).is_empty()
    }

    pub fn contains(&self, id: ExemplarId, category: usize) -> bool {
        self.categories(id).binary_search(&category).is_ok()
    }

    pub fn num_categories(&self) -> usize {
        self.num_categories
    }

    /// True when the two exemplars share no category.
    pub fn disjoint(&self, a: ExemplarId, b: ExemplarId) -> bool {
        let (sa, sb) = (self.categories(a), self.categories(b));
        if sa.is_empty() || sb.is_empty() {
            return a != b;
        }
        !sorted_intersect(sa, sb)
    }
}

pub(crate) fn sorted_intersect(a: &[usize], b: &[usize]) -> bool {
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => return true,
        }
    }
    false
}
