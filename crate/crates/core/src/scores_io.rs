//! Local-score files, BIC scoring of discrete data, and parent-set pruning.
//!
//! Score files are plain text:
//!
//! ```text
//! 2
//! A 2
//! -1.5 0
//! -1.0 1 B
//! B 1
//! -2.0 0
//! ```
//!
//! The first line is the variable count. Each variable opens with `NAME K`
//! and is followed by `K` records `SCORE P PARENT_1 .. PARENT_P`. Lines
//! starting with `#` are comments.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::Read;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::instance::LocalScoreTable;
use crate::nodeset::{NodeSet, MAX_NODES};
use crate::scalar::Score;

/// One `SCORE P PARENTS..` record, parents still given by name.
#[derive(Clone, Debug, PartialEq)]
pub struct ParentRecord<S> {
    pub score: S,
    pub parents: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariableRecords<S> {
    pub name: String,
    pub records: Vec<ParentRecord<S>>,
}

/// A score file as written, before names are resolved to node indices.
#[derive(Clone, Debug, PartialEq)]
pub struct ScoreDocument<S> {
    pub variables: Vec<VariableRecords<S>>,
}

impl<S: Score> ScoreDocument<S> {
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(k, l)| (k + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

        let syntax = |line: usize, msg: &str| Error::Syntax {
            line,
            msg: msg.to_string(),
        };

        let (line, first) = lines.next().ok_or_else(|| syntax(1, "empty file"))?;
        let n: usize = first
            .parse()
            .map_err(|_| syntax(line, "expected the variable count"))?;

        let mut variables = Vec::with_capacity(n);
        for _ in 0..n {
            let (line, header) = lines
                .next()
                .ok_or_else(|| syntax(line, "unexpected end of file, expected `NAME K`"))?;
            let mut tok = header.split_whitespace();
            let (Some(name), Some(count), None) = (tok.next(), tok.next(), tok.next()) else {
                return Err(syntax(line, "expected `NAME K`"));
            };
            let count: usize = count
                .parse()
                .map_err(|_| syntax(line, "record count is not an integer"))?;

            let mut records = Vec::with_capacity(count);
            for _ in 0..count {
                let (line, rec) = lines
                    .next()
                    .ok_or_else(|| syntax(line, "unexpected end of file, expected a record"))?;
                let mut tok = rec.split_whitespace();
                let score: S = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| syntax(line, "bad score"))?;
                let p: usize = tok
                    .next()
                    .and_then(|t| t.parse().ok())
                    .ok_or_else(|| syntax(line, "bad parent count"))?;
                let parents: Vec<String> = tok.map(str::to_string).collect();
                if parents.len() != p {
                    return Err(syntax(
                        line,
                        &format!("declared {p} parents, found {}", parents.len()),
                    ));
                }
                records.push(ParentRecord { score, parents });
            }
            variables.push(VariableRecords {
                name: name.to_string(),
                records,
            });
        }
        if let Some((line, _)) = lines.next() {
            return Err(syntax(line, "trailing content after the last variable"));
        }
        Ok(Self { variables })
    }

    pub fn names(&self) -> Vec<String> {
        self.variables.iter().map(|v| v.name.clone()).collect()
    }

    /// Resolves parent names and builds the table. Node order is declaration
    /// order.
    pub fn to_table(&self) -> Result<LocalScoreTable<S>> {
        let n = self.variables.len();
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidNodeCount(n));
        }
        let mut index = HashMap::with_capacity(n);
        for (i, v) in self.variables.iter().enumerate() {
            if index.insert(v.name.as_str(), i).is_some() {
                return Err(Error::DuplicateVariable(v.name.clone()));
            }
        }
        let mut per_node = Vec::with_capacity(n);
        for (i, v) in self.variables.iter().enumerate() {
            let mut row = Vec::with_capacity(v.records.len());
            for r in &v.records {
                let mut set = NodeSet::EMPTY;
                for p in &r.parents {
                    let j = *index
                        .get(p.as_str())
                        .ok_or_else(|| Error::UnknownVariable(p.clone()))?;
                    if j == i {
                        return Err(Error::SelfParent(i));
                    }
                    set.insert(j);
                }
                row.push((set, r.score));
            }
            per_node.push(row);
        }
        LocalScoreTable::new(n, per_node)
    }
}

/// Parses a score file into a table plus the variable names.
pub fn parse_scores<S: Score>(text: &str) -> Result<(LocalScoreTable<S>, Vec<String>)> {
    let doc = ScoreDocument::parse(text)?;
    Ok((doc.to_table()?, doc.names()))
}

/// Reads a score file from any byte stream.
pub fn read_scores<S: Score, R: Read>(mut reader: R) -> Result<(LocalScoreTable<S>, Vec<String>)> {
    let mut text = String::new();
    reader
        .read_to_string(&mut text)
        .map_err(|e| Error::Syntax {
            line: 0,
            msg: e.to_string(),
        })?;
    parse_scores(&text)
}

/// Serializes a table. Records appear in canonical order (cardinality, then
/// bitmask); scores use the shortest representation that parses back to the
/// same value.
pub fn write_scores<S: Score>(table: &LocalScoreTable<S>, names: &[String]) -> Result<String> {
    if names.len() != table.n() {
        return Err(Error::SizeMismatch {
            expected: table.n(),
            found: names.len(),
        });
    }
    let mut out = String::new();
    writeln!(out, "{}", table.n()).unwrap();
    for (i, name) in names.iter().enumerate() {
        let row = table.entries(i);
        writeln!(out, "{name} {}", row.len()).unwrap();
        for e in row {
            write!(out, "{:?} {}", e.score, e.parents.len()).unwrap();
            for j in e.parents.iter() {
                write!(out, " {}", names[j]).unwrap();
            }
            out.push('\n');
        }
    }
    Ok(out)
}

/// Default variable names `X0, X1, ..`.
pub fn default_names(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("X{i}")).collect()
}

/// Categorical data: `m` rows over `n` columns, column `c` taking values in
/// `0..arity[c]`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteDataset {
    names: Vec<String>,
    arities: Vec<u32>,
    rows: Vec<Vec<u32>>,
}

impl DiscreteDataset {
    /// Builds a dataset; arities default to `max value + 1` per column.
    pub fn new(names: Vec<String>, rows: Vec<Vec<u32>>, arities: Option<Vec<u32>>) -> Result<Self> {
        let n = names.len();
        if n == 0 || n > MAX_NODES {
            return Err(Error::InvalidNodeCount(n));
        }
        if rows.is_empty() {
            return Err(Error::InvalidDataset("no data rows".into()));
        }
        if let Some(k) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidDataset(format!(
                "row {} has {} values, expected {n}",
                k + 1,
                rows[k].len()
            )));
        }
        let arities = match arities {
            Some(a) => {
                if a.len() != n {
                    return Err(Error::SizeMismatch {
                        expected: n,
                        found: a.len(),
                    });
                }
                for (c, &r) in a.iter().enumerate() {
                    if rows.iter().any(|row| row[c] >= r) {
                        return Err(Error::InvalidDataset(format!(
                            "column `{}` has a value outside 0..{r}",
                            names[c]
                        )));
                    }
                }
                a
            }
            None => (0..n)
                .map(|c| rows.iter().map(|r| r[c]).max().unwrap_or(0) + 1)
                .collect(),
        };
        Ok(Self {
            names,
            arities,
            rows,
        })
    }

    /// Reads CSV with a header row of names and non-negative integer cells.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        let bad = |e: csv::Error| Error::InvalidDataset(e.to_string());
        let names: Vec<String> = rdr
            .headers()
            .map_err(bad)?
            .iter()
            .map(str::to_string)
            .collect();
        let mut rows = Vec::new();
        for (k, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(bad)?;
            let row = rec
                .iter()
                .map(|cell| {
                    cell.parse::<u32>().map_err(|_| Error::Syntax {
                        line: k + 2,
                        msg: format!("`{cell}` is not a non-negative integer"),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        Self::new(names, rows, None)
    }

    pub fn n(&self) -> usize {
        self.names.len()
    }

    pub fn m(&self) -> usize {
        self.rows.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn arities(&self) -> &[u32] {
        &self.arities
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }
}

#[derive(Clone, Debug)]
pub struct BicOptions {
    pub max_indegree: usize,
    /// Per-node candidate parents; all other nodes when `None`.
    pub candidate_parents: Option<Vec<NodeSet>>,
    /// Upper bound on the total number of local scores.
    pub max_entries: usize,
}

impl Default for BicOptions {
    fn default() -> Self {
        Self {
            max_indegree: 2,
            candidate_parents: None,
            max_entries: 1 << 22,
        }
    }
}

/// BIC local score of `node` with parent set `parents`: maximized
/// log-likelihood minus `ln(m)/2` per free parameter.
pub fn bic_local_score(data: &DiscreteDataset, node: usize, parents: NodeSet) -> f64 {
    let r = data.arities[node] as usize;
    let parent_list: Vec<usize> = parents.iter().collect();
    let q: f64 = parent_list
        .iter()
        .map(|&j| data.arities[j] as f64)
        .product();

    let mut counts: HashMap<u64, Vec<u32>> = HashMap::new();
    for row in &data.rows {
        let mut config = 0u64;
        for &j in &parent_list {
            config = config * data.arities[j] as u64 + row[j] as u64;
        }
        counts.entry(config).or_insert_with(|| vec![0; r])[row[node] as usize] += 1;
    }
    let mut ll = 0.0;
    for cell in counts.values() {
        let total: u32 = cell.iter().sum();
        for &c in cell.iter().filter(|&&c| c > 0) {
            ll += c as f64 * (c as f64 / total as f64).ln();
        }
    }
    let penalty = (data.m() as f64).ln() / 2.0 * (r as f64 - 1.0) * q;
    ll - penalty
}

/// Scores every parent set within the candidate sets and the indegree bound.
/// The resulting collections are closed under inclusion.
pub fn bic_scores<S: Score>(
    data: &DiscreteDataset,
    opts: &BicOptions,
) -> Result<LocalScoreTable<S>> {
    let n = data.n();
    let candidates: Vec<NodeSet> = match &opts.candidate_parents {
        Some(c) => {
            if c.len() != n {
                return Err(Error::SizeMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
            for (i, &s) in c.iter().enumerate() {
                if s.contains(i) {
                    return Err(Error::SelfParent(i));
                }
                if !s.fits(n) {
                    return Err(Error::NodeOutOfRange { node: i, set: s, n });
                }
            }
            c.clone()
        }
        None => (0..n).map(|i| NodeSet::full(n).without(i)).collect(),
    };
    let sets: Vec<Vec<NodeSet>> = candidates
        .iter()
        .map(|c| {
            let mut v: Vec<NodeSet> = c
                .subsets()
                .filter(|s| s.len() <= opts.max_indegree)
                .collect();
            v.sort_by(NodeSet::canonical_cmp);
            v
        })
        .collect();
    let total: usize = sets.iter().map(Vec::len).sum();
    if total > opts.max_entries {
        return Err(Error::TooManyEntries {
            cap: opts.max_entries,
        });
    }
    let per_node = sets
        .into_par_iter()
        .enumerate()
        .map(|(i, row)| {
            row.into_iter()
                .map(|j| (j, S::from_f64_lossy(bic_local_score(data, i, j))))
                .collect()
        })
        .collect();
    LocalScoreTable::new(n, per_node)
}

/// Drops every parent set that has a proper subset in the input table with
/// an equal or better score. The empty set always survives.
pub fn prune_dominated<S: Score>(table: &LocalScoreTable<S>) -> LocalScoreTable<S> {
    table.filtered(|i, e| {
        !table.entries(i).iter().any(|o| {
            o.parents != e.parents && o.parents.is_subset_of(e.parents) && o.score >= e.score
        })
    })
}

/// `true` iff every collection contains all subsets of its members.
pub fn is_closed_under_inclusion<S: Score>(table: &LocalScoreTable<S>) -> bool {
    (0..table.n()).all(|i| {
        table.entries(i).iter().all(|e| {
            e.parents
                .iter()
                .all(|j| table.score(i, e.parents.without(j)).is_some())
        })
    })
}
