use std::collections::HashMap;
use std::path::Path;

use crate::tree::OrbTree;
use crate::{Error, Result};

/// Layout of an abundance TSV.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Header row of OTU labels; one row per sample.
    #[default]
    SamplesAsRows,
    /// QIITA/BIOM-export style: header row of sample ids (optionally ending
    /// in a `taxonomy` column), one row per OTU.
    OtusAsRows,
}

/// What to do with OTU labels that are not leaves of the tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum UnknownLabels {
    #[default]
    Drop,
    Error,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct LoadOptions {
    pub orientation: Orientation,
    pub unknown: UnknownLabels,
}

/// Samples as probability vectors over the leaves of a tree, indexed by
/// postorder leaf index.
#[derive(Debug, Clone, PartialEq)]
pub struct AbundanceTable {
    sample_ids: Vec<String>,
    rows: Vec<Vec<f64>>,
    dropped: Vec<String>,
}

impl AbundanceTable {
    /// Normalize nonnegative rows already aligned to the tree's leaves.
    pub fn from_rows(tree: &OrbTree, sample_ids: Vec<String>, rows: Vec<Vec<f64>>) -> Result<Self> {
        if sample_ids.len() != rows.len() {
            return Err(Error::Dimension {
                expected: sample_ids.len(),
                found: rows.len(),
            });
        }
        let mut out = Vec::with_capacity(rows.len());
        for (id, row) in sample_ids.iter().zip(rows) {
            if row.len() != tree.n_leaves() {
                return Err(Error::Dimension {
                    expected: tree.n_leaves(),
                    found: row.len(),
                });
            }
            out.push(normalize(id, row)?);
        }
        Ok(AbundanceTable {
            sample_ids,
            rows: out,
            dropped: Vec::new(),
        })
    }

    pub fn sample_ids(&self) -> &[String] {
        &self.sample_ids
    }

    pub fn n_samples(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, sample: usize) -> &[f64] {
        &self.rows[sample]
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.rows
    }

    pub fn sample_index(&self, id: &str) -> Option<usize> {
        self.sample_ids.iter().position(|s| s == id)
    }

    /// Column labels that matched no leaf and were dropped.
    pub fn dropped_labels(&self) -> &[String] {
        &self.dropped
    }
}

fn normalize(id: &str, mut row: Vec<f64>) -> Result<Vec<f64>> {
    if let Some(x) = row.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::Abundance(format!("sample {id:?} has invalid entry {x}")));
    }
    let total: f64 = row.iter().sum();
    if total <= 0.0 {
        return Err(Error::Abundance(format!("sample {id:?} has no mass on the tree's leaves")));
    }
    row.iter_mut().for_each(|x| *x /= total);
    Ok(row)
}

pub fn load_abundance(path: impl AsRef<Path>, tree: &OrbTree, options: &LoadOptions) -> Result<AbundanceTable> {
    let text = std::fs::read_to_string(path)?;
    parse_abundance(&text, tree, options)
}

fn parse_number(field: &str, line: usize) -> Result<f64> {
    field.trim().parse::<f64>().map_err(|_| Error::Format {
        format: "abundance",
        line,
        message: format!("not a number: {field:?}"),
    })
}

pub fn parse_abundance(text: &str, tree: &OrbTree, options: &LoadOptions) -> Result<AbundanceTable> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with("# "));
    let (_, header) = lines.next().ok_or_else(|| Error::Abundance("empty table".into()))?;
    let header: Vec<&str> = header.split('\t').collect();

    // Collect (otu label, per-sample values) regardless of orientation.
    let (sample_ids, otus): (Vec<String>, Vec<(String, Vec<f64>)>) = match options.orientation {
        Orientation::SamplesAsRows => {
            let labels = &header[1..];
            let mut ids = Vec::new();
            let mut cols: Vec<Vec<f64>> = vec![Vec::new(); labels.len()];
            for (ln, line) in lines {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != header.len() {
                    return Err(Error::Format {
                        format: "abundance",
                        line: ln,
                        message: format!("expected {} fields, found {}", header.len(), fields.len()),
                    });
                }
                ids.push(fields[0].to_string());
                for (c, f) in fields[1..].iter().enumerate() {
                    cols[c].push(parse_number(f, ln)?);
                }
            }
            let otus = labels.iter().map(|l| l.to_string()).zip(cols).collect();
            (ids, otus)
        }
        Orientation::OtusAsRows => {
            let taxonomy = header.len() > 1 && header[header.len() - 1].eq_ignore_ascii_case("taxonomy");
            let width = if taxonomy { header.len() - 1 } else { header.len() };
            let ids: Vec<String> = header[1..width].iter().map(|s| s.to_string()).collect();
            let mut otus = Vec::new();
            for (ln, line) in lines {
                let fields: Vec<&str> = line.split('\t').collect();
                if fields.len() != header.len() {
                    return Err(Error::Format {
                        format: "abundance",
                        line: ln,
                        message: format!("expected {} fields, found {}", header.len(), fields.len()),
                    });
                }
                let values = fields[1..width].iter().map(|f| parse_number(f, ln)).collect::<Result<Vec<_>>>()?;
                otus.push((fields[0].to_string(), values));
            }
            (ids, otus)
        }
    };
    if sample_ids.is_empty() {
        return Err(Error::Abundance("table has no samples".into()));
    }

    let index: HashMap<&str, usize> = tree.leaf_labels().iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut rows = vec![vec![0.0; tree.n_leaves()]; sample_ids.len()];
    let mut seen = vec![false; tree.n_leaves()];
    let mut dropped = Vec::new();
    for (label, values) in otus {
        match index.get(label.as_str()) {
            Some(&leaf) => {
                if seen[leaf] {
                    return Err(Error::Abundance(format!("duplicate OTU label {label:?}")));
                }
                seen[leaf] = true;
                for (row, x) in rows.iter_mut().zip(values) {
                    row[leaf] = x;
                }
            }
            None => match options.unknown {
                UnknownLabels::Drop => dropped.push(label),
                UnknownLabels::Error => {
                    return Err(Error::Abundance(format!("OTU label {label:?} is not a leaf of the tree")))
                }
            },
        }
    }
    let mut table = AbundanceTable::from_rows(tree, sample_ids, rows)?;
    table.dropped = dropped;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{parse_newick, NewickOptions};

    fn three_leaf() -> OrbTree {
        parse_newick("((1:3,2:1):0,3:2):2;", &NewickOptions::default()).unwrap()
    }

    #[test]
    fn samples_as_rows() {
        let t = three_leaf();
        let text = "sample\t1\t2\t3\na\t1\t0\t0\nb\t0\t0\t1\nc\t2\t2\t0\n";
        let tab = parse_abundance(text, &t, &LoadOptions::default()).unwrap();
        assert_eq!(tab.row(0), &[1.0, 0.0, 0.0]);
        assert_eq!(tab.row(1), &[0.0, 0.0, 1.0]);
        assert_eq!(tab.row(2), &[0.5, 0.5, 0.0]);
        assert_eq!(tab.sample_index("c"), Some(2));
    }

    #[test]
    fn otus_as_rows_with_taxonomy_and_comments() {
        let t = three_leaf();
        let text = "# Constructed from biom file\n#OTU ID\ts1\ts2\ttaxonomy\n3\t1\t0\tk__B\n1\t1\t4\tk__B\n99\t5\t5\tk__A\n";
        let tab = parse_abundance(
            text,
            &t,
            &LoadOptions {
                orientation: Orientation::OtusAsRows,
                unknown: UnknownLabels::Drop,
            },
        )
        .unwrap();
        assert_eq!(tab.sample_ids(), ["s1", "s2"]);
        assert_eq!(tab.row(0), &[0.5, 0.0, 0.5]);
        assert_eq!(tab.row(1), &[1.0, 0.0, 0.0]);
        assert_eq!(tab.dropped_labels(), ["99"]);
        let strict = LoadOptions {
            orientation: Orientation::OtusAsRows,
            unknown: UnknownLabels::Error,
        };
        assert!(parse_abundance(text, &t, &strict).is_err());
    }

    #[test]
    fn invalid_rows() {
        let t = three_leaf();
        let opts = LoadOptions::default();
        assert!(parse_abundance("s\t1\t2\t3\na\t0\t0\t0\n", &t, &opts).is_err());
        assert!(parse_abundance("s\t1\t2\t3\na\t-1\t2\t0\n", &t, &opts).is_err());
        assert!(parse_abundance("s\t1\t2\t3\na\t1\t2\n", &t, &opts).is_err());
        assert!(parse_abundance("s\t1\t1\t3\na\t1\t2\t0\n", &t, &opts).is_err());
        assert!(parse_abundance("s\t1\t2\t3\na\tx\t2\t0\n", &t, &opts).is_err());
        // all mass on dropped columns
        assert!(parse_abundance("s\t9\t2\na\t1\t0\n", &t, &opts).is_err());
    }
}
