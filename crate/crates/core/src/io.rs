//! Text formats: Matrix Market (coordinate and array), labeled dense TSV,
//! and the TSV reports produced by the other modules.
//!
//! Every number is written with [`g17`], which round-trips `f64` exactly.

use std::fmt::Write as _;

use nalgebra::DMatrix;

use crate::diversity::{DistanceMatrix, Embedding, SplitImportance};
use crate::fmt::g17;
use crate::haar::{SparseSymMatrix, Triplet};
use crate::spectrum::{EigenEstimate, SpectrumEntry};
use crate::{Error, Result};

fn format_err(format: &'static str, line: usize, message: impl Into<String>) -> Error {
    Error::Format {
        format,
        line,
        message: message.into(),
    }
}

/// Matrix Market coordinate file. The symmetric variant stores the lower
/// triangle; `general` writes both triangles.
pub fn write_matrix_market(m: &SparseSymMatrix, general: bool) -> String {
    let kind = if general { "general" } else { "symmetric" };
    let count = if general { m.nnz_symmetric() } else { m.stored() };
    let mut out = format!("%%MatrixMarket matrix coordinate real {kind}\n{} {} {}\n", m.dim(), m.dim(), count);
    for t in m.triplets() {
        let v = g17(t.value);
        let _ = writeln!(out, "{} {} {}", t.col + 1, t.row + 1, v);
        if general && t.row != t.col {
            let _ = writeln!(out, "{} {} {}", t.row + 1, t.col + 1, v);
        }
    }
    out
}

struct MmHeader {
    array: bool,
    symmetric: bool,
}

fn parse_mm_header(line: &str) -> Result<MmHeader> {
    let words: Vec<String> = line.split_whitespace().map(|w| w.to_ascii_lowercase()).collect();
    if words.len() != 5 || words[0] != "%%matrixmarket" || words[1] != "matrix" {
        return Err(format_err("matrix market", 1, "missing %%MatrixMarket matrix header"));
    }
    let array = match words[2].as_str() {
        "coordinate" => false,
        "array" => true,
        other => return Err(format_err("matrix market", 1, format!("unsupported format {other:?}"))),
    };
    if words[3] != "real" && words[3] != "integer" {
        return Err(format_err("matrix market", 1, format!("unsupported field {:?}", words[3])));
    }
    let symmetric = match words[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(format_err("matrix market", 1, format!("unsupported symmetry {other:?}"))),
    };
    Ok(MmHeader { array, symmetric })
}

/// Data lines after the header, skipping comments and blanks.
fn mm_body(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .skip(1)
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('%'))
}

fn parse_fields<T: std::str::FromStr>(line: &str, ln: usize, n: usize) -> Result<Vec<T>> {
    let v: Vec<T> = line
        .split_whitespace()
        .map(|w| w.parse::<T>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| format_err("matrix market", ln, format!("cannot parse {line:?}")))?;
    if v.len() != n {
        return Err(format_err("matrix market", ln, format!("expected {n} fields, found {}", v.len())));
    }
    Ok(v)
}

/// Read a square Matrix Market file (coordinate or array, symmetric or
/// general) as a dense matrix.
pub fn read_matrix_market_dense(text: &str) -> Result<DMatrix<f64>> {
    let header = parse_mm_header(text.lines().next().unwrap_or(""))?;
    if header.array {
        return read_mm_array(text, header.symmetric);
    }
    let m = read_matrix_market(text)?;
    m.to_dense()
}

fn read_mm_array(text: &str, symmetric: bool) -> Result<DMatrix<f64>> {
    let mut body = mm_body(text);
    let (ln, size) = body.next().ok_or_else(|| format_err("matrix market", 2, "missing size line"))?;
    let dims: Vec<usize> = parse_fields(size, ln, 2)?;
    let (r, c) = (dims[0], dims[1]);
    if r != c {
        return Err(format_err("matrix market", ln, "matrix is not square"));
    }
    let mut m = DMatrix::zeros(r, c);
    // Column-major; the symmetric variant lists the lower triangle only.
    let positions: Vec<(usize, usize)> = (0..c)
        .flat_map(|j| (if symmetric { j } else { 0 }..r).map(move |i| (i, j)))
        .collect();
    let mut count = 0;
    for (ln, line) in body {
        let x: f64 = parse_fields::<f64>(line, ln, 1)?[0];
        let &(i, j) = positions
            .get(count)
            .ok_or_else(|| format_err("matrix market", ln, "too many entries"))?;
        m[(i, j)] = x;
        if symmetric {
            m[(j, i)] = x;
        }
        count += 1;
    }
    if count != positions.len() {
        return Err(format_err(
            "matrix market",
            0,
            format!("expected {} entries, found {count}", positions.len()),
        ));
    }
    Ok(m)
}

/// Read a Matrix Market coordinate file as a symmetric sparse matrix. A
/// general file must list both triangles with equal values.
pub fn read_matrix_market(text: &str) -> Result<SparseSymMatrix> {
    let header = parse_mm_header(text.lines().next().unwrap_or(""))?;
    if header.array {
        let dense = read_mm_array(text, header.symmetric)?;
        if dense != dense.transpose() {
            return Err(Error::arg("matrix is not symmetric"));
        }
        return Ok(SparseSymMatrix::from_dense(&dense, 0.0));
    }
    let mut body = mm_body(text);
    let (ln, size) = body.next().ok_or_else(|| format_err("matrix market", 2, "missing size line"))?;
    let dims: Vec<usize> = parse_fields(size, ln, 3)?;
    let (n, nnz) = (dims[0], dims[2]);
    if dims[1] != n {
        return Err(format_err("matrix market", ln, "matrix is not square"));
    }
    let mut upper = Vec::new();
    let mut lower = Vec::new();
    let mut count = 0;
    for (ln, line) in body {
        let w: Vec<&str> = line.split_whitespace().collect();
        if w.len() != 3 {
            return Err(format_err("matrix market", ln, format!("expected 3 fields in {line:?}")));
        }
        let parse_idx = |s: &str| -> Result<usize> {
            match s.parse::<usize>() {
                Ok(i) if i >= 1 && i <= n => Ok(i - 1),
                _ => Err(format_err("matrix market", ln, format!("bad index {s:?}"))),
            }
        };
        let (i, j) = (parse_idx(w[0])?, parse_idx(w[1])?);
        let value: f64 = w[2]
            .parse()
            .map_err(|_| format_err("matrix market", ln, format!("bad value {:?}", w[2])))?;
        count += 1;
        if header.symmetric {
            if i < j {
                return Err(format_err("matrix market", ln, "symmetric file has an upper-triangle entry"));
            }
            upper.push(Triplet { row: j, col: i, value });
        } else if i <= j {
            upper.push(Triplet { row: i, col: j, value });
        } else {
            lower.push(Triplet { row: j, col: i, value });
        }
    }
    if count != nnz {
        return Err(format_err("matrix market", 0, format!("header declares {nnz} entries, found {count}")));
    }
    if !header.symmetric {
        let key = |t: &Triplet| (t.row, t.col);
        upper.sort_by_key(key);
        lower.sort_by_key(key);
        let off: Vec<&Triplet> = upper.iter().filter(|t| t.row != t.col).collect();
        let mirrored = off.len() == lower.len()
            && off.iter().zip(&lower).all(|(a, b)| key(a) == key(b) && a.value == b.value);
        if !mirrored {
            return Err(Error::arg("general matrix market file is not symmetric"));
        }
    }
    SparseSymMatrix::new(n, upper)
}

/// Dense Matrix Market array file (general, column-major).
pub fn write_matrix_market_array(m: &DMatrix<f64>) -> String {
    let mut out = format!("%%MatrixMarket matrix array real general\n{} {}\n", m.nrows(), m.ncols());
    for x in m.iter() {
        out.push_str(&g17(*x));
        out.push('\n');
    }
    out
}

/// Square matrix with a header row and a leading column of labels.
pub fn write_labeled_tsv(labels: &[String], m: &DMatrix<f64>) -> String {
    let mut out = String::new();
    for l in labels {
        out.push('\t');
        out.push_str(l);
    }
    out.push('\n');
    for (i, l) in labels.iter().enumerate() {
        out.push_str(l);
        for j in 0..m.ncols() {
            out.push('\t');
            out.push_str(&g17(m[(i, j)]));
        }
        out.push('\n');
    }
    out
}

/// Inverse of [`write_labeled_tsv`]; row labels must repeat the header.
pub fn read_labeled_tsv(text: &str) -> Result<(Vec<String>, DMatrix<f64>)> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| format_err("tsv", 1, "empty file"))?;
    let labels: Vec<String> = header.split('\t').skip(1).map(str::to_string).collect();
    let n = labels.len();
    let mut m = DMatrix::zeros(n, n);
    let mut rows = 0;
    for (ln, line) in lines {
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != n + 1 {
            return Err(format_err("tsv", ln, format!("expected {} fields, found {}", n + 1, fields.len())));
        }
        if rows >= n || fields[0] != labels[rows] {
            return Err(format_err("tsv", ln, format!("row label {:?} does not match the header", fields[0])));
        }
        for (j, f) in fields[1..].iter().enumerate() {
            m[(rows, j)] = f
                .trim()
                .parse()
                .map_err(|_| format_err("tsv", ln, format!("not a number: {f:?}")))?;
        }
        rows += 1;
    }
    if rows != n {
        return Err(format_err("tsv", 0, format!("expected {n} rows, found {rows}")));
    }
    Ok((labels, m))
}

/// `node<TAB>lambda`, one row per internal rank.
pub fn write_lambda_tsv(lambda: &[f64]) -> String {
    let mut out = String::from("node\tlambda\n");
    for (r, l) in lambda.iter().enumerate() {
        let _ = writeln!(out, "{r}\t{}", g17(*l));
    }
    out
}

pub fn write_distance_tsv(d: &DistanceMatrix) -> String {
    write_labeled_tsv(&d.sample_ids, &d.values)
}

pub fn read_distance_tsv(text: &str, metric: &str) -> Result<DistanceMatrix> {
    let (labels, m) = read_labeled_tsv(text)?;
    DistanceMatrix::new(labels, m, metric)
}

/// `sample_id<TAB>x1..xd`.
pub fn write_embedding_tsv(e: &Embedding) -> String {
    let mut out = String::from("sample_id");
    for k in 1..=e.coords.ncols() {
        let _ = write!(out, "\tx{k}");
    }
    out.push('\n');
    for (i, id) in e.sample_ids.iter().enumerate() {
        out.push_str(id);
        for k in 0..e.coords.ncols() {
            out.push('\t');
            out.push_str(&g17(e.coords[(i, k)]));
        }
        out.push('\n');
    }
    out
}

/// Splits in decreasing order of score.
pub fn write_splits_tsv(s: &SplitImportance) -> String {
    let mut out = String::from("rank\tnode\tscore\tz\tleft_leaves\tright_leaves\tleft_examples\tright_examples\n");
    for (pos, &r) in s.ranking.iter().enumerate() {
        let _ = writeln!(
            out,
            "{}\t{r}\t{}\t{}\t{}\t{}\t{}\t{}",
            pos + 1,
            g17(s.scores[r]),
            g17(s.z[r]),
            s.left_count[r],
            s.right_count[r],
            s.left_labels[r].join(","),
            s.right_labels[r].join(","),
        );
    }
    out
}

/// `node<TAB>lambda<TAB>error_bound<TAB>cosine`.
pub fn write_estimates_tsv(estimates: &[EigenEstimate]) -> String {
    let mut out = String::from("node\tlambda\terror_bound\tcosine\n");
    for (r, e) in estimates.iter().enumerate() {
        let _ = writeln!(out, "{r}\t{}\t{}\t{}", g17(e.lambda), g17(e.error_bound), g17(e.cosine));
    }
    out
}

/// `eigenvalue<TAB>multiplicity`.
pub fn write_spectrum_tsv(entries: &[SpectrumEntry]) -> String {
    let mut out = String::from("eigenvalue\tmultiplicity\n");
    for e in entries {
        let _ = writeln!(out, "{}\t{}", g17(e.value), e.multiplicity);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SparseSymMatrix {
        SparseSymMatrix::new(
            3,
            vec![
                Triplet { row: 0, col: 0, value: 2.0 },
                Triplet { row: 0, col: 2, value: 0.1 },
                Triplet { row: 1, col: 1, value: 2.0 },
                Triplet { row: 2, col: 2, value: 8.0 },
            ],
        )
        .unwrap()
    }

    #[test]
    fn coordinate_round_trip() {
        let m = sample();
        let text = write_matrix_market(&m, false);
        assert!(text.starts_with("%%MatrixMarket matrix coordinate real symmetric\n3 3 4\n"));
        assert!(text.contains("3 1 0.10000000000000001\n"));
        assert_eq!(read_matrix_market(&text).unwrap(), m);
        let general = write_matrix_market(&m, true);
        assert!(general.contains("3 3 5\n"));
        assert_eq!(read_matrix_market(&general).unwrap(), m);
    }

    #[test]
    fn coordinate_errors() {
        let bad_sym = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n1 2 1.0\n";
        assert!(read_matrix_market(bad_sym).is_err());
        let asym = "%%MatrixMarket matrix coordinate real general\n2 2 1\n1 2 1.0\n";
        assert!(read_matrix_market(asym).is_err());
        let count = "%%MatrixMarket matrix coordinate real symmetric\n2 2 2\n1 1 1.0\n";
        assert!(read_matrix_market(count).is_err());
        assert!(read_matrix_market("hello\n").is_err());
        let range = "%%MatrixMarket matrix coordinate real symmetric\n2 2 1\n3 1 1.0\n";
        assert!(read_matrix_market(range).is_err());
    }

    #[test]
    fn array_round_trip() {
        let m = DMatrix::from_row_slice(2, 2, &[5.0, 2.0, 2.0, 3.0]);
        let text = write_matrix_market_array(&m);
        assert_eq!(read_matrix_market_dense(&text).unwrap(), m);
        let sym = "%%MatrixMarket matrix array real symmetric\n% c\n2 2\n5\n2\n3\n";
        assert_eq!(read_matrix_market_dense(sym).unwrap(), m);
    }

    #[test]
    fn labeled_tsv_round_trip() {
        let labels = vec!["a".to_string(), "b".to_string()];
        let m = DMatrix::from_row_slice(2, 2, &[0.0, 0.3, 0.3, 0.0]);
        let text = write_labeled_tsv(&labels, &m);
        assert_eq!(text, "\ta\tb\na\t0\t0.29999999999999999\nb\t0.29999999999999999\t0\n");
        assert_eq!(read_labeled_tsv(&text).unwrap(), (labels, m));
        assert!(read_labeled_tsv("\ta\tb\nb\t0\t1\na\t1\t0\n").is_err());
    }

    #[test]
    fn lambda_tsv() {
        assert_eq!(write_lambda_tsv(&[2.0, 8.0]), "node\tlambda\n0\t2\n1\t8\n");
    }
}
